import pytest

from rdwaves import (
    DegenerateFamilySpec,
    limited_flux,
    linear_flux,
    logistic_reaction,
    make_example,
    make_example4,
    poly_reaction,
)


@pytest.fixture(scope="session")
def fisher():
    return linear_flux(1.0), logistic_reaction(1.0)


@pytest.fixture(scope="session")
def limited():
    return limited_flux()


@pytest.fixture(scope="session")
def band():
    return make_example(3)


@pytest.fixture(scope="session")
def band_spec():
    return DegenerateFamilySpec()


@pytest.fixture(scope="session")
def pushed():
    return linear_flux(1.0), poly_reaction([1.0, 8.0])


@pytest.fixture(scope="session")
def band_lifted_small():
    return make_example4(DegenerateFamilySpec(lam=0.048))


@pytest.fixture(scope="session")
def band_lifted_large():
    return make_example4(DegenerateFamilySpec(lam=0.75))
