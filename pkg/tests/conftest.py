import pytest

from unifact import construct
from unifact.unispace import space_for, standard_objects


@pytest.fixture(scope="session")
def space42():
    return space_for(2, 4)


@pytest.fixture(scope="session")
def objs42(space42):
    return standard_objects(space42)


@pytest.fixture(scope="session")
def su42():
    return construct.build_su(4, 2)


@pytest.fixture(scope="session")
def k_v42(su42, objs42):
    return su42.stabilizer(objs42.v, label="SU3(2)")


@pytest.fixture(scope="session")
def levi22(space42):
    return construct.build_levi_T(2, 2, space=space42)


@pytest.fixture(scope="session")
def radical22(space42):
    return construct.build_radical_R(2, 2, space=space42)


@pytest.fixture(scope="session")
def rs42(radical22, levi22):
    handle, _ = construct.assemble([radical22, levi22], label="R:SL2(4)")
    return handle


@pytest.fixture(scope="session")
def sp42(space42):
    return construct.build_sp2m_in_su(2, 2, space=space42)


@pytest.fixture(scope="session")
def su62():
    return construct.build_su(6, 2)
