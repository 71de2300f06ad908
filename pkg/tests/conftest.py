import pytest

import hypaction as H


@pytest.fixture(scope="session")
def f2():
    return H.FreeGroupSpec(2)


@pytest.fixture(scope="session")
def z23():
    return H.FreeProductSpec((2, 3))


@pytest.fixture(scope="session")
def f2_engine(f2):
    return H.ChainEngine(f2)


@pytest.fixture(scope="session")
def z23_engine(z23):
    return H.ChainEngine(z23)


@pytest.fixture(scope="session")
def f2_ball3(f2):
    return H.build_ball(f2, 3)


@pytest.fixture(scope="session")
def f2_ball6(f2):
    return H.build_ball(f2, 6)


@pytest.fixture(scope="session")
def f2_ball10(f2):
    return H.build_ball(f2, 10)


@pytest.fixture(scope="session")
def z23_ball6(z23):
    return H.build_ball(z23, 6)


@pytest.fixture(scope="session")
def z23_ball8(z23):
    return H.build_ball(z23, 8)
