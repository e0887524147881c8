import pytest

from ncjoin import corpus


@pytest.fixture(scope="session")
def c2():
    return corpus.system("c2")


@pytest.fixture(scope="session")
def c3():
    return corpus.system("c3")


@pytest.fixture(scope="session")
def c5():
    return corpus.system("c5")


@pytest.fixture(scope="session")
def id2():
    return corpus.system("id2")


@pytest.fixture(scope="session")
def id3():
    return corpus.system("id3")


@pytest.fixture(scope="session")
def pauli():
    return corpus.system("pauli")


@pytest.fixture(scope="session")
def gibbs():
    return corpus.system("gibbs")


@pytest.fixture(scope="session")
def dual_shift():
    return corpus.dual("dual_shift").system


@pytest.fixture(scope="session")
def dual_cycle2():
    return corpus.dual("dual_cycle2").system


@pytest.fixture(scope="session")
def dual_mixed():
    return corpus.dual("dual_mixed").system


@pytest.fixture(scope="session")
def dual_finperm():
    return corpus.dual("dual_finperm_shift").system
