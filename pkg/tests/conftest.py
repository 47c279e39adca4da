import numpy as np
import pytest

from spintomo import make_preset, plan_tomography


def random_hermitian(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (g + g.conj().T) / 2


def random_unitary(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture(scope="session")
def xy_plan_n2():
    pre = make_preset("xy")
    return pre, plan_tomography(pre.pair_unitary(), 2, model="xy", mode="switchable", tau=pre.tau)


@pytest.fixture(scope="session")
def xy_plan_n3():
    pre = make_preset("xy")
    return pre, plan_tomography(pre.pair_unitary(), 3, model="xy", mode="switchable", tau=pre.tau)


@pytest.fixture(scope="session")
def heis_plan_n2():
    pre = make_preset("heisenberg")
    return pre, plan_tomography(
        pre.pair_unitary(), 2, model="heisenberg", mode="switchable", tau=pre.tau
    )
