import numpy as np
import pytest
from scipy.linalg import expm

from magwp import GaussianPacket, vectorize
from magwp.packets import omega


def random_symplectic_QP(d, rng):
    """Random (Q, P) satisfying the symplecticity condition, built by
    exponentiating a Hamiltonian matrix Omega*S with S symmetric."""
    S = rng.standard_normal((2 * d, 2 * d))
    S = 0.5 * (S + S.T)
    Y = expm(omega(d) @ S)
    Q = Y[:d, :d] + 1j * Y[:d, d:]
    P = Y[d:, :d] + 1j * Y[d:, d:]
    return Q, P


def random_state(d, eps, rng, scale=1.0):
    """Random valid CanonicalState from a random symplectic packet."""
    Q, P = random_symplectic_QP(d, rng)
    pk = GaussianPacket(
        eps=eps,
        q=scale * rng.standard_normal(d),
        p=scale * rng.standard_normal(d),
        Q=Q,
        P=P,
        tol_sympl=1e-8,
    )
    return vectorize(pk)


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


@pytest.fixture
def unit_packet_2d():
    """q=(1,1), p=(1,0), Q=Id, P=i Id at eps=1e-3: the 2-d experiment start."""
    return GaussianPacket(
        eps=1e-3,
        q=np.array([1.0, 1.0]),
        p=np.array([1.0, 0.0]),
        Q=np.eye(2),
        P=1j * np.eye(2),
    )


@pytest.fixture
def penning_packet():
    q0 = np.array([0.133, 0.133, 0.258])
    p0 = np.array([0.133, 7.492, 3.879])
    return GaussianPacket(
        eps=1.19e-8,
        q=q0,
        p=p0,
        Q=np.diag(q0),
        P=1j * np.linalg.inv(np.diag(q0)),
        S=1.009,
    )
