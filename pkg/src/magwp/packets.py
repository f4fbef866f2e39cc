"""Hagedorn wave packet parameters and their canonical vectorization.

A squeezed Gaussian wave packet is parametrized by (eps, q, p, Q, P, S) where
the complex width matrices (Q, P) satisfy the symplecticity condition: the
real 2d x 2d matrix

    Y = [[Re Q, Im Q], [Re P, Im P]]

obeys Y^T Omega Y = Omega.  The packet parameters vectorize into a canonical
phase-space point (qB, pB) of dimension D = d + 2 d^2 each,

    qB = (q, scs*vec(Re Q), scs*vec(Im Q)),
    pB = (p, scs*vec(Re P), scs*vec(Im P)),      scs = sqrt(eps/2),

with column-major vec.  All types here are immutable value objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotPositiveDefinite, NotSymplectic

#: Default absolute Frobenius tolerance for the symplecticity condition.
SYMPL_TOL = 1e-10


def vec(M: np.ndarray) -> np.ndarray:
    """Column-major (Fortran) vectorization of a matrix."""
    return np.asarray(M).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`vec` for a d x d matrix."""
    return np.asarray(v).reshape((d, d), order="F")


def omega(d: int) -> np.ndarray:
    """Canonical structure matrix Omega_d = [[0, I], [-I, 0]] of size 2d."""
    I = np.eye(d)
    Z = np.zeros((d, d))
    return np.block([[Z, I], [-I, Z]])


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a)
    out.flags.writeable = False
    return out


def symplecticity_residual(Q: np.ndarray, P: np.ndarray) -> float:
    """Frobenius norm of Y^T Omega Y - Omega for Y built from (Q, P)."""
    Q = np.asarray(Q, dtype=complex)
    P = np.asarray(P, dtype=complex)
    d = Q.shape[0]
    Y = np.block([[Q.real, Q.imag], [P.real, P.imag]])
    Om = omega(d)
    return float(np.linalg.norm(Y.T @ Om @ Y - Om))


def kinetic_residual(Q: np.ndarray, P: np.ndarray, M: np.ndarray) -> float:
    """Residual of the shifted symplecticity condition for kinetic width matrices.

    With Y_M built from (Q, P - M Q), the condition

        Y_M^T [[M - M^T, I], [-I, 0]] Y_M = Omega

    holds if and only if (Q, P) satisfy the plain symplecticity condition.
    Returns the Frobenius norm of the defect.
    """
    Q = np.asarray(Q, dtype=complex)
    P = np.asarray(P, dtype=complex)
    M = np.asarray(M, dtype=float)
    d = Q.shape[0]
    YM = np.block(
        [[Q.real, Q.imag], [P.real - M @ Q.real, P.imag - M @ Q.imag]]
    )
    I = np.eye(d)
    Z = np.zeros((d, d))
    OmM = np.block([[M - M.T, I], [-I, Z]])
    return float(np.linalg.norm(YM.T @ OmM @ YM - omega(d)))


@dataclass(frozen=True)
class GaussianPacket:
    """Hagedorn parameters (eps, q, p, Q, P, S) of a normalized wave packet.

    Construction verifies invertibility of Q and P, the symplecticity
    condition up to ``tol_sympl`` and positive definiteness of Im(P Q^{-1}).
    """

    eps: float
    q: np.ndarray
    p: np.ndarray
    Q: np.ndarray
    P: np.ndarray
    S: float = 0.0
    tol_sympl: float = field(default=SYMPL_TOL, repr=False)

    def __post_init__(self):
        q = _frozen(np.asarray(self.q, dtype=float))
        p = _frozen(np.asarray(self.p, dtype=float))
        Q = _frozen(np.asarray(self.Q, dtype=complex))
        P = _frozen(np.asarray(self.P, dtype=complex))
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "P", P)
        d = q.shape[0]
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if p.shape != (d,) or Q.shape != (d, d) or P.shape != (d, d):
            raise DimensionMismatch(
                f"inconsistent shapes: q {q.shape}, p {p.shape}, Q {Q.shape}, P {P.shape}"
            )
        for name, M in (("Q", Q), ("P", P)):
            cond = np.linalg.cond(M)
            if not np.isfinite(cond) or cond > 1e14:
                raise NotSymplectic(f"{name} is singular or near-singular")
        res = symplecticity_residual(Q, P)
        if res > self.tol_sympl:
            raise NotSymplectic(
                f"symplecticity residual {res:.3e} exceeds tolerance {self.tol_sympl:.1e}"
            )
        C_im = (P @ np.linalg.inv(Q)).imag
        try:
            np.linalg.cholesky(0.5 * (C_im + C_im.T))
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite("Im(P Q^{-1}) is not positive definite") from None

    @property
    def d(self) -> int:
        return self.q.shape[0]


@dataclass(frozen=True)
class CanonicalState:
    """Vectorized phase-space point (qB, pB) with time and phase carried along.

    The phase S is excluded from the symplectic phase space; it evolves by a
    separate scalar equation.
    """

    d: int
    eps: float
    qB: np.ndarray
    pB: np.ndarray
    t: float = 0.0
    S: float = 0.0

    def __post_init__(self):
        qB = _frozen(np.asarray(self.qB, dtype=float))
        pB = _frozen(np.asarray(self.pB, dtype=float))
        object.__setattr__(self, "qB", qB)
        object.__setattr__(self, "pB", pB)
        D = self.d + 2 * self.d * self.d
        if qB.shape != (D,) or pB.shape != (D,):
            raise DimensionMismatch(
                f"expected vectors of length {D} for d={self.d}, "
                f"got {qB.shape[0]} and {pB.shape[0]}"
            )

    @property
    def D(self) -> int:
        return self.d + 2 * self.d * self.d

    @property
    def scs(self) -> float:
        return float(np.sqrt(self.eps / 2.0))

    # scaled width blocks (scs * Re Q etc.), reshaped to d x d
    @property
    def Rq(self) -> np.ndarray:
        d = self.d
        return unvec(self.qB[d : d + d * d], d)

    @property
    def Iq(self) -> np.ndarray:
        d = self.d
        return unvec(self.qB[d + d * d :], d)

    @property
    def Rp(self) -> np.ndarray:
        d = self.d
        return unvec(self.pB[d : d + d * d], d)

    @property
    def Ip(self) -> np.ndarray:
        d = self.d
        return unvec(self.pB[d + d * d :], d)

    @property
    def q(self) -> np.ndarray:
        return self.qB[: self.d]

    @property
    def p(self) -> np.ndarray:
        return self.pB[: self.d]

    @property
    def Q(self) -> np.ndarray:
        return (self.Rq + 1j * self.Iq) / self.scs

    @property
    def P(self) -> np.ndarray:
        return (self.Rp + 1j * self.Ip) / self.scs

    def y_matrix(self) -> np.ndarray:
        """The 2d x 2d matrix Y = [[Re Q, Im Q], [Re P, Im P]]."""
        s = self.scs
        return np.block([[self.Rq, self.Iq], [self.Rp, self.Ip]]) / s

    def sympl_residual(self) -> float:
        """|| Y^T Omega Y - Omega ||_F for this state's width blocks."""
        Y = self.y_matrix()
        Om = omega(self.d)
        return float(np.linalg.norm(Y.T @ Om @ Y - Om))

    def with_(self, **kw) -> "CanonicalState":
        """Copy with replaced fields, skipping re-validation (shapes are
        preserved by construction on all internal update paths)."""
        st = object.__new__(CanonicalState)
        for name in ("d", "eps", "qB", "pB", "t", "S"):
            val = kw.get(name, getattr(self, name))
            if name in ("qB", "pB") and val.flags.writeable:
                val.flags.writeable = False
            object.__setattr__(st, name, val)
        return st


@dataclass(frozen=True)
class KineticState:
    """Phase-space point in kinetic momenta, vB = pB - AB(t, qB)."""

    d: int
    eps: float
    qB: np.ndarray
    vB: np.ndarray
    t: float = 0.0
    S: float = 0.0

    def __post_init__(self):
        qB = _frozen(np.asarray(self.qB, dtype=float))
        vB = _frozen(np.asarray(self.vB, dtype=float))
        object.__setattr__(self, "qB", qB)
        object.__setattr__(self, "vB", vB)
        D = self.d + 2 * self.d * self.d
        if qB.shape != (D,) or vB.shape != (D,):
            raise DimensionMismatch(
                f"expected vectors of length {D} for d={self.d}, "
                f"got {qB.shape[0]} and {vB.shape[0]}"
            )

    @property
    def D(self) -> int:
        return self.d + 2 * self.d * self.d

    @property
    def scs(self) -> float:
        return float(np.sqrt(self.eps / 2.0))

    @property
    def Rq(self) -> np.ndarray:
        d = self.d
        return unvec(self.qB[d : d + d * d], d)

    @property
    def Iq(self) -> np.ndarray:
        d = self.d
        return unvec(self.qB[d + d * d :], d)

    @property
    def q(self) -> np.ndarray:
        return self.qB[: self.d]

    def y_matrix(self) -> np.ndarray:
        """Y built from the kinetic width blocks (Q and the shifted P)."""
        d = self.d
        s = self.scs
        Rv = unvec(self.vB[d : d + d * d], d)
        Iv = unvec(self.vB[d + d * d :], d)
        return np.block([[self.Rq, self.Iq], [Rv, Iv]]) / s

    def with_(self, **kw) -> "KineticState":
        """Copy with replaced fields, skipping re-validation."""
        st = object.__new__(KineticState)
        for name in ("d", "eps", "qB", "vB", "t", "S"):
            val = kw.get(name, getattr(self, name))
            if name in ("qB", "vB") and val.flags.writeable:
                val.flags.writeable = False
            object.__setattr__(st, name, val)
        return st


@dataclass(frozen=True)
class WignerMoments:
    """Phase-space mean z = (q, p) and covariance Sigma = (eps/2) Y Y^T."""

    z: np.ndarray
    Sigma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", _frozen(np.asarray(self.z, dtype=float)))
        object.__setattr__(self, "Sigma", _frozen(np.asarray(self.Sigma, dtype=float)))


def vectorize(packet: GaussianPacket, t: float = 0.0) -> CanonicalState:
    """Map Hagedorn parameters to the canonical coordinates (qB, pB)."""
    scs = np.sqrt(packet.eps / 2.0)
    qB = np.concatenate(
        [packet.q, scs * vec(packet.Q.real), scs * vec(packet.Q.imag)]
    )
    pB = np.concatenate(
        [packet.p, scs * vec(packet.P.real), scs * vec(packet.P.imag)]
    )
    return CanonicalState(d=packet.d, eps=packet.eps, qB=qB, pB=pB, t=t, S=packet.S)


def devectorize(state: CanonicalState, tol_sympl: float = SYMPL_TOL) -> GaussianPacket:
    """Exact inverse of :func:`vectorize` (packet invariants are re-checked)."""
    return GaussianPacket(
        eps=state.eps,
        q=state.q.copy(),
        p=state.p.copy(),
        Q=state.Q,
        P=state.P,
        S=state.S,
        tol_sympl=tol_sympl,
    )


def wigner_moments(packet: GaussianPacket) -> WignerMoments:
    """Mean and covariance of the packet's Wigner function."""
    Y = np.block(
        [[packet.Q.real, packet.Q.imag], [packet.P.real, packet.P.imag]]
    )
    Sigma = (packet.eps / 2.0) * (Y @ Y.T)
    Sigma = 0.5 * (Sigma + Sigma.T)
    z = np.concatenate([packet.q, packet.p])
    return WignerMoments(z=z, Sigma=Sigma)
