"""Scalar and vector potentials with analytic derivatives up to third order.

A :class:`FieldSet` evaluates, at time t and a batch of positions x, the
vector potential A with Jacobian, Hessians and third derivatives, the time
derivative of A with its Jacobian, and the scalar potential V with gradient
and Hessian.  All builtins provide closed-form derivatives; the averaging
module turns them into Gaussian expectations by quadrature, which is what
keeps the block structure of the equations of motion exact.

Index conventions: JA[k, j] = d_j A_k, HA[k, i, j] = d_i d_j A_k,
TA[k, m, i, j] = d_m d_i d_j A_k.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BadParams, UnknownBuiltin


@dataclass(frozen=True)
class FieldDerivs:
    """Pointwise derivative values at a batch of n positions."""

    A: np.ndarray  # (n, d)
    JA: np.ndarray  # (n, d, d)
    HA: np.ndarray  # (n, d, d, d)
    TA: np.ndarray  # (n, d, d, d, d)
    dtA: np.ndarray  # (n, d)
    JdtA: np.ndarray  # (n, d, d)
    V: np.ndarray  # (n,)
    gV: np.ndarray  # (n, d)
    HV: np.ndarray  # (n, d, d)


@dataclass(frozen=True, eq=False)
class FieldSet:
    """Evaluator of (V, A) and their spatial/time derivatives.

    ``kernel`` is an optional dispatch key for the compiled quadrature core;
    the pure-numpy path only uses ``_derivs``.
    """

    d: int
    is_linear_A: bool
    is_time_dependent: bool
    name: str
    params: dict
    _derivs: Callable[[float, np.ndarray], FieldDerivs]
    kernel: tuple | None = None

    def derivs(self, t: float, xs: np.ndarray) -> FieldDerivs:
        """Derivative bundle at positions ``xs`` of shape (n, d)."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        return self._derivs(t, xs)


def eval_bundle(field: FieldSet, t: float, x: np.ndarray) -> FieldDerivs:
    """All derivative values at a single point (t, x); arrays keep a batch
    axis of length one, scalars live in ``V[0]`` etc."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    return field.derivs(t, x)


# ---------------------------------------------------------------------------
# builtin field families


def _trig_derivs(t, xs, u, sig, alpha, V2):
    """A_k = sig_k * sin(u.x + alpha*sin(t)), V = 0.5 x^T V2 x."""
    n, d = xs.shape
    phase = alpha * np.sin(t)
    s = xs @ u + phase
    sn, cs = np.sin(s), np.cos(s)
    A = sig[None, :] * sn[:, None]
    JA = np.einsum("k,j,n->nkj", sig, u, cs)
    HA = -np.einsum("k,i,j,n->nkij", sig, u, u, sn)
    TA = -np.einsum("k,m,i,j,n->nkmij", sig, u, u, u, cs)
    dphase = alpha * np.cos(t)
    dtA = dphase * sig[None, :] * cs[:, None]
    JdtA = -dphase * np.einsum("k,j,n->nkj", sig, u, sn)
    V = 0.5 * np.einsum("ni,ij,nj->n", xs, V2, xs)
    gV = xs @ V2.T
    HV = np.broadcast_to(V2, (n, d, d)).copy()
    return FieldDerivs(A, JA, HA, TA, dtA, JdtA, V, gV, HV)


def _linear_derivs(t, xs, MA, V2, v1, v0):
    """A = MA x, V = 0.5 x^T V2 x + v1.x + v0 (time-independent)."""
    n, d = xs.shape
    A = xs @ MA.T
    JA = np.broadcast_to(MA, (n, d, d)).copy()
    z3 = np.zeros((n, d, d, d))
    z4 = np.zeros((n, d, d, d, d))
    V = 0.5 * np.einsum("ni,ij,nj->n", xs, V2, xs) + xs @ v1 + v0
    gV = xs @ V2.T + v1[None, :]
    HV = np.broadcast_to(V2, (n, d, d)).copy()
    zero_v = np.zeros((n, d))
    zero_m = np.zeros((n, d, d))
    return FieldDerivs(A, JA, z3, z4, zero_v, zero_m, V, gV, HV)


_ROT_E = np.array([[0.0, -1.0], [1.0, 0.0]])


def _rot_derivs(t, xs):
    """A = (-x2, x1) / (1 + |x|^2), V = 0.5 |x|^2 (rotation covariant)."""
    n, d = xs.shape
    r2 = np.einsum("nj,nj->n", xs, xs)
    g = 1.0 / (1.0 + r2)
    g2, g3, g4 = g * g, g**3, g**4
    c = xs @ _ROT_E.T  # c_k = (E x)_k
    # derivatives of g
    dg = -2.0 * xs * g2[:, None]  # (n, j)
    eye = np.eye(d)
    ddg = -2.0 * np.einsum("ij,n->nij", eye, g2) + 8.0 * np.einsum(
        "ni,nj,n->nij", xs, xs, g3
    )
    dddg = 8.0 * (
        np.einsum("ij,nm,n->nmij", eye, xs, g3)
        + np.einsum("im,nj,n->nmij", eye, xs, g3)
        + np.einsum("jm,ni,n->nmij", eye, xs, g3)
    ) - 48.0 * np.einsum("ni,nj,nm,n->nmij", xs, xs, xs, g4)
    A = c * g[:, None]
    JA = np.einsum("kj,n->nkj", _ROT_E, g) + np.einsum("nk,nj->nkj", c, dg)
    HA = (
        np.einsum("ki,nj->nkij", _ROT_E, dg)
        + np.einsum("kj,ni->nkij", _ROT_E, dg)
        + np.einsum("nk,nij->nkij", c, ddg)
    )
    TA = (
        np.einsum("km,nij->nkmij", _ROT_E, ddg)
        + np.einsum("ki,nmj->nkmij", _ROT_E, ddg)
        + np.einsum("kj,nmi->nkmij", _ROT_E, ddg)
        + np.einsum("nk,nmij->nkmij", c, dddg)
    )
    V = 0.5 * r2
    gV = xs.copy()
    HV = np.broadcast_to(eye, (n, d, d)).copy()
    zero_v = np.zeros((n, d))
    zero_m = np.zeros((n, d, d))
    return FieldDerivs(A, JA, HA, TA, zero_v, zero_m, V, gV, HV)


# ---------------------------------------------------------------------------
# builtin registry

PENNING_A_SCALE = 57.125
PENNING_V_SCALE = 113.25


def _make_trig2d(alpha=0.0):
    u = np.array([1.0, 1.0])
    sig = np.array([1.0, -1.0])
    V2 = 2.0 * np.eye(2)  # V = x1^2 + x2^2
    alpha = float(alpha)
    return FieldSet(
        d=2,
        is_linear_A=False,
        is_time_dependent=(alpha != 0.0),
        name="trig2d",
        params={"alpha": alpha},
        _derivs=lambda t, xs: _trig_derivs(t, xs, u, sig, alpha, V2),
        kernel=("trig", {"u": u, "sig": sig, "alpha": alpha, "V2": V2}),
    )


def _make_sym_translation():
    u = np.array([1.0, -1.0])
    sig = np.array([1.0, 1.0])
    V2 = 2.0 * np.array([[1.0, -1.0], [-1.0, 1.0]])  # V = (x1 - x2)^2
    return FieldSet(
        d=2,
        is_linear_A=False,
        is_time_dependent=False,
        name="sym_translation",
        params={},
        _derivs=lambda t, xs: _trig_derivs(t, xs, u, sig, 0.0, V2),
        kernel=("trig", {"u": u, "sig": sig, "alpha": 0.0, "V2": V2}),
    )


def _make_sym_rotation():
    return FieldSet(
        d=2,
        is_linear_A=False,
        is_time_dependent=False,
        name="sym_rotation",
        params={},
        _derivs=_rot_derivs,
        kernel=("rot2d", {}),
    )


def _make_linear(MA, V2=None, v1=None, v0=0.0, name="linear_A", params=None):
    MA = np.asarray(MA, dtype=float)
    if MA.ndim != 2 or MA.shape[0] != MA.shape[1]:
        raise BadParams("MA must be a square matrix")
    d = MA.shape[0]
    V2 = np.zeros((d, d)) if V2 is None else np.asarray(V2, dtype=float)
    v1 = np.zeros(d) if v1 is None else np.asarray(v1, dtype=float)
    v0 = float(v0)
    if V2.shape != (d, d) or v1.shape != (d,):
        raise BadParams("V2 / v1 shapes inconsistent with MA")
    if np.linalg.norm(V2 - V2.T) > 1e-12 * max(1.0, np.linalg.norm(V2)):
        raise BadParams("V2 must be symmetric")
    return FieldSet(
        d=d,
        is_linear_A=True,
        is_time_dependent=False,
        name=name,
        params=params if params is not None else {"MA": MA, "V2": V2, "v1": v1, "v0": v0},
        _derivs=lambda t, xs: _linear_derivs(t, xs, MA, V2, v1, v0),
        kernel=("linear", {"MA": MA, "V2": V2, "v1": v1, "v0": v0}),
    )


def _make_penning():
    MA = PENNING_A_SCALE * np.array(
        [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]
    )
    # V = 113.25 (x3^2 - (x1^2 + x2^2)/2)
    V2 = PENNING_V_SCALE * np.diag([-1.0, -1.0, 2.0])
    return _make_linear(MA, V2, name="penning", params={})


def _make_harmonic(omega=1.0, d=1):
    omega = float(omega)
    d = int(d)
    if d < 1:
        raise BadParams("harmonic: d must be >= 1")
    return _make_linear(
        np.zeros((d, d)),
        omega**2 * np.eye(d),
        name="harmonic",
        params={"omega": omega, "d": d},
    )


_BUILTINS = {
    "trig2d": (_make_trig2d, {"alpha"}),
    "penning": (_make_penning, set()),
    "sym_translation": (_make_sym_translation, set()),
    "sym_rotation": (_make_sym_rotation, set()),
    "harmonic": (_make_harmonic, {"omega", "d"}),
    "linear_A": (_make_linear, {"MA", "V2", "v1", "v0"}),
}

#: Gauss-Hermite nodes per axis used for each experiment family.
DEFAULT_QUAD_N = {
    "trig2d": 7,
    "penning": 5,
    "sym_translation": 11,
    "sym_rotation": 11,
    "harmonic": 5,
    "linear_A": 5,
}


def builtin_ids() -> list[str]:
    return sorted(_BUILTINS)


def builtin_param_names(builtin_id: str) -> set[str]:
    if builtin_id not in _BUILTINS:
        raise UnknownBuiltin(f"unknown builtin field {builtin_id!r}")
    return set(_BUILTINS[builtin_id][1])


def make_builtin(builtin_id: str, **params) -> FieldSet:
    """Construct a builtin field by id; see :func:`builtin_ids`."""
    if builtin_id not in _BUILTINS:
        raise UnknownBuiltin(f"unknown builtin field {builtin_id!r}")
    maker, allowed = _BUILTINS[builtin_id]
    unknown = set(params) - allowed
    if unknown:
        raise BadParams(f"{builtin_id}: unexpected parameters {sorted(unknown)}")
    try:
        return maker(**params)
    except TypeError as exc:
        raise BadParams(f"{builtin_id}: {exc}") from None
