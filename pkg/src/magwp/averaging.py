"""Gauss-Hermite averaging of field derivatives and the averaged potentials.

Every Gaussian expectation needed by the dynamics involves x-only functions,
so quadrature runs over the position marginal only: N^d tensor nodes
x_i = q + chol(Sigma11) xi_i with Sigma11 the position covariance block.

Averages are quadratures of analytic field derivatives (the continuous
derivative identities applied first, then quadratured), never derivatives of
the quadrature sum.  This preserves the exact block structure

    dq/dt block:  Q' = -<J_A> Q,      dp/dt block:  P' = S Q + <J_A>^T P

with S symmetric, which makes the quadratic invariant family an exact first
integral of the implemented equations regardless of quadrature error.

The weighted sums are computed either by a compiled kernel (Cython extension
``magwp._fastbundle``) or by the pure-numpy fallback; the implementation is
selected at import time and can be forced with MAGWP_PURE_PYTHON=1.
"""

from __future__ import annotations

import os
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from .errors import NotPositiveDefinite
from .fields import FieldSet
from .packets import CanonicalState, vec

try:  # compiled quadrature core; falls back to numpy when unavailable
    from . import _fastbundle as _ext
except ImportError:  # pragma: no cover - depends on build environment
    _ext = None

USE_EXT = _ext is not None and os.environ.get("MAGWP_PURE_PYTHON", "") != "1"


def backend() -> str:
    """Name of the quadrature backend selected at import time."""
    return "compiled" if USE_EXT else "numpy"


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """1-d Gauss-Hermite rule in the probabilists' convention.

    Weight function (2 pi)^{-1/2} exp(-x^2/2); weights are positive and sum
    to one; exact for polynomials up to degree 2N - 1.
    """

    n_nodes: int
    nodes: np.ndarray
    weights: np.ndarray


def hermite_rule(N: int) -> QuadratureRule:
    """Gauss-Hermite nodes/weights for the standard Gaussian weight."""
    if N < 1:
        raise ValueError("N must be >= 1")
    x, w = hermegauss(N)
    w = w / np.sqrt(2.0 * np.pi)
    x.flags.writeable = False
    w.flags.writeable = False
    return QuadratureRule(n_nodes=N, nodes=x, weights=w)


_GRID_CACHE: dict = {}


def _tensor_grid(rule: QuadratureRule, d: int):
    """Tensorized nodes (N^d, d) and product weights (N^d,), memoized."""
    key = (id(rule), d)
    hit = _GRID_CACHE.get(key)
    if hit is not None and hit[0] is rule:
        return hit[1], hit[2]
    axes = np.meshgrid(*([rule.nodes] * d), indexing="ij")
    xi = np.ascontiguousarray(np.stack(axes, axis=-1).reshape(-1, d))
    ws = np.ones(len(xi))
    waxes = np.meshgrid(*([rule.weights] * d), indexing="ij")
    for wa in waxes:
        ws = ws * wa.reshape(-1)
    xi.flags.writeable = False
    ws.flags.writeable = False
    if len(_GRID_CACHE) > 32:
        _GRID_CACHE.clear()
    _GRID_CACHE[key] = (rule, xi, ws)
    return xi, ws


def sigma11(state) -> np.ndarray:
    """Position covariance block (eps/2)(ReQ ReQ^T + ImQ ImQ^T)."""
    Rq, Iq = state.Rq, state.Iq
    S = Rq @ Rq.T + Iq @ Iq.T
    return 0.5 * (S + S.T)


def position_nodes(state, rule: QuadratureRule):
    """Quadrature nodes x_i = q + chol(Sigma11) xi_i and product weights."""
    S11 = sigma11(state)
    try:
        L = np.linalg.cholesky(S11)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(
            "position covariance block Sigma11 is not positive definite"
        ) from None
    xi, ws = _tensor_grid(rule, state.d)
    xs = state.q[None, :] + xi @ L.T
    return xs, ws


@dataclass(frozen=True)
class AveragedBundle:
    """Gaussian averages of field derivatives at one (t, qB).

    W denotes V + |A|^2 / 2; H and G3 stack the averaged Hessians and third
    derivatives of the components of A.
    """

    a0: np.ndarray  # <A>                    (d,)
    G1: np.ndarray  # <J_A>                  (d, d)
    H: np.ndarray  # <grad^2 A_k>            (d, d, d)
    G3: np.ndarray  # <grad^3 A_k>           (d, d, d, d)
    w0: float  # <W>
    gW: np.ndarray  # <grad W>               (d,)
    HW: np.ndarray  # <grad^2 W>             (d, d)
    dtA0: np.ndarray  # <dA/dt>              (d,)
    GdtA: np.ndarray  # <J_{dA/dt}>          (d, d)
    vbar0: float  # <V>


def _bundle_numpy(field: FieldSet, t: float, xs, ws) -> AveragedBundle:
    f = field.derivs(t, xs)
    a0 = ws @ f.A
    G1 = np.einsum("n,nkj->kj", ws, f.JA)
    H = np.einsum("n,nkij->kij", ws, f.HA)
    G3 = np.einsum("n,nkmij->kmij", ws, f.TA)
    W = f.V + 0.5 * np.einsum("nk,nk->n", f.A, f.A)
    gWp = f.gV + np.einsum("nkj,nk->nj", f.JA, f.A)
    HWp = (
        f.HV
        + np.einsum("nki,nkj->nij", f.JA, f.JA)
        + np.einsum("nk,nkij->nij", f.A, f.HA)
    )
    w0 = float(ws @ W)
    gW = np.einsum("n,nj->j", ws, gWp)
    HW = np.einsum("n,nij->ij", ws, HWp)
    vbar0 = float(ws @ f.V)
    if field.is_time_dependent:
        dtA0 = ws @ f.dtA
        GdtA = np.einsum("n,nkj->kj", ws, f.JdtA)
    else:
        dtA0 = np.zeros(field.d)
        GdtA = np.zeros((field.d, field.d))
    HW = 0.5 * (HW + HW.T)
    return AveragedBundle(a0, G1, H, G3, w0, gW, HW, dtA0, GdtA, vbar0)


def _bundle_ext(field: FieldSet, t: float, xs, ws) -> AveragedBundle:
    kind, par = field.kernel
    if kind == "trig":
        out = _ext.trig_bundle(
            xs, ws, par["u"], par["sig"], par["alpha"], float(t), par["V2"]
        )
    elif kind == "linear":
        out = _ext.linear_bundle(xs, ws, par["MA"], par["V2"], par["v1"], par["v0"])
    elif kind == "rot2d":
        out = _ext.rot2d_bundle(xs, ws)
    else:  # unknown kernel id: fall back
        return _bundle_numpy(field, t, xs, ws)
    return AveragedBundle(*out)


_CACHE: OrderedDict = OrderedDict()
_CACHE_MAX = 64


def clear_bundle_cache() -> None:
    _CACHE.clear()


def avg_bundle(field: FieldSet, t: float, state, rule: QuadratureRule) -> AveragedBundle:
    """Averaged derivative bundle of ``field`` at the state's (t, qB).

    Results are memoized on (field, rule, t, qB); repeated evaluations at
    the same phase-space position (for example by consecutive splitting
    substeps that do not move qB) are free.
    """
    key_t = float(t) if field.is_time_dependent else 0.0
    key = (id(field), id(rule), key_t, state.qB.tobytes())
    hit = _CACHE.get(key)
    if hit is not None and hit[0] is field and hit[1] is rule:
        _CACHE.move_to_end(key)
        return hit[2]
    xs, ws = position_nodes(state, rule)
    if USE_EXT and field.kernel is not None:
        bundle = _bundle_ext(field, t, np.ascontiguousarray(xs), ws)
    else:
        bundle = _bundle_numpy(field, t, xs, ws)
    _CACHE[key] = (field, rule, bundle)
    if len(_CACHE) > _CACHE_MAX:
        _CACHE.popitem(last=False)
    return bundle


# ---------------------------------------------------------------------------
# assembly of the averaged potentials in canonical coordinates


def assemble_AB(state, bundle: AveragedBundle) -> np.ndarray:
    """Averaged vector potential AB = (<A>; vec(<J_A> sRe Q); vec(<J_A> sIm Q))."""
    return np.concatenate(
        [bundle.a0, vec(bundle.G1 @ state.Rq), vec(bundle.G1 @ state.Iq)]
    )


def assemble_dtAB(state, bundle: AveragedBundle) -> np.ndarray:
    """Time derivative of AB, assembled like AB from <dA/dt> averages."""
    return np.concatenate(
        [bundle.dtA0, vec(bundle.GdtA @ state.Rq), vec(bundle.GdtA @ state.Iq)]
    )


def apply_JABT(state, bundle: AveragedBundle, w: np.ndarray) -> np.ndarray:
    """Action of J_AB(t, qB)^T on a vector w, computed blockwise.

    The coupling matrix Sigma21 pairs the width blocks of the argument w
    with the state's q-blocks, which makes the map exactly linear in w.
    """
    d = state.d
    Rq, Iq = state.Rq, state.Iq
    wp = w[: d]
    Wr = w[d : d + d * d].reshape((d, d), order="F")
    Wi = w[d + d * d :].reshape((d, d), order="F")
    Sig21 = Wr @ Rq.T + Wi @ Iq.T
    s = np.einsum("km,kml->l", Sig21, bundle.H)
    Smat = np.einsum("k,kij->ij", wp, bundle.H) + np.einsum(
        "km,kmij->ij", Sig21, bundle.G3
    )
    out0 = bundle.G1.T @ wp + s
    out1 = Smat @ Rq + bundle.G1.T @ Wr
    out2 = Smat @ Iq + bundle.G1.T @ Wi
    return np.concatenate([out0, vec(out1), vec(out2)])


def assemble_JAB(state, bundle: AveragedBundle) -> np.ndarray:
    """The D x D Jacobian J_AB, materialized blockwise.

    Consistent with :func:`apply_JABT`: ``assemble_JAB(...).T @ w`` equals
    ``apply_JABT(..., w)``.
    """
    d = state.d
    D = state.D
    Rq, Iq = state.Rq, state.Iq
    G1, H, G3 = bundle.G1, bundle.H, bundle.G3
    JT = np.zeros((D, D))
    dd = d * d
    if not H.any() and not G3.any():  # linear A: blockdiag(G1, Id x G1, Id x G1)
        JT[:d, :d] = G1.T
        for a in range(2 * d):
            JT[d + a * d : d + (a + 1) * d, d + a * d : d + (a + 1) * d] = G1.T
        return JT.T
    # position column block: S(w)|_{H} contributions and G1^T
    JT[:d, :d] = G1.T
    # (H[k] Rq) enters both the position row of width columns and the
    # width rows of position columns.
    HR = np.einsum("kim,mj->kij", H, Rq)  # (k, i, a) -> (H[k] Rq)_{ia}
    HI = np.einsum("kim,mj->kij", H, Iq)
    # d/d(width q-block) of the position block: T01[l, (a d + k)] = (H[k] Rq)_{l a}
    JT[:d, d : d + dd] = HR.transpose(1, 0, 2).reshape(d, dd, order="F")
    JT[:d, d + dd :] = HI.transpose(1, 0, 2).reshape(d, dd, order="F")
    # width rows, position columns: T10[(j d + i), k] = (H[k] Rq)_{i j}
    JT[d : d + dd, :d] = HR.transpose(1, 2, 0).reshape(dd, d, order="F")
    JT[d + dd :, :d] = HI.transpose(1, 2, 0).reshape(dd, d, order="F")
    # width-width blocks: third-derivative coupling plus Id (x) G1^T
    G3RR = np.einsum("ma,kmin,nj->ijka", Rq, G3, Rq)
    G3IR = np.einsum("ma,kmin,nj->ijka", Iq, G3, Rq)
    G3RI = np.einsum("ma,kmin,nj->ijka", Rq, G3, Iq)
    G3II = np.einsum("ma,kmin,nj->ijka", Iq, G3, Iq)
    kG = np.zeros((dd, dd))
    G1T = G1.T
    for a in range(d):  # Id (x) G1^T without np.kron overhead
        kG[a * d : (a + 1) * d, a * d : (a + 1) * d] = G1T
    JT[d : d + dd, d : d + dd] = G3RR.reshape(dd, dd, order="F") + kG
    JT[d : d + dd, d + dd :] = G3IR.reshape(dd, dd, order="F")
    JT[d + dd :, d : d + dd] = G3RI.reshape(dd, dd, order="F")
    JT[d + dd :, d + dd :] = G3II.reshape(dd, dd, order="F") + kG
    return JT.T


def grad_VB(state, bundle: AveragedBundle) -> np.ndarray:
    """Gradient of VB = <V + |A|^2/2> with respect to qB."""
    return np.concatenate(
        [bundle.gW, vec(bundle.HW @ state.Rq), vec(bundle.HW @ state.Iq)]
    )


def boris_fields(state, bundle: AveragedBundle):
    """Magnetic and electric fields (BB, EB) of the charged-particle form.

    BB = J_AB - J_AB^T (exactly skew by construction) and
    EB = -grad VB + J_AB^T AB - dAB/dt.
    """
    JAB = assemble_JAB(state, bundle)
    BB = JAB - JAB.T
    AB = assemble_AB(state, bundle)
    EB = -grad_VB(state, bundle) + apply_JABT(state, bundle, AB)
    if bundle.dtA0.any() or bundle.GdtA.any():
        EB = EB - assemble_dtAB(state, bundle)
    return BB, EB


def energy(
    field: FieldSet,
    t: float,
    state: CanonicalState,
    rule: QuadratureRule,
    bundle: AveragedBundle | None = None,
) -> float:
    """Averaged Hamiltonian hB = pB.pB/2 - pB.AB + VB at (t, state)."""
    if bundle is None:
        bundle = avg_bundle(field, t, state, rule)
    AB = assemble_AB(state, bundle)
    pB = state.pB
    return float(0.5 * pB @ pB - pB @ AB + bundle.w0)


def averaged_potential(
    field: FieldSet, t: float, state, rule: QuadratureRule
) -> float:
    """VB(t, qB) = <V + |A|^2/2>."""
    return avg_bundle(field, t, state, rule).w0
