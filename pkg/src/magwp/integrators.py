"""One-step maps: symplectic splitting with a partitioned Runge-Kutta
magnetic substep, Boris-type integrators, and phase integration.

The averaged Hamiltonian splits as hB = |pB|^2/2 + VB(qB) - AB(qB).pB.
Kinetic and potential parts integrate exactly; the magnetic part is handled
by an explicit partitioned Runge-Kutta pair (L, b), (Lhat, b) whose momentum
update is the inverse of Id + rho(tau M1, ..., tau Ms), a polynomial over
increasing index chains.  All maps are pure: state in, state out.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .averaging import (
    QuadratureRule,
    assemble_AB,
    assemble_JAB,
    avg_bundle,
    averaged_potential,
    boris_fields,
    grad_VB,
)
from .errors import StepTooLarge, TimeDependentUnsupported, ZeroWeight
from .fields import FieldSet
from .packets import CanonicalState, KineticState


def _chain_coefficients(L: np.ndarray, b: np.ndarray):
    """All increasing index chains j1 < ... < jk with coefficient
    b_{jk} * prod_l L_{j_{l+1}, j_l}; zero-coefficient chains are dropped."""
    s = len(b)
    chains = []
    for k in range(1, s + 1):
        for chain in combinations(range(s), k):
            coeff = b[chain[-1]]
            for l in range(k - 1):
                coeff *= L[chain[l + 1], chain[l]]
                if coeff == 0.0:
                    break
            if coeff != 0.0:
                chains.append((chain, float(coeff)))
    return tuple(chains)


@dataclass(frozen=True, eq=False)
class ButcherPair:
    """Explicit tableau (L, b) and the partner tableau Lhat of the magnetic
    partitioned Runge-Kutta substep,

        Lhat = 1 b^T - diag(b)^{-1} L^T diag(b).

    The pair satisfies the quadratic-invariant compatibility identity
    b_i Lhat_ij + b_j L_ji = b_i b_j.
    """

    L: np.ndarray
    b: np.ndarray
    Lhat: np.ndarray

    def __post_init__(self):
        L = np.asarray(self.L, dtype=float)
        b = np.asarray(self.b, dtype=float)
        Lhat = np.asarray(self.Lhat, dtype=float)
        for arr in (L, b, Lhat):
            arr.flags.writeable = False
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "Lhat", Lhat)
        if np.any(b == 0.0):
            raise ZeroWeight("all weights b_i must be nonzero")
        if np.any(np.triu(L) != 0.0):
            raise ValueError("L must be strictly lower triangular")
        ref = np.outer(np.ones(self.s), b) - np.diag(1.0 / b) @ L.T @ np.diag(b)
        if not np.allclose(Lhat, ref, rtol=0, atol=1e-13):
            raise ValueError("Lhat does not match the partner-tableau formula")
        compat = b[:, None] * Lhat + L.T * b[None, :] - np.outer(b, b)
        if np.max(np.abs(compat)) > 1e-14:
            raise ValueError("partner tableau violates the compatibility identity")
        object.__setattr__(self, "_chains", _chain_coefficients(L, b))
        rho_abs = np.zeros(self.s + 1)
        for chain, coeff in self._chains:
            rho_abs[len(chain)] += abs(coeff)
        rho_abs.flags.writeable = False
        object.__setattr__(self, "_rho_abs", rho_abs)

    @property
    def s(self) -> int:
        return len(self.b)

    def rho_bound(self, x: float) -> float:
        """Upper bound for ||rho||_2 when all ||tau M_i||_2 <= x."""
        return float(np.polyval(self._rho_abs[::-1], x))

    @property
    def kappa_rho(self) -> float:
        """Largest x with rho_bound(x) < 1 (well-posedness threshold)."""
        lo, hi = 0.0, 1.0
        while self.rho_bound(hi) < 1.0:
            hi *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.rho_bound(mid) < 1.0:
                lo = mid
            else:
                hi = mid
        return lo


def make_partner_tableau(L: np.ndarray, b: np.ndarray) -> ButcherPair:
    """Partner tableau for an explicit method (L, b) with nonzero weights."""
    L = np.asarray(L, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(b == 0.0):
        raise ZeroWeight("all weights b_i must be nonzero")
    Lhat = np.outer(np.ones(len(b)), b) - np.diag(1.0 / b) @ L.T @ np.diag(b)
    return ButcherPair(L=L, b=b, Lhat=Lhat)


#: Heun's rule; the resulting splitting integrator has order two.
HEUN = make_partner_tableau(np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([0.5, 0.5]))

#: Classic Runge-Kutta of order four.
RK4 = make_partner_tableau(
    np.array(
        [
            [0.0, 0.0, 0.0, 0.0],
            [0.5, 0.0, 0.0, 0.0],
            [0.0, 0.5, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ]
    ),
    np.array([1.0, 2.0, 2.0, 1.0]) / 6.0,
)

#: Triple-jump coefficients turning a symmetric order-2 step into order 4.
TRIPLE_JUMP_GAMMA = (
    1.0 / (2.0 - 2.0 ** (1.0 / 3.0)),
    1.0 - 2.0 / (2.0 - 2.0 ** (1.0 / 3.0)),
    1.0 / (2.0 - 2.0 ** (1.0 / 3.0)),
)


def rho_matrix(Ms, tau: float, L: np.ndarray, b: np.ndarray) -> np.ndarray:
    """The polynomial rho(tau M_1, ..., tau M_s) of the momentum one-step map.

    rho = sum_k (-tau)^k sum_{j1<...<jk} M_{j1} ... M_{jk} b_{jk}
          prod_l L_{j_{l+1} j_l}, products in increasing index order.
    """
    L = np.asarray(L, dtype=float)
    b = np.asarray(b, dtype=float)
    D = Ms[0].shape[0]
    rho = np.zeros((D, D))
    for chain, coeff in _chain_coefficients(L, b):
        prod = Ms[chain[0]]
        for j in chain[1:]:
            prod = prod @ Ms[j]
        rho += (-tau) ** len(chain) * coeff * prod
    return rho


def momentum_map(Ms, tau: float, tableau: ButcherPair, pB: np.ndarray) -> np.ndarray:
    """Momentum update (Id + rho)^{-1} pB with a well-posedness guard.

    Raises StepTooLarge when the coefficient bound for ||rho||_2 reaches one,
    i.e. when |tau| max_i ||M_i||_2 exceeds the tableau's kappa_rho.
    """
    # Cheap Frobenius upper bound first; the exact spectral norm only decides
    # borderline cases, so ordinary steps never pay for an SVD.
    C_hi = max(float(np.linalg.norm(M)) for M in Ms)
    if tableau.rho_bound(abs(tau) * C_hi) >= 1.0:
        C = max(np.linalg.norm(M, 2) for M in Ms)
        if tableau.rho_bound(abs(tau) * C) >= 1.0:
            raise StepTooLarge(
                f"step size violates the magnetic substep bound: "
                f"|tau| * max||M||_2 = {abs(tau) * C:.4f} exceeds "
                f"kappa_rho = {tableau.kappa_rho:.4f}"
            )
    rho = rho_matrix(Ms, tau, tableau.L, tableau.b)
    try:
        return np.linalg.solve(np.eye(len(pB)) + rho, pB)
    except np.linalg.LinAlgError:
        raise StepTooLarge("Id + rho is singular") from None


def kinetic_substep(state: CanonicalState, tau: float) -> CanonicalState:
    """Exact flow of |pB|^2/2: drift qB by tau pB."""
    return state.with_(qB=state.qB + tau * state.pB)


def potential_substep(
    state: CanonicalState,
    tau: float,
    t_eval: float,
    field: FieldSet,
    rule: QuadratureRule,
    bundle=None,
) -> CanonicalState:
    """Exact flow of VB(qB): kick pB by -tau grad VB."""
    if bundle is None:
        bundle = avg_bundle(field, t_eval, state, rule)
    return state.with_(pB=state.pB - tau * grad_VB(state, bundle))


def magnetic_substep_prk(
    state: CanonicalState,
    tau: float,
    t_eval: float,
    field: FieldSet,
    rule: QuadratureRule,
    tableau: ButcherPair = HEUN,
    first_bundle=None,
) -> CanonicalState:
    """Explicit symplectic partitioned Runge-Kutta step for the magnetic part.

    Position stages q^(i) = -AB at explicitly computed stage positions; the
    momentum map is (Id + rho)^{-1} with stage matrices M_i = J_AB^T at the
    same positions.
    """
    L, b = tableau.L, tableau.b
    s = tableau.s
    qstages = []
    Ms = []
    for i in range(s):
        qpos = state.qB
        for j in range(i):
            if L[i, j] != 0.0:
                qpos = qpos + (tau * L[i, j]) * qstages[j]
        st_i = state.with_(qB=qpos)
        if i == 0 and first_bundle is not None:
            bundle_i = first_bundle
        else:
            bundle_i = avg_bundle(field, t_eval, st_i, rule)
        qstages.append(-assemble_AB(st_i, bundle_i))
        Ms.append(assemble_JAB(st_i, bundle_i).T)
    qB_new = state.qB + tau * sum(b[i] * qstages[i] for i in range(s))
    pB_new = momentum_map(Ms, tau, tableau, state.pB)
    return state.with_(qB=qB_new, pB=pB_new)


def phase_step(
    S: float,
    before: CanonicalState,
    after: CanonicalState,
    tau: float,
    field: FieldSet,
    rule: QuadratureRule,
) -> float:
    """Trapezoid update of the phase.

    The combination S + (eps/4) Re tr(P Q*) evolves with the integrand
    pB . dqB/dt - hB = |pB|^2/2 - VB(t, qB); the correction term equals half
    the inner product of the width blocks of qB and pB.
    """
    d = before.d

    def g(st: CanonicalState) -> float:
        return float(0.5 * st.pB @ st.pB - averaged_potential(field, st.t, st, rule))

    def corr(st: CanonicalState) -> float:
        return float(0.5 * (st.qB[d:] @ st.pB[d:]))

    return S + corr(before) - corr(after) + 0.5 * tau * (g(before) + g(after))


def strang_step(
    state: CanonicalState,
    tau: float,
    t_n: float,
    field: FieldSet,
    rule: QuadratureRule,
    tableau: ButcherPair = HEUN,
) -> CanonicalState:
    """Symmetric splitting step kin - pot - magnetic PRK - pot - kin.

    For time-dependent fields all evaluations use the midpoint time
    t_n + tau/2; the phase is advanced by the trapezoid rule on the step
    endpoints.
    """
    t_eval = t_n + 0.5 * tau if field.is_time_dependent else t_n
    s1 = kinetic_substep(state, 0.5 * tau)
    b1 = avg_bundle(field, t_eval, s1, rule)
    s2 = potential_substep(s1, 0.5 * tau, t_eval, field, rule, bundle=b1)
    s3 = magnetic_substep_prk(s2, tau, t_eval, field, rule, tableau, first_bundle=b1)
    b3 = avg_bundle(field, t_eval, s3, rule)
    s4 = potential_substep(s3, 0.5 * tau, t_eval, field, rule, bundle=b3)
    s5 = kinetic_substep(s4, 0.5 * tau)
    out = s5.with_(t=t_n + tau)
    S_new = phase_step(state.S, state.with_(t=t_n), out, tau, field, rule)
    return out.with_(S=S_new)


def order4_step(
    state: CanonicalState,
    tau: float,
    t_n: float,
    field: FieldSet,
    rule: QuadratureRule,
    tableau: ButcherPair = RK4,
) -> CanonicalState:
    """Order-4 step: triple-jump composition of Strang steps whose magnetic
    substep uses an order-4 tableau pair.  Time-dependent fields would need
    higher-order time averaging and are rejected."""
    if field.is_time_dependent:
        raise TimeDependentUnsupported(
            "order-4 composition requires time-independent potentials"
        )
    st = state
    t = t_n
    for gamma in TRIPLE_JUMP_GAMMA:
        st = strang_step(st, gamma * tau, t, field, rule, tableau)
        t += gamma * tau
    return st.with_(t=t_n + tau)


# ---------------------------------------------------------------------------
# Boris-type integration in kinetic momenta


def to_kinetic(
    state: CanonicalState, field: FieldSet, rule: QuadratureRule
) -> KineticState:
    """Minimal substitution vB = pB - AB(t, qB)."""
    bundle = avg_bundle(field, state.t, state, rule)
    AB = assemble_AB(state, bundle)
    return KineticState(
        d=state.d, eps=state.eps, qB=state.qB, vB=state.pB - AB, t=state.t, S=state.S
    )


def to_canonical(
    kstate: KineticState, field: FieldSet, rule: QuadratureRule
) -> CanonicalState:
    """Inverse substitution pB = vB + AB(t, qB)."""
    bundle = avg_bundle(field, kstate.t, kstate, rule)
    AB = assemble_AB(kstate, bundle)
    return CanonicalState(
        d=kstate.d,
        eps=kstate.eps,
        qB=kstate.qB,
        pB=kstate.vB + AB,
        t=kstate.t,
        S=kstate.S,
    )


def cayley_apply(X: np.ndarray, v: np.ndarray) -> np.ndarray:
    """R(X) v with the Cayley transform R(X) = (Id + X)^{-1}(Id - X)."""
    n = X.shape[0]
    return np.linalg.solve(np.eye(n) + X, v - X @ v)


def boris_init(
    state: CanonicalState, tau: float, field: FieldSet, rule: QuadratureRule
) -> KineticState:
    """Staggered initialization: half an Euler step of the kinetic momentum.

    Returns the state (qB_0, vB^s) with vB^s = vB_0 - (tau/2) BB vB_0
    + (tau/2) EB, approximating vB at t_0 + tau/2.
    """
    bundle = avg_bundle(field, state.t, state, rule)
    AB = assemble_AB(state, bundle)
    vB0 = state.pB - AB
    BB, EB = boris_fields(state, bundle)
    vs = vB0 - 0.5 * tau * (BB @ vB0) + 0.5 * tau * EB
    return KineticState(
        d=state.d, eps=state.eps, qB=state.qB, vB=vs, t=state.t, S=state.S
    )


def boris_step(
    kstate: KineticState,
    tau: float,
    t_n: float,
    field: FieldSet,
    rule: QuadratureRule,
) -> KineticState:
    """One staggered Boris step.

    w = R((tau/2) BB) vB^s + tau (Id + (tau/2) BB)^{-1} EB with fields at
    (t_n, qB); the new position is qB + tau w.  Skewness of BB guarantees
    invertibility.  The phase is not integrated on the staggered grid.
    """
    bundle = avg_bundle(field, t_n, kstate, rule)
    BB, EB = boris_fields(kstate, bundle)
    X = 0.5 * tau * BB
    rhs = kstate.vB - X @ kstate.vB + tau * EB
    w = np.linalg.solve(np.eye(kstate.D) + X, rhs)
    return kstate.with_(qB=kstate.qB + tau * w, vB=w, t=t_n + tau)


def boris_sync_velocity(
    kstate: KineticState,
    tau: float,
    t_n: float,
    field: FieldSet,
    rule: QuadratureRule,
) -> np.ndarray:
    """Synchronized velocity (vB_n^s + vB_{n+1}^s)/2 of the staggered scheme."""
    nxt = boris_step(kstate, tau, t_n, field, rule)
    return 0.5 * (kstate.vB + nxt.vB)


def boris_splitting_step(
    kstate: KineticState,
    tau: float,
    t_n: float,
    field: FieldSet,
    rule: QuadratureRule,
) -> KineticState:
    """Symmetric Boris splitting kin - pot - Cayley rotation - pot - kin.

    Agrees with the staggered Boris map up to reordering of the individual
    updates and the initial half step.  The phase is advanced by the same
    trapezoid rule as the symplectic schemes, on canonical conversions of
    the step endpoints.
    """
    before = to_canonical(kstate.with_(t=t_n), field, rule)
    q1 = kstate.qB + 0.5 * tau * kstate.vB
    mid = kstate.with_(qB=q1)
    bundle = avg_bundle(field, t_n, mid, rule)
    BB, EB = boris_fields(mid, bundle)
    v = kstate.vB + 0.5 * tau * EB
    v = cayley_apply(0.5 * tau * BB, v)
    v = v + 0.5 * tau * EB
    q2 = q1 + 0.5 * tau * v
    out = kstate.with_(qB=q2, vB=v, t=t_n + tau)
    after = to_canonical(out, field, rule)
    S_new = phase_step(kstate.S, before, after, tau, field, rule)
    return out.with_(S=S_new)
