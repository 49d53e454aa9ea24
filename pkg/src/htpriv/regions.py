"""Single-letter trade-off evaluation and optimization.

Covers the achievable-region evaluators for the general test (the kappa*
exponent with its two constrained KL minimizations, plus equivocation and
distortion privacy levels), the testing-against-conditional-independence
region with its auxiliary-channel frontier search, the zero-rate region, and
the binary closed form.

All optimizers return their argmin coupling so callers can re-verify
feasibility and the objective independently.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .probcore import (
    Channel,
    JointPmf,
    Pmf,
    binary_entropy,
    conditional_entropy,
    conditional_mutual_information,
    mutual_information,
    pmf_close,
    star,
)

__all__ = [
    "HypothesisPair",
    "TradeoffPoint",
    "TaciPoint",
    "ZeroRatePrivacy",
    "CouplingProblem",
    "CouplingSolution",
    "InfeasibleConstraintsError",
    "FrontierConfig",
    "solve_coupling",
    "exponent_e1",
    "exponent_e1_solution",
    "exponent_e2",
    "exponent_e2_solution",
    "kappa_star",
    "theorem1_point",
    "theorem2_point",
    "taci_point",
    "taci_frontier",
    "example1_closed_form",
    "zero_rate_exponent",
    "zero_rate_exponent_solution",
    "zero_rate_privacy",
    "bayes_estimator",
    "attach_channel",
]


class InfeasibleConstraintsError(ValueError):
    """The marginal constraints are mutually inconsistent."""


# ---------------------------------------------------------------------------
# problem containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HypothesisPair:
    """Null/alternate joint laws over (S, U, V...) plus a distortion table.

    Both joints must share axes, which must include "S" and "U"; every other
    axis is treated as part of the detector observation V (so a pair over
    (S, U, Y, Z) models conditional-independence testing with V = (Y, Z)).
    """

    p: JointPmf
    q: JointPmf
    distortion: np.ndarray | None = None
    d_max: float | None = None

    def __post_init__(self):
        if self.p.axes != self.q.axes:
            raise ValueError(f"axes differ: {self.p.axes} vs {self.q.axes}")
        names = self.p.names
        if "S" not in names or "U" not in names:
            raise ValueError(f'axes must include "S" and "U"; got {names}')
        if self.distortion is not None:
            d = np.asarray(self.distortion, dtype=float)
            if d.ndim != 2 or d.shape[0] != self.p.axis_size("S"):
                raise ValueError(f"distortion table shape {d.shape} does not cover S")
            dm = self.d_max if self.d_max is not None else float(d.max())
            if d.min() < 0 or d.max() > dm + 1e-12:
                raise ValueError("distortion entries must lie in [0, d_max]")
            d.flags.writeable = False
            object.__setattr__(self, "distortion", d)
            object.__setattr__(self, "d_max", dm)

    @property
    def v_axes(self) -> tuple[str, ...]:
        return tuple(n for n in self.p.names if n not in ("S", "U"))

    def u_size(self) -> int:
        return self.p.axis_size("U")

    def law(self, hypothesis: int) -> JointPmf:
        return self.p if hypothesis == 0 else self.q


def attach_channel(joint: JointPmf, channel: Channel, from_axis: str = "U",
                   new_axis: str = "W") -> JointPmf:
    """Adjoin ``new_axis`` to ``joint`` through a memoryless channel from ``from_axis``."""
    i = joint.axis_index(from_axis)
    if channel.input_size != joint.axes[i][1]:
        raise ValueError(
            f"channel input size {channel.input_size} != |{from_axis}| = {joint.axes[i][1]}"
        )
    probs = joint.probs
    shape = [1] * probs.ndim + [channel.output_size]
    shape[i] = channel.input_size
    ext = probs[..., None] * channel.rows.reshape(shape)
    axes = joint.axes + ((new_axis, channel.output_size),)
    return JointPmf(axes, ext)


@dataclass(frozen=True)
class TradeoffPoint:
    """One achievable (rate, exponent, privacy0, privacy1) tuple, in nats."""

    rate: float
    exponent: float
    privacy0: float
    privacy1: float
    privacy_kind: str  # "equivocation" | "distortion"
    feasible: bool = True
    channel: Channel | None = None
    channel_id: str = ""

    def __post_init__(self):
        if self.privacy_kind not in ("equivocation", "distortion"):
            raise ValueError(f"unknown privacy_kind {self.privacy_kind!r}")


@dataclass(frozen=True)
class TaciPoint:
    """Exact region coordinates for one auxiliary channel (nats)."""

    rate_needed: float
    exponent: float
    equivocation0: float


@dataclass(frozen=True)
class ZeroRatePrivacy:
    delta0_max: float | None
    delta1_max: float | None
    lambda0_max: float
    lambda1_max: float


# ---------------------------------------------------------------------------
# constrained KL minimization on the probability simplex
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CouplingProblem:
    """min KL(x || reference) over joint pmfs x subject to fixed marginals.

    ``marginal_constraints`` maps axis tuples (positions into the reference
    tensor) to target marginal tensors.  ``entropy_floor`` optionally demands
    H(target_axes | given_axes) >= floor, a convex constraint since
    conditional entropy is concave in the joint law.
    """

    reference: np.ndarray
    marginal_constraints: tuple[tuple[tuple[int, ...], np.ndarray], ...]
    entropy_floor: tuple[tuple[int, ...], tuple[int, ...], float] | None = None


@dataclass(frozen=True)
class CouplingSolution:
    objective: float                 # KL value in nats (may be +inf)
    coupling: np.ndarray | None      # argmin joint law (None iff objective inf)
    residual: float                  # worst marginal-constraint violation
    entropy_slack: float             # H - floor at the solution (0.0 if unconstrained)
    multiplier: float                # entropy-constraint multiplier (0 if inactive)


def _marginal(x: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    drop = tuple(i for i in range(x.ndim) if i not in axes)
    m = x.sum(axis=drop)
    kept = tuple(sorted(axes))
    perm = tuple(kept.index(i) for i in axes)
    return m.transpose(perm) if perm != tuple(range(len(axes))) else m


def _kl(p: np.ndarray, q: np.ndarray) -> float:
    mask = p > 0
    if np.any(q[mask] <= 0):
        return math.inf
    pm = p[mask]
    return float(np.dot(pm.ravel(), (np.log(pm) - np.log(q[mask])).ravel()))


def _cond_entropy(x: np.ndarray, target: tuple[int, ...], given: tuple[int, ...]) -> float:
    joint = _marginal(x, tuple(sorted(target + given)))
    h = joint[joint > 0]
    hj = float(-np.dot(h, np.log(h)))
    if not given:
        return hj
    g = _marginal(x, tuple(sorted(given)))
    g = g[g > 0]
    return hj - float(-np.dot(g, np.log(g)))


def _expand(arr: np.ndarray, axes: tuple[int, ...], ndim: int, shape) -> np.ndarray:
    # broadcast a marginal tensor (indexed by `axes` in order) over the joint
    order = np.argsort(axes)
    sorted_arr = arr.transpose(order) if list(order) != list(range(len(axes))) else arr
    target_shape = [1] * ndim
    for a in sorted(axes):
        target_shape[a] = shape[a]
    return sorted_arr.reshape(target_shape)


def _ipf(base: np.ndarray, constraints, max_sweeps: int = 20000,
         tol: float = 1e-14) -> tuple[np.ndarray, float]:
    """Cyclic I-projection of ``base`` onto the given marginal constraints.

    Multiplicative per-block rescaling; the limit is the KL projection of
    ``base`` onto the intersection when it is nonempty within supp(base).
    Returns (point, worst final residual).
    """
    x = base.copy()
    nd = x.ndim
    worst = math.inf
    for sweep in range(max_sweeps):
        worst = 0.0
        for axes, tgt in constraints:
            cur = _marginal(x, axes)
            worst = max(worst, float(np.abs(cur - tgt).max()))
            scale = np.divide(tgt, cur, out=np.zeros_like(tgt), where=cur > 0)
            x *= _expand(scale, axes, nd, x.shape)
        if worst < tol:
            break
    # final residual after the last rescale
    res = max(
        float(np.abs(_marginal(x, axes) - tgt).max()) for axes, tgt in constraints
    )
    return x, res


def _check_consistency(constraints) -> None:
    for axes, tgt in constraints:
        s = float(np.asarray(tgt).sum())
        if abs(s - 1.0) > 1e-9:
            raise InfeasibleConstraintsError(f"constraint on axes {axes} sums to {s}")
        if np.asarray(tgt).min() < -1e-12:
            raise InfeasibleConstraintsError(f"constraint on axes {axes} has negative mass")
    for i in range(len(constraints)):
        for j in range(i + 1, len(constraints)):
            ai, ti = constraints[i]
            aj, tj = constraints[j]
            common = tuple(a for a in ai if a in aj)
            if not common:
                continue
            mi = _marginal_of_target(ti, ai, common)
            mj = _marginal_of_target(tj, aj, common)
            if np.abs(mi - mj).max() > 1e-9:
                raise InfeasibleConstraintsError(
                    f"constraints on axes {ai} and {aj} disagree on shared axes {common}"
                )


def _marginal_of_target(tgt: np.ndarray, axes: tuple[int, ...], keep: tuple[int, ...]):
    pos = tuple(axes.index(a) for a in keep)
    drop = tuple(i for i in range(len(axes)) if i not in pos)
    m = np.asarray(tgt).sum(axis=drop)
    kept = tuple(sorted(pos))
    perm = tuple(kept.index(p) for p in pos)
    return m.transpose(perm) if perm != tuple(range(len(pos))) else m


def _grad_neg_cond_entropy(x: np.ndarray, target, given) -> np.ndarray:
    """Gradient of -H(target|given) wrt the joint: log x(target|given), broadcast."""
    axes = tuple(sorted(target + given))
    m = _marginal(x, axes)
    if given:
        gpos = tuple(axes.index(a) for a in given)
        tpos = tuple(i for i in range(len(axes)) if i not in gpos)
        mg = m.sum(axis=tpos, keepdims=True)
    else:
        mg = np.ones(())
    with np.errstate(divide="ignore", invalid="ignore"):
        lc = np.log(m) - np.log(mg)
    lc = np.where(np.isfinite(lc), lc, 0.0)
    return _expand(lc, axes, x.ndim, x.shape)


def solve_coupling(problem: CouplingProblem, x0: np.ndarray | None = None,
                   tol_res: float = 1e-11, tol_entropy: float = 1e-9,
                   max_outer: int = 60, max_inner: int = 400) -> CouplingSolution:
    """Solve the constrained KL minimization.

    With marginal constraints only this is a cyclic I-projection of the
    reference, which converges geometrically and lands exactly on the
    constraint set.  The optional entropy floor is handled by an augmented
    hinge penalty max(0, floor - H)^2 with multiplier updates and weight
    doubling on stall; each inner step is a multiplicative (mirror) update
    with backtracking, re-projected onto the marginal constraints.

    Infeasible support (constraints force mass where the reference is zero)
    yields objective +inf; mutually inconsistent constraints raise
    :class:`InfeasibleConstraintsError`.
    """
    ref = np.asarray(problem.reference, dtype=float)
    cons = [(tuple(a), np.asarray(t, dtype=float)) for a, t in problem.marginal_constraints]
    _check_consistency(cons)

    start = ref if x0 is None else np.where(ref > 0, x0, 0.0)
    if x0 is not None:
        s = start.sum()
        if s <= 0:
            start = ref
        else:
            start = start / s
    x, res = _ipf(start, cons)
    if res > tol_res:
        # distinguish support-infeasibility from slow convergence: the
        # constraint set is nonempty (checked above on shared marginals up to
        # pairwise consistency), so a stuck residual means the support of the
        # reference cannot carry the required marginals.  Iterates stay in the
        # multiplicative family, so continuing from x is equivalent.
        x2, res2 = _ipf(x, cons, max_sweeps=200000)
        if res2 > tol_res:
            return CouplingSolution(math.inf, None, res2, 0.0, 0.0)
        x, res = x2, res2

    if problem.entropy_floor is None:
        return CouplingSolution(_kl(x, ref), x, res, 0.0, 0.0)

    target, given, floor = problem.entropy_floor
    target, given = tuple(target), tuple(given)
    h = _cond_entropy(x, target, given)
    if h >= floor - tol_entropy:
        return CouplingSolution(_kl(x, ref), x, res, h - floor, 0.0)

    sup = ref > 0
    logref = np.where(sup, np.log(np.where(sup, ref, 1.0)), -np.inf)
    lam, mu = 0.0, 4.0
    prev_viol = math.inf

    def al_value(xx: np.ndarray, lam: float, mu: float) -> float:
        phi = floor - _cond_entropy(xx, target, given)
        t_eff = max(0.0, lam + mu * phi)
        return _kl(xx, ref) + (t_eff * t_eff - lam * lam) / (2.0 * mu)

    for outer in range(max_outer):
        eta = 1.0
        fx = al_value(x, lam, mu)
        for _ in range(max_inner):
            phi = floor - _cond_entropy(x, target, given)
            t_eff = max(0.0, lam + mu * phi)
            g = t_eff * _grad_neg_cond_entropy(x, target, given)
            with np.errstate(divide="ignore"):
                logx = np.where(x > 0, np.log(np.where(x > 0, x, 1.0)), -np.inf)
            accepted = False
            while eta > 1e-13:
                beta = eta / (1.0 + eta)
                logbase = (1.0 - beta) * logx + beta * (logref - g)
                logbase = np.where(sup, logbase, -np.inf)
                finite = np.isfinite(logbase)
                if not finite.any():
                    break
                mx = logbase[finite].max()
                base = np.where(finite, np.exp(np.where(finite, logbase, 0.0) - mx), 0.0)
                xn, _ = _ipf(base, cons, max_sweeps=4000, tol=1e-13)
                fn = al_value(xn, lam, mu)
                if fn <= fx + 1e-15:
                    accepted = True
                    break
                eta *= 0.5
            if not accepted:
                break
            moved = float(np.abs(xn - x).max())
            x = xn
            if abs(fx - fn) < 1e-13 * max(1.0, abs(fn)) and moved < 1e-11:
                fx = fn
                break
            fx = fn
            eta = min(eta * 2.0, 1e8)
        phi = floor - _cond_entropy(x, target, given)
        lam = max(0.0, lam + mu * phi)
        viol = max(0.0, phi)
        if viol <= tol_entropy:
            break
        if viol > 0.5 * prev_viol:
            mu *= 2.0
        prev_viol = viol

    x, res = _ipf(x, cons, max_sweeps=4000, tol=1e-14)
    h = _cond_entropy(x, target, given)
    return CouplingSolution(_kl(x, ref), x, res, h - floor, lam)


# ---------------------------------------------------------------------------
# exponent terms of the general inner bound
# ---------------------------------------------------------------------------

def _coupling_frame(pair: HypothesisPair, w_channel: Channel):
    """Reference measure and marginals on axes (U, V..., W) for both KL programs."""
    v_axes = pair.v_axes
    order = ("U",) + v_axes
    p_uv = pair.p.marginal(order)
    q_uv = pair.q.marginal(order)
    if w_channel.input_size != pair.u_size():
        raise ValueError(
            f"auxiliary channel input size {w_channel.input_size} != |U| = {pair.u_size()}"
        )
    p_joint = attach_channel(p_uv, w_channel)   # (U, V..., W)
    ref = attach_channel(q_uv, w_channel).probs
    nv = len(v_axes)
    u_ax, w_ax = 0, 1 + nv
    v_ax = tuple(range(1, 1 + nv))
    return p_joint, ref, u_ax, v_ax, w_ax


def exponent_e1_solution(pair: HypothesisPair, w_channel: Channel) -> CouplingSolution:
    """First exponent term: min KL against the alternate law tilted through the
    channel, over joint laws matching the (U, W) and (V, W) marginals of the null."""
    p_joint, ref, u_ax, v_ax, w_ax = _coupling_frame(pair, w_channel)
    cons = (
        ((u_ax, w_ax), _marginal(p_joint.probs, (u_ax, w_ax))),
        (v_ax + (w_ax,), _marginal(p_joint.probs, v_ax + (w_ax,))),
    )
    return solve_coupling(CouplingProblem(ref, cons))


def exponent_e1(pair: HypothesisPair, w_channel: Channel) -> float:
    return exponent_e1_solution(pair, w_channel).objective


def exponent_e2_solution(rate: float, pair: HypothesisPair,
                         w_channel: Channel) -> tuple[float, CouplingSolution | None]:
    """Second exponent term (binning error): +inf unless I_P(U;W) > rate, else the
    KL minimum over the relaxed set plus the rate penalty (rate - I_P(U;W|V))."""
    if rate < 0:
        raise ValueError("rate must be >= 0")
    p_joint, ref, u_ax, v_ax, w_ax = _coupling_frame(pair, w_channel)
    names = p_joint.names
    i_uw = mutual_information(p_joint, "U", "W")
    if i_uw <= rate:
        return math.inf, None
    v_names = tuple(names[a] for a in v_ax)
    i_uw_given_v = conditional_mutual_information(p_joint, "U", "W", v_names)
    floor = conditional_entropy(p_joint, "W", v_names)
    cons = (
        ((u_ax, w_ax), _marginal(p_joint.probs, (u_ax, w_ax))),
        (v_ax, _marginal(p_joint.probs, v_ax)),
    )
    sol = solve_coupling(
        CouplingProblem(ref, cons, entropy_floor=((w_ax,), v_ax, floor))
    )
    if math.isinf(sol.objective):
        return math.inf, sol
    return sol.objective + (rate - i_uw_given_v), sol


def exponent_e2(rate: float, pair: HypothesisPair, w_channel: Channel) -> float:
    return exponent_e2_solution(rate, pair, w_channel)[0]


def kappa_star(rate: float, pair: HypothesisPair, w_channel: Channel) -> float:
    """min(E1, E2(rate)); nondecreasing in rate."""
    return min(exponent_e1(pair, w_channel), exponent_e2(rate, pair, w_channel))


# ---------------------------------------------------------------------------
# achievable points (general inner bound)
# ---------------------------------------------------------------------------

def _min_expected_distortion(joint: JointPmf, cond_axes, pair: HypothesisPair) -> float:
    """min over deterministic estimators of E d(S, phi(cond_axes)); the inner
    argmin for each conditioning cell is the Bayes estimator."""
    if pair.distortion is None:
        raise ValueError("HypothesisPair has no distortion table")
    if isinstance(cond_axes, str):
        cond_axes = (cond_axes,)
    m = joint.marginal_array(("S",) + tuple(cond_axes))
    flat = m.reshape(m.shape[0], -1)          # (|S|, cells)
    costs = pair.distortion.T @ flat          # (|S_hat|, cells)
    return float(costs.min(axis=0).sum())


def _privacy1_split(pair: HypothesisPair, q_joint: JointPmf, v_axes, kind: str) -> float:
    """Alternate-hypothesis privacy: the (W,V)-aware level when the U-marginals
    of the two hypotheses coincide, the V-only level otherwise."""
    same_u = pmf_close(pair.p.marginal_pmf("U"), pair.q.marginal_pmf("U"))
    if kind == "equivocation":
        if same_u:
            return conditional_entropy(q_joint, "S", ("W",) + tuple(v_axes))
        return conditional_entropy(q_joint, "S", tuple(v_axes))
    if same_u:
        return _min_expected_distortion(q_joint, ("W",) + tuple(v_axes), pair)
    return _min_expected_distortion(q_joint, tuple(v_axes), pair)


def _theorem_point(pair: HypothesisPair, w_channel: Channel, rate: float,
                   kind: str) -> TradeoffPoint:
    v_axes = pair.v_axes
    p_joint = attach_channel(pair.p, w_channel)
    q_joint = attach_channel(pair.q, w_channel)
    needed = conditional_mutual_information(p_joint, "W", "U", v_axes)
    feasible = rate >= needed - 1e-12
    exponent = kappa_star(rate, pair, w_channel)
    if kind == "equivocation":
        privacy0 = conditional_entropy(p_joint, "S", ("W",) + v_axes)
    else:
        privacy0 = _min_expected_distortion(p_joint, ("W",) + v_axes, pair)
    privacy1 = _privacy1_split(pair, q_joint, v_axes, kind)
    return TradeoffPoint(rate, exponent, privacy0, privacy1, kind,
                         feasible=feasible, channel=w_channel)


def theorem1_point(pair: HypothesisPair, w_channel: Channel, rate: float) -> TradeoffPoint:
    """Equivocation-privacy achievable point at the given rate (nats)."""
    return _theorem_point(pair, w_channel, rate, "equivocation")


def theorem2_point(pair: HypothesisPair, w_channel: Channel, rate: float) -> TradeoffPoint:
    """Distortion-privacy achievable point at the given rate."""
    return _theorem_point(pair, w_channel, rate, "distortion")


# ---------------------------------------------------------------------------
# testing against conditional independence
# ---------------------------------------------------------------------------

def _require_taci_axes(p_suyz: JointPmf):
    for name in ("S", "U", "Y", "Z"):
        p_suyz.axis_index(name)


def taci_point(p_suyz: JointPmf, w_channel: Channel) -> TaciPoint:
    """Region coordinates for one auxiliary channel: required rate I(W;U|Z),
    exponent I(W;Y|Z), null-hypothesis equivocation H(S|W,Y,Z).  All nats."""
    _require_taci_axes(p_suyz)
    j = attach_channel(p_suyz, w_channel)
    return TaciPoint(
        rate_needed=conditional_mutual_information(j, "W", "U", "Z"),
        exponent=conditional_mutual_information(j, "W", "Y", "Z"),
        equivocation0=conditional_entropy(j, "S", ("W", "Y", "Z")),
    )


def taci_alternate_law(p_suyz: JointPmf, q_s_given_uyz: np.ndarray) -> JointPmf:
    """Alternate joint Q_SUYZ = Q_{S|UYZ} P_{U|Z} P_{Y|Z} P_Z (conditional
    independence of U and Y given Z), from the null law's marginals."""
    _require_taci_axes(p_suyz)
    p_uyz = p_suyz.marginal_array(("U", "Y", "Z"))
    p_uz = p_uyz.sum(axis=1)
    p_yz = p_uyz.sum(axis=0)
    p_z = p_yz.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        q_uyz = np.einsum("uz,yz->uyz", p_uz, p_yz)
        q_uyz = np.divide(q_uyz, p_z[None, None, :], out=np.zeros_like(q_uyz),
                          where=p_z[None, None, :] > 0)
    cond = np.asarray(q_s_given_uyz, dtype=float)
    ns = cond.shape[-1]
    if cond.shape != p_uyz.shape + (ns,):
        raise ValueError(
            f"q_s_given_uyz shape {cond.shape} does not match (U,Y,Z,S) sizes"
        )
    q = np.einsum("uyz,uyzs->suyz", q_uyz, cond)
    names = ("S", "U", "Y", "Z")
    sizes = (ns,) + p_uyz.shape
    return JointPmf(tuple(zip(names, sizes)), q)


@dataclass(frozen=True)
class FrontierConfig:
    """Search configuration for the auxiliary-channel frontier sweep."""

    random_seeds: int = 200
    structured_seeds: int = 201
    pair_grid: int = 51              # per-axis grid for binary-output channels
    improve_step: float = 0.01
    improve_shrink: float = 0.5
    improve_floor: float = 1e-4
    improve_max_passes: int = 200
    rng_seed: int = 0
    w_sizes: tuple[int, ...] | None = None   # default 1 .. |U|+2


def _structured_channels(nu: int, nw: int, count: int, pair_grid: int) -> list[np.ndarray]:
    """Deterministic seed family: interpolations between a per-symbol labeling
    and the uniform row (sweeping disclosure from full to none), plus, for
    binary-output channels on a binary source, a dense crossover grid."""
    out: list[np.ndarray] = []
    det = np.zeros((nu, nw))
    for u in range(nu):
        det[u, u % nw] = 1.0
    uni = np.full((nu, nw), 1.0 / nw)
    for t in np.linspace(0.0, 1.0, count) if count > 0 else ():
        out.append((1.0 - t) * det + t * uni)
    if nu == 2 and nw == 2 and pair_grid > 1:
        grid = np.linspace(0.0, 1.0, pair_grid)
        for a in grid:
            for b in grid:
                out.append(np.array([[1.0 - a, a], [b, 1.0 - b]]))
    return out


def _dominates(a: TradeoffPoint, b: TradeoffPoint) -> bool:
    """a dominates b: lower-or-equal rate, higher-or-equal exponent and
    privacy0, strictly better in at least one coordinate."""
    if a.rate > b.rate + 1e-15 or a.exponent < b.exponent - 1e-15 \
            or a.privacy0 < b.privacy0 - 1e-15:
        return False
    return (a.rate < b.rate - 1e-15 or a.exponent > b.exponent + 1e-15
            or a.privacy0 > b.privacy0 + 1e-15)


def pareto_filter(points: list[TradeoffPoint]) -> list[TradeoffPoint]:
    if not points:
        return []
    coords = np.array([(p.rate, p.exponent, p.privacy0) for p in points])
    n = len(points)
    keep = np.ones(n, dtype=bool)
    eps = 1e-15
    for i in range(n):
        if not keep[i]:
            continue
        r, e, s = coords[i]
        leq_rate = coords[:, 0] <= r + eps
        geq_exp = coords[:, 1] >= e - eps
        geq_priv = coords[:, 2] >= s - eps
        strict = (coords[:, 0] < r - eps) | (coords[:, 1] > e + eps) | (coords[:, 2] > s + eps)
        dominating = leq_rate & geq_exp & geq_priv & strict
        dominating[i] = False
        if dominating.any():
            keep[i] = False
            continue
        # drop exact duplicates beyond the first occurrence
        dup = (np.abs(coords[:i, 0] - r) < eps) & (np.abs(coords[:i, 1] - e) < eps) \
            & (np.abs(coords[:i, 2] - s) < eps)
        if dup.any():
            keep[i] = keep[i] and not keep[:i][dup].any()
    return [p for p, k in zip(points, keep) if k]


def worker_count() -> int:
    env = os.environ.get("HTPL_THREADS", "")
    if env.strip():
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def taci_frontier(p_suyz: JointPmf, q_s_given_uyz: np.ndarray,
                  config: FrontierConfig | None = None) -> list[TradeoffPoint]:
    """Pareto-nondominated achievable points over sampled auxiliary channels.

    Searches |W| in {1, ..., |U|+2} (the cardinality bound), seeding each size
    with structured interpolations plus random channels, then hill-climbing a
    random linear scalarization of (-rate, exponent, equivocation) coordinate
    by coordinate.  Every emitted point stores its channel, so it can be
    reproduced exactly by :func:`taci_point`.
    """
    cfg = config or FrontierConfig()
    _require_taci_axes(p_suyz)
    nu = p_suyz.axis_size("U")
    q_joint = taci_alternate_law(p_suyz, q_s_given_uyz)
    lambda_min = conditional_entropy(q_joint, "S", ("U", "Y", "Z"))
    w_sizes = cfg.w_sizes or tuple(range(1, nu + 3))
    rng = np.random.default_rng(cfg.rng_seed)

    def evaluate(rows: np.ndarray) -> TradeoffPoint:
        chan = Channel(rows)
        tp = taci_point(p_suyz, chan)
        return TradeoffPoint(tp.rate_needed, tp.exponent, tp.equivocation0,
                             lambda_min, "equivocation", channel=chan)

    def scalarized(point: TradeoffPoint, w: np.ndarray) -> float:
        return -w[0] * point.rate + w[1] * point.exponent + w[2] * point.privacy0

    def improve(rows: np.ndarray, weights: np.ndarray) -> list[TradeoffPoint]:
        # hill-climb a random scalarization of the three objectives
        nw = rows.shape[1]
        point = evaluate(rows)
        out = [point]
        if weights.sum() <= 0:
            return out
        best, best_rows = point, rows
        step = cfg.improve_step
        passes = 0
        while step >= cfg.improve_floor and passes < cfg.improve_max_passes:
            passes += 1
            improved = False
            for u in range(nu):
                for w in range(nw):
                    for sign in (+1.0, -1.0):
                        trial = best_rows.copy()
                        trial[u, w] = max(trial[u, w] + sign * step, 0.0)
                        s = trial[u].sum()
                        if s <= 0:
                            continue
                        trial[u] /= s
                        cand = evaluate(trial)
                        if scalarized(cand, weights) > scalarized(best, weights) + 1e-12:
                            best, best_rows = cand, trial
                            improved = True
            if not improved:
                step *= cfg.improve_shrink
        out.append(best)
        return out

    # draw every random seed up front so results do not depend on scheduling
    structured: list[np.ndarray] = []
    random_jobs: list[tuple[np.ndarray, np.ndarray]] = []
    for nw in w_sizes:
        structured.extend(_structured_channels(nu, nw, cfg.structured_seeds, cfg.pair_grid))
        for _ in range(cfg.random_seeds):
            rows = rng.gamma(1.0, 1.0, size=(nu, nw))
            rows /= rows.sum(axis=1, keepdims=True)
            random_jobs.append((rows, rng.random(3)))

    candidates: list[TradeoffPoint] = [evaluate(rows) for rows in structured]
    workers = worker_count()
    if workers > 1 and len(random_jobs) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            for got in pool.map(lambda job: improve(*job), random_jobs):
                candidates.extend(got)
    else:
        for job in random_jobs:
            candidates.extend(improve(*job))

    front = pareto_filter(candidates)
    return [replace(p, channel_id=f"ch{idx:04d}") for idx, p in enumerate(front)]


# ---------------------------------------------------------------------------
# binary closed form
# ---------------------------------------------------------------------------

def example1_closed_form(p: float, q: float, r: float) -> tuple[float, float, float]:
    """Boundary curve of the binary cascade instance, in bits:
    rate 1 - h(r), exponent 1 - h((r*q)*p), equivocation h(p)+h(q*r)-h(p*(q*r))."""
    for name, val in (("p", p), ("q", q)):
        if not 0.0 <= val <= 1.0:
            raise ValueError(f"{name}={val} outside [0, 1]")
    if not 0.0 <= r <= 0.5:
        raise ValueError(f"r={r} outside [0, 0.5]")
    rate = 1.0 - binary_entropy(r)
    exponent = 1.0 - binary_entropy(star(star(r, q), p))
    qr = star(q, r)
    equivocation = binary_entropy(p) + binary_entropy(qr) - binary_entropy(star(p, qr))
    return rate, exponent, equivocation


# ---------------------------------------------------------------------------
# zero-rate regime
# ---------------------------------------------------------------------------

def zero_rate_exponent_solution(p_u: Pmf, p_v: Pmf, q_uv: JointPmf) -> CouplingSolution:
    """min KL(coupling || Q_UV) over couplings with marginals (P_U, P_V)."""
    ref = q_uv.probs
    if ref.shape != (p_u.support_size, p_v.support_size):
        raise ValueError(
            f"q_uv shape {ref.shape} does not match marginals "
            f"({p_u.support_size}, {p_v.support_size})"
        )
    cons = (((0,), p_u.probs), ((1,), p_v.probs))
    return solve_coupling(CouplingProblem(ref, cons))


def zero_rate_exponent(p_u: Pmf, p_v: Pmf, q_uv: JointPmf) -> float:
    return zero_rate_exponent_solution(p_u, p_v, q_uv).objective


def zero_rate_privacy(pair: HypothesisPair) -> ZeroRatePrivacy:
    """Maximal zero-rate privacy levels: per-letter Bayes distortions given V
    alone and the conditional equivocations H(S|V) under each hypothesis."""
    v_axes = pair.v_axes
    deltas = [None, None]
    if pair.distortion is not None:
        deltas = [
            _min_expected_distortion(pair.law(h), v_axes, pair) for h in (0, 1)
        ]
    return ZeroRatePrivacy(
        delta0_max=deltas[0],
        delta1_max=deltas[1],
        lambda0_max=conditional_entropy(pair.p, "S", v_axes),
        lambda1_max=conditional_entropy(pair.q, "S", v_axes),
    )


def bayes_estimator(posterior, distortion) -> tuple[int, float]:
    """argmin over reconstructions of the posterior-expected distortion.

    Ties break toward the smallest index (np.argmin's convention).
    """
    post = posterior.probs if isinstance(posterior, Pmf) else np.asarray(posterior, float)
    d = np.asarray(distortion, dtype=float)
    if d.ndim != 2 or d.shape[0] != post.size:
        raise ValueError(f"distortion table {d.shape} does not cover posterior of size {post.size}")
    costs = post @ d
    idx = int(np.argmin(costs))
    return idx, float(costs[idx])
