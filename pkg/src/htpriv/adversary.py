"""Exact privacy evaluation at finite blocklength.

Any scheme expressible as a conditional law of the message given the observed
block can be audited here: exact block equivocation H(S^n | M, V^n) and the
Bayes-optimal causal-disclosure distortion, both by enumeration in the
factored order (u-block first, then message, then marginalize) so memory
stays at O(|M| |S|^n |V|^n) instead of the full joint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .probcore import Pmf
from .regions import HypothesisPair, bayes_estimator
from .schemes import Codebook, Channel, likelihood_selection_logits

__all__ = [
    "SchemeModel",
    "PrivacyReport",
    "CounterexamplePoint",
    "BudgetExceededError",
    "AssumptionViolatedError",
    "all_sequences",
    "zero_rate_model",
    "quantize_timeshare_model",
    "likelihood_model",
    "constant_model",
    "full_disclosure_model",
    "message_map_model",
    "scheme_model_for",
    "exact_equivocation",
    "exact_causal_distortion",
    "mc_privacy_estimate",
    "counterexample_curve",
]

DEFAULT_BUDGET = 10 ** 8


class BudgetExceededError(RuntimeError):
    """The requested enumeration does not fit the configured cell budget."""


class AssumptionViolatedError(ValueError):
    """An instance violates a standing assumption of the construction."""


@dataclass(frozen=True)
class SchemeModel:
    """Conditional law of the message given the observed block.

    ``law`` has shape (u_size**n, num_messages) with rows summing to 1;
    ``labels`` names each message column (label index 0 need not be special,
    but builders here put the error message first when one exists).
    """

    n: int
    u_size: int
    law: np.ndarray
    labels: tuple

    def __post_init__(self):
        law = np.asarray(self.law, dtype=float)
        if law.shape[0] != self.u_size ** self.n:
            raise ValueError(
                f"law has {law.shape[0]} rows, expected {self.u_size ** self.n}"
            )
        if len(self.labels) != law.shape[1]:
            raise ValueError("one label per message column required")
        rowsum = law.sum(axis=1)
        if np.abs(rowsum - 1.0).max() > 1e-10:
            raise ValueError("message law rows must sum to 1 within 1e-10")
        law.flags.writeable = False
        object.__setattr__(self, "law", law)

    @property
    def num_messages(self) -> int:
        return int(self.law.shape[1])


@dataclass(frozen=True)
class PrivacyReport:
    n: int
    hypothesis: int
    equivocation_per_letter: float            # nats
    causal_distortion_per_letter: float | None
    exact: bool
    equivocation_stderr: float = 0.0
    distortion_stderr: float = 0.0
    biased: bool = False


@dataclass(frozen=True)
class CounterexamplePoint:
    n: int
    alpha_exact: float
    equivocation_per_letter: float            # nats, under the null
    weak_converse_level: float                # H_P(S|U,V), nats
    no_message_level: float                   # H_P(S|V), nats


# ---------------------------------------------------------------------------
# model builders
# ---------------------------------------------------------------------------

def all_sequences(alphabet: int, n: int) -> np.ndarray:
    """All alphabet^n sequences as an (alphabet^n, n) array; row index is the
    base-`alphabet` value of the sequence, most significant letter first."""
    idx = np.arange(alphabet ** n)
    out = np.empty((alphabet ** n, n), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        out[:, i] = idx % alphabet
        idx //= alphabet
    return out


def _typical_mask(seqs: np.ndarray, probs: np.ndarray, delta: float) -> np.ndarray:
    n = seqs.shape[1]
    freqs = np.stack([(seqs == a).sum(axis=1) for a in range(probs.size)], axis=1) / n
    return np.abs(freqs - probs[None, :]).max(axis=1) <= delta + 1e-15


def zero_rate_model(p_u: Pmf, n: int, delta: float) -> SchemeModel:
    """M = 1(u typical): messages (error, flag)."""
    seqs = all_sequences(p_u.support_size, n)
    typ = _typical_mask(seqs, p_u.probs, delta)
    law = np.zeros((seqs.shape[0], 2))
    law[~typ, 0] = 1.0
    law[typ, 1] = 1.0
    return SchemeModel(n, p_u.support_size, law, ("error", "typical"))


def quantize_timeshare_model(p_u: Pmf, n: int, delta: float,
                             epsilon_star: float) -> SchemeModel:
    """Quantization onto the typical set, time-shared with the error message:
    a typical block is identified exactly with probability 1 - epsilon*."""
    if not 0.0 <= epsilon_star <= 1.0:
        raise ValueError(f"epsilon_star={epsilon_star} outside [0, 1]")
    seqs = all_sequences(p_u.support_size, n)
    typ = _typical_mask(seqs, p_u.probs, delta)
    typical_ids = np.flatnonzero(typ)
    labels = ("error",) + tuple(("seq", int(i)) for i in typical_ids)
    law = np.zeros((seqs.shape[0], 1 + typical_ids.size))
    law[:, 0] = 1.0
    for col, u_idx in enumerate(typical_ids, start=1):
        law[u_idx, 0] = epsilon_star
        law[u_idx, col] = 1.0 - epsilon_star
    return SchemeModel(n, p_u.support_size, law, labels)


def constant_model(u_size: int, n: int) -> SchemeModel:
    """Uninformative message."""
    law = np.ones((u_size ** n, 1))
    return SchemeModel(n, u_size, law, ("const",))


def full_disclosure_model(u_size: int, n: int) -> SchemeModel:
    """M identifies the block exactly."""
    m = u_size ** n
    return SchemeModel(n, u_size, np.eye(m), tuple(("seq", i) for i in range(m)))


def message_map_model(u_size: int, n: int, fn) -> SchemeModel:
    """Deterministic per-block message map; ``fn(seq) -> hashable label``."""
    seqs = all_sequences(u_size, n)
    labels = []
    cols = {}
    col_of = np.empty(seqs.shape[0], dtype=np.int64)
    for i, s in enumerate(seqs):
        lab = fn(tuple(int(x) for x in s))
        if lab not in cols:
            cols[lab] = len(labels)
            labels.append(lab)
        col_of[i] = cols[lab]
    law = np.zeros((seqs.shape[0], len(labels)))
    law[np.arange(seqs.shape[0]), col_of] = 1.0
    return SchemeModel(n, u_size, law, tuple(labels))


def scheme_model_for(config, pair: HypothesisPair, n: int, seed: int) -> SchemeModel:
    """Exact message law of a configured scheme, matching what the trial
    runner simulates (same codebook seed for the likelihood scheme)."""
    from .schemes import likelihood_setup

    order = ("U",) + pair.v_axes
    p_u = Pmf(pair.p.marginal(order).probs.reshape(pair.u_size(), -1).sum(axis=1))
    if config.scheme == "zero_rate":
        return zero_rate_model(p_u, n, config.delta)
    if config.scheme == "timeshare":
        return quantize_timeshare_model(p_u, n, config.delta, config.epsilon_star)
    setup = likelihood_setup(config, pair, n, seed)
    return likelihood_model(setup.codebook, setup.reverse_channel,
                            config.delta_prime)


def likelihood_model(cb: Codebook, p_u_given_w: Channel,
                     delta_prime: float) -> SchemeModel:
    """Exact message law induced by the likelihood encoder for a fixed codebook."""
    from .probcore import SequenceSample
    from .schemes import rank_count_matrix

    p_u = Pmf(cb.p_w.probs @ p_u_given_w.rows)
    nu = p_u.support_size
    seqs = all_sequences(nu, cb.n)
    typ = _typical_mask(seqs, p_u.probs, delta_prime)
    labels = ["error"]
    cols: dict = {"error": 0}
    rows = []
    for i, s in enumerate(seqs):
        row: dict = {}
        if not typ[i]:
            row[0] = 1.0
        else:
            u = SequenceSample(s, nu)
            logits = likelihood_selection_logits(cb, u, p_u_given_w)
            finite = np.isfinite(logits)
            if not finite.any():
                row[0] = 1.0
            else:
                probs = np.zeros(cb.size)
                sh = logits[finite] - logits[finite].max()
                probs[finite] = np.exp(sh)
                probs /= probs.sum()
                for j in np.flatnonzero(probs > 0):
                    counts = np.zeros((cb.u_size, cb.p_w.support_size), dtype=np.int64)
                    np.add.at(counts, (s, cb.codewords[j]), 1)
                    lab = ("type", rank_count_matrix(counts), "bin", int(cb.bins[j]))
                    if lab not in cols:
                        cols[lab] = len(labels)
                        labels.append(lab)
                    row[cols[lab]] = row.get(cols[lab], 0.0) + float(probs[j])
        rows.append(row)
    law = np.zeros((seqs.shape[0], len(labels)))
    for i, row in enumerate(rows):
        for c, p in row.items():
            law[i, c] = p
    return SchemeModel(cb.n, nu, law, tuple(labels))


# ---------------------------------------------------------------------------
# exact enumeration
# ---------------------------------------------------------------------------

def _letter_law(pair: HypothesisPair, hypothesis: int) -> np.ndarray:
    """Per-letter joint over (S, U, V-flat)."""
    order = ("S", "U") + pair.v_axes
    arr = pair.law(hypothesis).marginal(order).probs
    ns = arr.shape[0]
    nu = arr.shape[1]
    return arr.reshape(ns, nu, -1)


def _message_block_table(model: SchemeModel, pair: HypothesisPair, hypothesis: int,
                         max_joint_cells: int) -> tuple[np.ndarray, int, int]:
    """Joint mass table P[m, s-block, v-block], shape (|M|, |S|^n, |V|^n).

    The budget bounds the allocated table; the u-block dimension is folded in
    by accumulation and never materialized.
    """
    a = _letter_law(pair, hypothesis)
    ns, nu, nv = a.shape
    n = model.n
    if model.u_size != nu:
        raise ValueError(f"model alphabet {model.u_size} != |U| = {nu}")
    cells = model.num_messages * (ns ** n) * (nv ** n)
    if cells > max_joint_cells:
        raise BudgetExceededError(
            f"{cells:.3g} joint cells exceed the budget {max_joint_cells:.3g}"
        )
    useqs = all_sequences(nu, n)
    out = np.zeros((model.num_messages, (ns ** n) * (nv ** n)))
    for u_idx in range(useqs.shape[0]):
        row = model.law[u_idx]
        nz = np.flatnonzero(row)
        if nz.size == 0:
            continue
        block = reduce(np.kron, (a[:, u, :] for u in useqs[u_idx])).ravel()
        out[nz] += row[nz, None] * block[None, :]
    return out, ns, nv


def _entropy_nats(arr: np.ndarray) -> float:
    p = arr[arr > 0]
    return float(-np.dot(p, np.log(p)))


def exact_equivocation(model: SchemeModel, pair: HypothesisPair, n: int,
                       hypothesis: int,
                       max_joint_cells: int = DEFAULT_BUDGET) -> float:
    """Exact H(S^n | M, V^n) in nats (block total, not per letter)."""
    if n != model.n:
        raise ValueError(f"n={n} but model was built for n={model.n}")
    table, ns, nv = _message_block_table(model, pair, hypothesis, max_joint_cells)
    h_all = _entropy_nats(table)
    mv = table.reshape(table.shape[0], ns ** n, nv ** n).sum(axis=1)
    return h_all - _entropy_nats(mv)


def exact_causal_distortion(model: SchemeModel, pair: HypothesisPair, n: int,
                            hypothesis: int,
                            max_joint_cells: int = DEFAULT_BUDGET) -> float:
    """Exact block minimum of E[sum_i d(S_i, phi_i(M, V^n, S^{i-1}))] over
    deterministic causal estimators; the per-cell minimizer is the Bayes
    action, and estimator i sees past private letters but not S_i itself."""
    if pair.distortion is None:
        raise ValueError("HypothesisPair has no distortion table")
    if n != model.n:
        raise ValueError(f"n={n} but model was built for n={model.n}")
    table, ns, nv = _message_block_table(model, pair, hypothesis, max_joint_cells)
    nm = table.shape[0]
    nvn = nv ** n
    d = pair.distortion
    total = 0.0
    for i in range(1, n + 1):
        # mass over (m, s^{1..i}, v-block); s-block index is MSB-first so the
        # prefix s^{1..i} is the leading digits
        ti = table.reshape(nm, ns ** i, ns ** (n - i), nvn).sum(axis=2)
        groups = ti.reshape(nm, ns ** (i - 1), ns, nvn)
        groups = np.moveaxis(groups, 2, 3).reshape(-1, ns)
        costs = groups @ d
        total += float(costs.min(axis=1).sum())
    return total


# ---------------------------------------------------------------------------
# Monte Carlo estimates
# ---------------------------------------------------------------------------

def mc_privacy_estimate(model: SchemeModel, pair: HypothesisPair, n: int,
                        hypothesis: int, trials: int, seed: int,
                        max_joint_cells: int = DEFAULT_BUDGET) -> PrivacyReport:
    """Plug-in Monte Carlo estimate of the exact quantities above.

    When the posterior table fits the budget the per-sample posteriors are
    computed exactly and the estimates are unbiased; otherwise posteriors are
    approximated by self-normalized importance sampling over u-blocks and the
    report is flagged as biased.  Estimates, never certified bounds.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                       spawn_key=(hypothesis,)))
    a = _letter_law(pair, hypothesis)
    ns, nu, nv = a.shape
    flat = a.ravel()
    draws = rng.choice(flat.size, size=(trials, n), p=flat)
    s_seq = draws // (nu * nv)
    u_seq = (draws // nv) % nu
    v_seq = draws % nv
    u_idx = np.zeros(trials, dtype=np.int64)
    v_idx = np.zeros(trials, dtype=np.int64)
    s_idx = np.zeros(trials, dtype=np.int64)
    for i in range(n):
        u_idx = u_idx * nu + u_seq[:, i]
        v_idx = v_idx * nv + v_seq[:, i]
        s_idx = s_idx * ns + s_seq[:, i]
    msgs = np.array([
        rng.choice(model.num_messages, p=model.law[u]) for u in u_idx
    ])

    cells = model.num_messages * (ns ** n) * (nv ** n)
    biased = cells > max_joint_cells
    if not biased:
        table, _, _ = _message_block_table(model, pair, hypothesis, max_joint_cells)
        tbl = table.reshape(model.num_messages, ns ** n, nv ** n)
        p_mv = tbl.sum(axis=1)
        post = tbl[msgs, s_idx, v_idx] / p_mv[msgs, v_idx]
        eq_samples = -np.log(post)
        dist_samples = None
        if pair.distortion is not None:
            dist_samples = np.zeros(trials)
            d = pair.distortion
            for i in range(1, n + 1):
                ti = tbl.reshape(model.num_messages, ns ** i, ns ** (n - i), nv ** n).sum(axis=2)
                prefix = s_idx // (ns ** (n - i + 1))
                cur = (s_idx // (ns ** (n - i))) % ns
                cond = ti.reshape(model.num_messages, ns ** (i - 1), ns, nv ** n)
                for k in range(trials):
                    posterior = cond[msgs[k], prefix[k], :, v_idx[k]]
                    tot = posterior.sum()
                    if tot <= 0:
                        continue
                    shat, _ = bayes_estimator(posterior / tot, d)
                    dist_samples[k] += d[cur[k], shat]
    else:
        # importance-sample u-blocks from the letterwise prior
        k_is = 512
        p_u_letter = a.sum(axis=(0, 2)) / a.sum()
        eq_samples = np.zeros(trials)
        dist_samples = None  # biased mode reports equivocation only
        for k in range(trials):
            us = rng.choice(nu, size=(k_is, n), p=p_u_letter)
            w = np.ones(k_is)
            for i in range(n):
                w *= a[s_seq[k, i], us[:, i], v_seq[k, i]] / p_u_letter[us[:, i]]
            uids = np.zeros(k_is, dtype=np.int64)
            for i in range(n):
                uids = uids * nu + us[:, i]
            w_m = w * model.law[uids, msgs[k]]
            num = w_m.sum()
            # denominator: P(m, v^n) estimate via prior over (s, u)
            w2 = np.ones(k_is)
            for i in range(n):
                w2 *= a[:, us[:, i], v_seq[k, i]].sum(axis=0) / p_u_letter[us[:, i]]
            den = (w2 * model.law[uids, msgs[k]]).sum()
            eq_samples[k] = -math.log(max(num / max(den, 1e-300), 1e-300))

    eq_mean = float(eq_samples.mean()) / n
    eq_se = float(eq_samples.std(ddof=1) / math.sqrt(trials)) / n if trials > 1 else 0.0
    dist_mean = None
    dist_se = 0.0
    if dist_samples is not None:
        dist_mean = float(dist_samples.mean()) / n
        dist_se = float(dist_samples.std(ddof=1) / math.sqrt(trials)) / n if trials > 1 else 0.0
    return PrivacyReport(
        n=n, hypothesis=hypothesis,
        equivocation_per_letter=eq_mean,
        causal_distortion_per_letter=dist_mean,
        exact=False,
        equivocation_stderr=eq_se,
        distortion_stderr=dist_se,
        biased=biased,
    )


# ---------------------------------------------------------------------------
# strong-converse counterexample
# ---------------------------------------------------------------------------

def counterexample_curve(pair: HypothesisPair, epsilon_star: float,
                         n_list, delta: float = 0.1,
                         max_joint_cells: int = DEFAULT_BUDGET) -> list[CounterexamplePoint]:
    """Exact evaluation of the time-shared quantization scheme.

    Requires an instance with H_P(S|U,V) < H_P(S|V): the message must actually
    reveal something about the private letters for time sharing to buy
    equivocation.  For each n, reports the exact type I error and the exact
    per-letter equivocation under the null.
    """
    from .probcore import conditional_entropy

    v_axes = pair.v_axes
    h_suv = conditional_entropy(pair.p, "S", ("U",) + v_axes)
    h_sv = conditional_entropy(pair.p, "S", v_axes)
    if h_suv >= h_sv - 1e-12:
        raise AssumptionViolatedError(
            f"need H_P(S|U,V) < H_P(S|V); got {h_suv} >= {h_sv} - 1e-12"
        )
    order = ("U",) + v_axes
    p_uv = pair.p.marginal(order).probs.reshape(pair.u_size(), -1)
    p_u = Pmf(p_uv.sum(axis=1))
    nu, nv = p_uv.shape
    out = []
    for n in n_list:
        model = quantize_timeshare_model(p_u, n, delta, epsilon_star)
        # exact type I error: reject unless the kept message is a payload and
        # the pair is jointly typical at 2*delta
        useqs = all_sequences(nu, n)
        vseqs = all_sequences(nv, n)
        typical_u = _typical_mask(useqs, p_u.probs, delta)
        pmat = reduce(np.kron, [p_uv] * n)      # (nu^n, nv^n)
        # joint-type check per (u-block, v-block)
        u_onehot = np.stack([(useqs == a) for a in range(nu)], axis=0).astype(float)
        v_onehot = np.stack([(vseqs == b) for b in range(nv)], axis=0).astype(float)
        ok = np.ones((useqs.shape[0], vseqs.shape[0]), dtype=bool)
        for a in range(nu):
            for b in range(nv):
                counts = u_onehot[a] @ v_onehot[b].T
                ok &= np.abs(counts / n - p_uv[a, b]) <= 2.0 * delta + 1e-15
        accept_mass = float((pmat * ok)[typical_u].sum())
        alpha = 1.0 - (1.0 - epsilon_star) * accept_mass
        eq = exact_equivocation(model, pair, n, 0, max_joint_cells) / n
        out.append(CounterexamplePoint(
            n=n, alpha_exact=alpha, equivocation_per_letter=eq,
            weak_converse_level=h_suv, no_message_level=h_sv,
        ))
    return out
