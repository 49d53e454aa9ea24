"""Executable finite-blocklength coding schemes and a seeded trial runner.

Implements the stochastic likelihood encoder with random binning and
minimum-empirical-entropy decoding, the one-bit typicality scheme for the
zero-rate regime, and the time-shared quantization encoder used by the
strong-converse counterexample.  Everything is deterministic given seeds;
per-trial randomness comes from a splittable generator keyed by
(seed, hypothesis, trial index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .probcore import (
    Channel,
    Pmf,
    SequenceSample,
    empirical_cond_entropy,
    is_typical,
)
from .regions import HypothesisPair

__all__ = [
    "Codebook",
    "Message",
    "TrialStats",
    "SchemeConfig",
    "CodebookSizeError",
    "EncoderDegenerateError",
    "DELTA_DEFAULT",
    "ETA_DEFAULT",
    "build_codebook",
    "likelihood_encode",
    "min_entropy_decode",
    "detect",
    "type_index_check",
    "zero_rate_encode",
    "zero_rate_detect",
    "timeshare_encode",
    "run_trials",
    "wilson_interval",
    "rank_count_matrix",
    "unrank_count_matrix",
    "LikelihoodSetup",
    "likelihood_setup",
]

DELTA_DEFAULT = 0.05
ETA_DEFAULT = 0.05
MAX_CODEWORDS = 2 ** 24


class CodebookSizeError(ValueError):
    """Requested codebook exceeds the desk-scale size cap."""


class EncoderDegenerateError(RuntimeError):
    """Every codeword has zero likelihood for the observed sequence."""


@dataclass(frozen=True)
class Codebook:
    """Random codebook with binning map.

    ``codewords`` has shape (M', n); ``bins[j]`` is the bin of codeword j.
    ``identity_binning`` marks the regime where the rate is large enough that
    no binning is needed and the codeword index itself is sent.
    """

    n: int
    eta: float
    rate: float
    p_w: Pmf
    codewords: np.ndarray
    bins: np.ndarray
    num_bins: int
    identity_binning: bool
    u_size: int
    seed: int

    @property
    def size(self) -> int:
        return int(self.codewords.shape[0])

    def codeword(self, j: int) -> SequenceSample:
        return SequenceSample(self.codewords[j], self.p_w.support_size)


@dataclass(frozen=True)
class Message:
    """Encoder output: the error message or a (joint-type index, bin) payload."""

    kind: str                    # "error" | "payload"
    type_index: int | None = None
    bin_or_index: int | None = None

    def __post_init__(self):
        if self.kind == "error":
            if self.type_index is not None or self.bin_or_index is not None:
                raise ValueError("error message carries no payload")
        elif self.kind == "payload":
            if self.type_index is None or self.bin_or_index is None:
                raise ValueError("payload message needs type index and bin")
        else:
            raise ValueError(f"unknown message kind {self.kind!r}")


ERROR_MESSAGE = Message("error")


# ---------------------------------------------------------------------------
# canonical joint-type indexing
# ---------------------------------------------------------------------------

def _compositions(total: int, cells: int) -> int:
    if cells == 0:
        return 1 if total == 0 else 0
    return math.comb(total + cells - 1, cells - 1)


def rank_count_matrix(counts: np.ndarray) -> int:
    """Lexicographic rank of a nonnegative integer count matrix among all
    matrices of the same shape and total."""
    flat = [int(c) for c in np.asarray(counts).ravel()]
    total = sum(flat)
    k = len(flat)
    rank = 0
    rem = total
    for i, ci in enumerate(flat[:-1]):
        for v in range(ci):
            rank += _compositions(rem - v, k - i - 1)
        rem -= ci
    return rank


def unrank_count_matrix(rank: int, shape: tuple[int, int], total: int) -> np.ndarray:
    """Inverse of :func:`rank_count_matrix`."""
    k = shape[0] * shape[1]
    out = []
    rem = total
    r = rank
    for i in range(k - 1):
        v = 0
        while True:
            block = _compositions(rem - v, k - i - 1)
            if r < block:
                break
            r -= block
            v += 1
        out.append(v)
        rem -= v
    out.append(rem)
    if r != 0:
        raise ValueError(f"rank {rank} out of range for shape {shape}, total {total}")
    return np.asarray(out, dtype=np.int64).reshape(shape)


# ---------------------------------------------------------------------------
# codebook and likelihood encoder
# ---------------------------------------------------------------------------

def binning_active(mutual_info_uw: float, eta: float, n: int, u_size: int,
                   w_size: int, rate: float) -> bool:
    correction = u_size * w_size * math.log(n + 1) / n
    return mutual_info_uw + eta + correction > rate


def build_codebook(p_w: Pmf, n: int, eta: float, rate: float, seed: int, *,
                   mutual_info_uw: float, u_size: int,
                   max_codewords: int = MAX_CODEWORDS) -> Codebook:
    """Draw ceil(exp(n (I(U;W) + eta))) i.i.d. codewords from p_w and bin them.

    Binning is uniform at rate R - |U||W| log(n+1)/n when the codebook rate
    exceeds R (after the type-counting correction); otherwise the bin map is
    the identity.  Deterministic given ``seed``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if eta <= 0:
        raise ValueError("eta must be > 0")
    if rate < 0:
        raise ValueError("rate must be >= 0")
    m_exact = math.exp(n * (mutual_info_uw + eta))
    if m_exact > max_codewords:
        raise CodebookSizeError(
            f"codebook of {m_exact:.3g} codewords exceeds cap {max_codewords}"
        )
    m = max(1, math.ceil(m_exact))
    rng = np.random.default_rng(seed)
    codewords = rng.choice(p_w.support_size, size=(m, n), p=p_w.probs)
    w_size = p_w.support_size
    if binning_active(mutual_info_uw, eta, n, u_size, w_size, rate):
        correction = u_size * w_size * math.log(n + 1) / n
        num_bins = max(1, math.ceil(math.exp(n * (rate - correction))))
        bins = rng.integers(0, num_bins, size=m)
        identity = False
    else:
        bins = np.arange(m)
        num_bins = m
        identity = True
    return Codebook(n=n, eta=eta, rate=rate, p_w=p_w, codewords=codewords,
                    bins=bins, num_bins=num_bins, identity_binning=identity,
                    u_size=u_size, seed=seed)


def likelihood_selection_logits(cb: Codebook, u: SequenceSample,
                                p_u_given_w: Channel) -> np.ndarray:
    """Log of the unnormalized selection law: sum_i log P(u_i | w_i(j))."""
    with np.errstate(divide="ignore"):
        log_rows = np.log(p_u_given_w.rows)       # (|W|, |U|)
    return log_rows[cb.codewords, u.symbols[None, :]].sum(axis=1)


def likelihood_encode(cb: Codebook, u: SequenceSample, p_u_given_w: Channel,
                      delta_prime: float, seed: int) -> Message:
    """Stochastic likelihood encoder.

    Atypical inputs yield the error message.  Otherwise codeword j is chosen
    with probability proportional to the product likelihood of u under
    codeword j (computed in log domain with max subtraction), and the message
    carries the canonical joint-type index of (u, w(j)) plus the bin of j.
    """
    if u.n != cb.n:
        raise ValueError(f"sequence length {u.n} != codebook blocklength {cb.n}")
    p_u = Pmf(cb.p_w.probs @ p_u_given_w.rows)
    if not is_typical(u, p_u, delta_prime):
        return ERROR_MESSAGE
    logits = likelihood_selection_logits(cb, u, p_u_given_w)
    finite = np.isfinite(logits)
    if not finite.any():
        raise EncoderDegenerateError("all codewords have zero likelihood for u")
    probs = np.zeros(cb.size)
    shifted = logits[finite] - logits[finite].max()
    probs[finite] = np.exp(shifted)
    probs /= probs.sum()
    rng = np.random.default_rng(seed)
    j = int(rng.choice(cb.size, p=probs))
    counts = np.zeros((cb.u_size, cb.p_w.support_size), dtype=np.int64)
    np.add.at(counts, (u.symbols, cb.codewords[j]), 1)
    t = rank_count_matrix(counts)
    return Message("payload", type_index=t, bin_or_index=int(cb.bins[j]))


def type_index_check(m: Message, p_uw: np.ndarray, n: int, delta: float) -> bool:
    """Gate on the declared joint type: every empirical entry within delta of p_uw."""
    if m.kind != "payload":
        return False
    counts = unrank_count_matrix(m.type_index, p_uw.shape, n)
    return bool(np.abs(counts / n - p_uw).max() <= delta + 1e-15)


def min_entropy_decode(cb: Codebook, m: Message, v: SequenceSample,
                       delta_hat: float) -> int | None:
    """Among codebook entries in the message's bin whose codeword is
    delta_hat-typical for P_W, return the index minimizing the conditional
    empirical entropy H_e(w(l) | v); ties break toward the smallest index.
    Returns None when no candidate survives.  Under identity binning the sent
    index is returned directly."""
    if m.kind != "payload":
        raise ValueError("cannot decode an error message")
    if cb.identity_binning:
        return int(m.bin_or_index)
    best = None
    best_h = math.inf
    for l in np.flatnonzero(cb.bins == m.bin_or_index):
        w = cb.codeword(int(l))
        if not is_typical(w, cb.p_w, delta_hat):
            continue
        h = empirical_cond_entropy(w, v)
        if h < best_h - 1e-15:
            best, best_h = int(l), h
    return best


def detect(w_hat: SequenceSample | None, v: SequenceSample, m: Message,
           t_check: bool, delta_tilde: float, p_wv: np.ndarray) -> int:
    """Final decision: accept the null (0) iff the message is a payload, the
    type gate passed, decoding succeeded, and (w_hat, v) is jointly typical
    for p_wv at delta_tilde."""
    if m.kind != "payload" or not t_check or w_hat is None:
        return 1
    if w_hat.n != v.n:
        raise ValueError(f"length mismatch: {w_hat.n} vs {v.n}")
    counts = np.zeros(p_wv.shape)
    np.add.at(counts, (w_hat.symbols, v.symbols), 1.0)
    ok = np.abs(counts / v.n - p_wv).max() <= delta_tilde + 1e-15
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# zero-rate and time-sharing schemes
# ---------------------------------------------------------------------------

def zero_rate_encode(u: SequenceSample, p_u: Pmf, delta: float) -> int:
    """One-bit message: 1 iff the observed sequence is delta-typical."""
    return 1 if is_typical(u, p_u, delta) else 0


def zero_rate_detect(bit: int, v: SequenceSample, p_v: Pmf, delta: float) -> int:
    """Accept the null iff the bit is 1 and the local sequence is typical."""
    return 0 if (bit == 1 and is_typical(v, p_v, delta)) else 1


def timeshare_encode(base_message, epsilon_star: float, seed: int):
    """Pass the base message with probability 1 - epsilon*; otherwise emit the
    error message.  epsilon* = 0 reduces exactly to the base scheme."""
    if not 0.0 <= epsilon_star <= 1.0:
        raise ValueError(f"epsilon_star={epsilon_star} outside [0, 1]")
    if epsilon_star == 0.0:
        return base_message
    rng = np.random.default_rng(seed)
    if rng.random() < epsilon_star:
        return ERROR_MESSAGE if isinstance(base_message, Message) else 0
    return base_message


# ---------------------------------------------------------------------------
# Monte Carlo trial runner
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SchemeConfig:
    """Knobs for one simulated scheme; delta relations follow the coding
    scheme's construction: delta' = delta/2, delta_hat = |U| delta,
    delta_tilde = 2 delta."""

    scheme: str                       # "likelihood" | "zero_rate" | "timeshare"
    delta: float = DELTA_DEFAULT
    eta: float = ETA_DEFAULT
    rate_nats: float = 1.0
    epsilon_star: float = 0.0
    w_channel: Channel | None = None  # likelihood scheme; default W = U

    def __post_init__(self):
        if self.scheme not in ("likelihood", "zero_rate", "timeshare"):
            raise ValueError(f"unknown scheme {self.scheme!r}")

    @property
    def delta_prime(self) -> float:
        return self.delta / 2.0

    def delta_hat(self, u_size: int) -> float:
        return u_size * self.delta

    @property
    def delta_tilde(self) -> float:
        return 2.0 * self.delta


@dataclass(frozen=True)
class TrialStats:
    trials: int
    type1_errors: int
    type2_errors: int
    alpha_hat: float
    beta_hat: float
    alpha_interval: tuple[float, float]
    beta_interval: tuple[float, float]


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054):
    """95% Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be >= 1")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


def _trial_rng(seed: int, hypothesis: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(hypothesis, trial))
    )


def _sample_uv(joint_uv: np.ndarray, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    nu, nv = joint_uv.shape
    flat = rng.choice(nu * nv, size=n, p=joint_uv.ravel())
    return flat // nv, flat % nv


def run_trials(config: SchemeConfig, pair: HypothesisPair, n: int, trials: int,
               seed: int) -> TrialStats:
    """Estimate the two error probabilities of a configured scheme by i.i.d.
    simulation under each hypothesis.  Deterministic given ``seed``; trials
    draw independent generators keyed by (seed, hypothesis, trial)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    order = ("U",) + pair.v_axes
    p_uv = pair.p.marginal(order).probs.reshape(pair.u_size(), -1)
    q_uv = pair.q.marginal(order).probs.reshape(pair.u_size(), -1)
    p_u = Pmf(p_uv.sum(axis=1))
    p_v = Pmf(p_uv.sum(axis=0))

    if config.scheme == "zero_rate":
        t1, t2 = _zero_rate_errors(config, p_uv, q_uv, p_u, p_v, n, trials, seed)
    elif config.scheme == "timeshare":
        t1, t2 = _timeshare_errors(config, p_uv, q_uv, p_u, n, trials, seed)
    else:
        t1, t2 = _likelihood_errors(config, pair, p_uv, q_uv, p_u, n, trials, seed)

    return TrialStats(
        trials=trials, type1_errors=t1, type2_errors=t2,
        alpha_hat=t1 / trials, beta_hat=t2 / trials,
        alpha_interval=wilson_interval(t1, trials),
        beta_interval=wilson_interval(t2, trials),
    )


def _typical_rows(seqs: np.ndarray, probs: np.ndarray, delta: float) -> np.ndarray:
    n = seqs.shape[1]
    k = probs.size
    freqs = np.stack([(seqs == a).sum(axis=1) for a in range(k)], axis=1) / n
    return (np.abs(freqs - probs[None, :]).max(axis=1)) <= delta + 1e-15


def _zero_rate_errors(config, p_uv, q_uv, p_u, p_v, n, trials, seed):
    counts = []
    for hyp, juv in ((0, p_uv), (1, q_uv)):
        rng = _trial_rng(seed, hyp, 0)
        nu, nv = juv.shape
        flat = rng.choice(nu * nv, size=(trials, n), p=juv.ravel())
        useq, vseq = flat // nv, flat % nv
        m = _typical_rows(useq, p_u.probs, config.delta)
        accept = m & _typical_rows(vseq, p_v.probs, config.delta)
        counts.append(accept)
    alpha_errors = int((~counts[0]).sum())
    beta_errors = int(counts[1].sum())
    return alpha_errors, beta_errors


def _timeshare_errors(config, p_uv, q_uv, p_u, n, trials, seed):
    # quantization onto the typical set is exact at desk scale, so the decision
    # reduces to: accept iff the (kept) message is a payload and (u, v) is
    # jointly typical at delta' > delta
    delta, eps = config.delta, config.epsilon_star
    delta_accept = config.delta_tilde
    counts = []
    for hyp, juv in ((0, p_uv), (1, q_uv)):
        rng = _trial_rng(seed, hyp, 0)
        nu, nv = juv.shape
        flat = rng.choice(nu * nv, size=(trials, n), p=juv.ravel())
        useq, vseq = flat // nv, flat % nv
        typical_u = _typical_rows(useq, p_u.probs, delta)
        kept = rng.random(trials) >= eps
        pair_flat = useq * nv + vseq
        # acceptance always tests against the null joint law
        joint_typical = _typical_rows(pair_flat, p_uv.ravel(), delta_accept)
        accept = typical_u & kept & joint_typical
        counts.append(accept)
    return int((~counts[0]).sum()), int(counts[1].sum())


@dataclass(frozen=True)
class LikelihoodSetup:
    """Codebook and derived laws for one likelihood-scheme instantiation."""

    codebook: Codebook
    reverse_channel: Channel     # P(U | W)
    p_uw: np.ndarray             # null joint of (U, W)
    p_wv: np.ndarray             # null joint of (W, V-flat)


def likelihood_setup(config: SchemeConfig, pair: HypothesisPair, n: int,
                     seed: int) -> LikelihoodSetup:
    chan = config.w_channel
    if chan is None:
        chan = Channel(np.eye(pair.u_size()))
    order = ("U",) + pair.v_axes
    p_uv = pair.p.marginal(order).probs.reshape(pair.u_size(), -1)
    p_u = Pmf(p_uv.sum(axis=1))
    p_w = Pmf(p_u.probs @ chan.rows)
    joint_uw = p_u.probs[:, None] * chan.rows
    i_uw = _mi_from_joint(joint_uw)
    cb = build_codebook(p_w, n, config.eta, config.rate_nats, seed,
                        mutual_info_uw=i_uw, u_size=pair.u_size())
    p_w_marg = joint_uw.sum(axis=0)
    rev = np.divide(joint_uw.T, p_w_marg[:, None],
                    out=np.full((chan.output_size, pair.u_size()), np.nan),
                    where=p_w_marg[:, None] > 0)
    rev[~np.isfinite(rev).all(axis=1)] = 1.0 / pair.u_size()
    return LikelihoodSetup(codebook=cb, reverse_channel=Channel(rev),
                           p_uw=joint_uw, p_wv=chan.rows.T @ p_uv)


def _likelihood_errors(config, pair, p_uv, q_uv, p_u, n, trials, seed):
    setup = likelihood_setup(config, pair, n, seed)
    cb = setup.codebook
    rev_chan = setup.reverse_channel
    p_uw_target = setup.p_uw
    p_wv = setup.p_wv
    delta_hat = config.delta_hat(pair.u_size())

    errors = [0, 0]
    for hyp, juv in ((0, p_uv), (1, q_uv)):
        nu, nv = juv.shape
        for trial in range(trials):
            rng = _trial_rng(seed, hyp, trial)
            usym, vsym = _sample_uv(juv, n, rng)
            u = SequenceSample(usym, nu)
            v = SequenceSample(vsym, nv)
            enc_seed = rng.integers(0, 2 ** 63)
            m = likelihood_encode(cb, u, rev_chan, config.delta_prime, enc_seed)
            if m.kind == "payload":
                gate = type_index_check(m, p_uw_target, n, config.delta)
                jhat = min_entropy_decode(cb, m, v, delta_hat)
                w_hat = cb.codeword(jhat) if jhat is not None else None
                hhat = detect(w_hat, v, m, gate, config.delta_tilde, p_wv)
            else:
                hhat = 1
            if hyp == 0 and hhat == 1:
                errors[0] += 1
            elif hyp == 1 and hhat == 0:
                errors[1] += 1
    return errors[0], errors[1]


def _mi_from_joint(joint: np.ndarray) -> float:
    pm = joint.sum(axis=1)
    qm = joint.sum(axis=0)
    mask = joint > 0
    outer = pm[:, None] * qm[None, :]
    return float(np.sum(joint[mask] * (np.log(joint[mask]) - np.log(outer[mask]))))
