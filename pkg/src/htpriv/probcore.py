"""Exact finite-alphabet probability and information calculus.

Distributions are dense numpy tensors over labeled axes.  All information
quantities are returned in nats; bits appear only at presentation
boundaries (see :func:`nats_to_bits`).  ``0 * log 0`` is taken to be 0 and
``p * log(p/0)`` with ``p > 0`` is ``math.inf`` (an explicit extended-real
value, never an overflow artifact).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MASS_TOL",
    "PMF_EQ_TOL",
    "Pmf",
    "JointPmf",
    "Channel",
    "SequenceSample",
    "SupportMismatchError",
    "UnknownAxisError",
    "entropy",
    "kl_divergence",
    "conditional_entropy",
    "mutual_information",
    "conditional_mutual_information",
    "total_variation",
    "binary_entropy",
    "inv_binary_entropy",
    "star",
    "is_typical",
    "joint_type",
    "empirical_cond_entropy",
    "empirical_pmf",
    "pmf_close",
    "nats_to_bits",
    "bits_to_nats",
]

MASS_TOL = 1e-12        # total-mass tolerance for valid distributions
PMF_EQ_TOL = 1e-12      # sup-norm tolerance for distribution equality tests

LN2 = math.log(2.0)


class SupportMismatchError(ValueError):
    """Two distributions that must share a support do not."""


class UnknownAxisError(ValueError):
    """An axis label is absent from a joint distribution."""


def nats_to_bits(x: float) -> float:
    return x / LN2 if math.isfinite(x) else x


def bits_to_nats(x: float) -> float:
    return x * LN2 if math.isfinite(x) else x


def _as_prob_array(probs, shape=None) -> np.ndarray:
    a = np.asarray(probs, dtype=float)
    if shape is not None:
        a = a.reshape(shape)
    if np.any(a < -MASS_TOL):
        raise ValueError(f"negative probability entry: min={a.min()}")
    a = np.maximum(a, 0.0)
    total = a.sum()
    if abs(total - 1.0) > MASS_TOL:
        raise ValueError(f"probabilities sum to {total}, not 1 within {MASS_TOL}")
    return a


@dataclass(frozen=True)
class Pmf:
    """Probability mass function on {0, ..., support_size-1}."""

    probs: np.ndarray

    def __post_init__(self):
        a = _as_prob_array(self.probs)
        if a.ndim != 1 or a.size == 0:
            raise ValueError("Pmf requires a nonempty 1-d probability vector")
        a.flags.writeable = False
        object.__setattr__(self, "probs", a)

    @property
    def support_size(self) -> int:
        return int(self.probs.size)

    def __len__(self) -> int:
        return self.support_size


@dataclass(frozen=True)
class JointPmf:
    """Dense joint distribution over an ordered list of named finite axes.

    ``axes`` is a tuple of (name, size) pairs; ``probs`` is stored row-major
    in the declared axis order (that order is the serialization contract).
    """

    axes: tuple[tuple[str, int], ...]
    probs: np.ndarray

    def __post_init__(self):
        axes = tuple((str(n), int(s)) for n, s in self.axes)
        names = [n for n, _ in axes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate axis names: {names}")
        shape = tuple(s for _, s in axes)
        a = _as_prob_array(self.probs, shape)
        a.flags.writeable = False
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "probs", a)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.axes)

    def axis_index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.axes):
            if n == name:
                return i
        raise UnknownAxisError(f"axis {name!r} not in {self.names}")

    def axis_size(self, name: str) -> int:
        return self.axes[self.axis_index(name)][1]

    def _resolve(self, names) -> tuple[int, ...]:
        if isinstance(names, str):
            names = (names,)
        idx = tuple(self.axis_index(n) for n in names)
        if len(set(idx)) != len(idx):
            raise ValueError(f"repeated axes in {names}")
        return idx

    def marginal_array(self, keep) -> np.ndarray:
        """Marginal tensor over ``keep`` axes, in the order given by ``keep``."""
        idx = self._resolve(keep)
        drop = tuple(i for i in range(self.probs.ndim) if i not in idx)
        m = self.probs.sum(axis=drop)
        kept_sorted = tuple(sorted(idx))
        perm = tuple(kept_sorted.index(i) for i in idx)
        return m.transpose(perm) if perm != tuple(range(len(idx))) else m

    def marginal(self, keep) -> "JointPmf":
        if isinstance(keep, str):
            keep = (keep,)
        arr = self.marginal_array(keep)
        return JointPmf(tuple((n, self.axis_size(n)) for n in keep), arr)

    def marginal_pmf(self, name: str) -> Pmf:
        return Pmf(self.marginal_array((name,)))

    def to_json(self) -> str:
        rec = {
            "axes": [{"name": n, "size": s} for n, s in self.axes],
            "probs": [float(x) for x in self.probs.ravel(order="C")],
        }
        return json.dumps(rec)

    @classmethod
    def from_json(cls, text: str) -> "JointPmf":
        rec = json.loads(text)
        axes = tuple((a["name"], int(a["size"])) for a in rec["axes"])
        shape = tuple(s for _, s in axes)
        return cls(axes, np.asarray(rec["probs"], dtype=float).reshape(shape))

    @classmethod
    def from_record(cls, rec: dict) -> "JointPmf":
        axes = tuple((a["name"], int(a["size"])) for a in rec["axes"])
        shape = tuple(s for _, s in axes)
        return cls(axes, np.asarray(rec["probs"], dtype=float).reshape(shape))


@dataclass(frozen=True)
class Channel:
    """Row-stochastic conditional law: rows[i] is a Pmf over outputs given input i."""

    rows: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.rows, dtype=float)
        if a.ndim != 2 or a.size == 0:
            raise ValueError("Channel requires a nonempty 2-d row-stochastic matrix")
        for i, row in enumerate(a):
            try:
                _as_prob_array(row)
            except ValueError as e:
                raise ValueError(f"channel row {i} invalid: {e}") from e
        a = np.maximum(a, 0.0)
        a.flags.writeable = False
        object.__setattr__(self, "rows", a)

    @property
    def input_size(self) -> int:
        return int(self.rows.shape[0])

    @property
    def output_size(self) -> int:
        return int(self.rows.shape[1])

    def row(self, i: int) -> Pmf:
        return Pmf(self.rows[i])


@dataclass(frozen=True)
class SequenceSample:
    """Length-n sequence of alphabet indices."""

    symbols: np.ndarray
    alphabet_size: int

    def __post_init__(self):
        a = np.asarray(self.symbols, dtype=np.int64)
        if a.ndim != 1 or a.size == 0:
            raise ValueError("sequence must be a nonempty 1-d index vector")
        if a.min() < 0 or a.max() >= self.alphabet_size:
            raise ValueError(
                f"symbols out of range [0, {self.alphabet_size}): "
                f"min={a.min()} max={a.max()}"
            )
        a.flags.writeable = False
        object.__setattr__(self, "symbols", a)

    @property
    def n(self) -> int:
        return int(self.symbols.size)


# ---------------------------------------------------------------------------
# information measures
# ---------------------------------------------------------------------------

def _entropy_of_array(a: np.ndarray) -> float:
    p = a[a > 0]
    return float(-np.dot(p, np.log(p)))


def entropy(p) -> float:
    """Shannon entropy -sum p log p in nats, with 0 log 0 = 0."""
    if isinstance(p, Pmf):
        return _entropy_of_array(p.probs)
    if isinstance(p, JointPmf):
        return _entropy_of_array(p.probs)
    return _entropy_of_array(_as_prob_array(p))


def kl_divergence(p, q) -> float:
    """D(p || q) in nats; +inf exactly when p is not absolutely continuous wrt q."""
    pa = p.probs if isinstance(p, (Pmf, JointPmf)) else _as_prob_array(p)
    qa = q.probs if isinstance(q, (Pmf, JointPmf)) else _as_prob_array(q)
    if pa.shape != qa.shape:
        raise SupportMismatchError(f"supports differ: {pa.shape} vs {qa.shape}")
    mask = pa > 0
    if np.any(qa[mask] <= 0):
        return math.inf
    pm = pa[mask]
    return float(np.dot(pm, np.log(pm) - np.log(qa[mask])))


def conditional_entropy(j: JointPmf, target, given=()) -> float:
    """H(target | given) in nats."""
    t = j._resolve(target)
    g = j._resolve(given) if given else ()
    if set(t) & set(g):
        raise ValueError("target and given axes must be disjoint")
    names = j.names
    both = tuple(names[i] for i in sorted(t + g))
    h_joint = _entropy_of_array(j.marginal_array(both))
    if not g:
        return h_joint
    h_given = _entropy_of_array(j.marginal_array(tuple(names[i] for i in sorted(g))))
    return h_joint - h_given


def mutual_information(j: JointPmf, a, b) -> float:
    """I(a ; b) in nats."""
    return conditional_entropy(j, a) - conditional_entropy(j, a, b)


def conditional_mutual_information(j: JointPmf, a, b, given) -> float:
    """I(a ; b | given) in nats."""
    return conditional_entropy(j, a, given) - conditional_entropy(
        j, a, _names_union(j, b, given)
    )


def _names_union(j: JointPmf, a, b):
    if isinstance(a, str):
        a = (a,)
    if isinstance(b, str):
        b = (b,)
    out = tuple(a) + tuple(n for n in b if n not in a)
    return out


def total_variation(p, q) -> float:
    """(1/2) sum |p - q|."""
    pa = p.probs if isinstance(p, (Pmf, JointPmf)) else np.asarray(p, float)
    qa = q.probs if isinstance(q, (Pmf, JointPmf)) else np.asarray(q, float)
    if pa.shape != qa.shape:
        raise SupportMismatchError(f"shapes differ: {pa.shape} vs {qa.shape}")
    return float(0.5 * np.abs(pa - qa).sum())


def pmf_close(p, q, tol: float = PMF_EQ_TOL) -> bool:
    """Sup-norm equality test used for indicator terms like 1(P_U = Q_U)."""
    pa = p.probs if isinstance(p, (Pmf, JointPmf)) else np.asarray(p, float)
    qa = q.probs if isinstance(q, (Pmf, JointPmf)) else np.asarray(q, float)
    if pa.shape != qa.shape:
        raise SupportMismatchError(f"shapes differ: {pa.shape} vs {qa.shape}")
    return bool(np.abs(pa - qa).max() <= tol)


# ---------------------------------------------------------------------------
# binary-convolution algebra
# ---------------------------------------------------------------------------

def binary_entropy(t: float) -> float:
    """h_b(t) in bits; domain [0, 1]."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"binary_entropy argument {t} outside [0, 1]")
    if t in (0.0, 1.0):
        return 0.0
    return float(-(1.0 - t) * math.log2(1.0 - t) - t * math.log2(t))


def inv_binary_entropy(y: float, tol: float = 1e-12) -> float:
    """Left branch of h_b^{-1}: the unique t in [0, 0.5] with h_b(t) = y bits.

    Bisection to ``tol`` on the argument.
    """
    if not 0.0 <= y <= 1.0:
        raise ValueError(f"inv_binary_entropy argument {y} outside [0, 1]")
    if y == 0.0:
        return 0.0
    if y == 1.0:
        return 0.5
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def star(a: float, b: float) -> float:
    """Binary convolution a * b = (1-a) b + (1-b) a; domain [0, 1] x [0, 1]."""
    if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
        raise ValueError(f"star arguments ({a}, {b}) outside [0, 1]")
    return (1.0 - a) * b + (1.0 - b) * a


# ---------------------------------------------------------------------------
# types and typicality
# ---------------------------------------------------------------------------

def empirical_pmf(x: SequenceSample) -> Pmf:
    counts = np.bincount(x.symbols, minlength=x.alphabet_size)
    return Pmf(counts / x.n)


def is_typical(x: SequenceSample, p: Pmf, delta: float) -> bool:
    """Letter-typicality: |p(a) - freq(a)| <= delta for every letter a."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if x.alphabet_size != p.support_size:
        raise SupportMismatchError(
            f"alphabet {x.alphabet_size} vs pmf support {p.support_size}"
        )
    freq = np.bincount(x.symbols, minlength=p.support_size) / x.n
    return bool(np.abs(p.probs - freq).max() <= delta + 1e-15)


def joint_type(x: SequenceSample, y: SequenceSample) -> JointPmf:
    """Empirical joint distribution of the pair (x, y), axes ("X", "Y")."""
    if x.n != y.n:
        raise ValueError(f"length mismatch: {x.n} vs {y.n}")
    counts = np.zeros((x.alphabet_size, y.alphabet_size))
    np.add.at(counts, (x.symbols, y.symbols), 1.0)
    return JointPmf((("X", x.alphabet_size), ("Y", y.alphabet_size)), counts / x.n)


def empirical_cond_entropy(y: SequenceSample, x: SequenceSample) -> float:
    """H_e(y^n | x^n): conditional entropy of the joint type, in nats."""
    jt = joint_type(x, y)
    return conditional_entropy(jt, "Y", "X")
