"""Built-in problem instances and instance-file IO.

Instance files are JSON objects with ``p_suv`` and ``q_suv`` joint-pmf
records (axes in declared order; row-major probs), an optional ``distortion``
table with ``d_max``, and a free-form ``labels`` map.
"""

from __future__ import annotations

import itertools
import json

import numpy as np

from .probcore import JointPmf
from .regions import HypothesisPair

__all__ = [
    "example1_pair",
    "example2_pair",
    "example2_taci_joint",
    "zero_rate_binary_pair",
    "counterexample_pair",
    "hamming",
    "load_instance",
    "save_instance",
    "conditional_s_given_rest",
]


def hamming(k: int) -> np.ndarray:
    return 1.0 - np.eye(k)


def example1_pair(p: float, q: float) -> HypothesisPair:
    """Binary cascade instance: U uniform, S = U + Ber(q), V = S + Ber(p) under
    the null; under the alternate V is an independent fair coin."""
    pj = np.zeros((2, 2, 2))
    qj = np.zeros((2, 2, 2))
    for s, u, v in itertools.product(range(2), repeat=3):
        pu = 0.5
        ps_u = 1.0 - q if s == u else q
        pv_s = 1.0 - p if v == s else p
        pj[s, u, v] = pu * ps_u * pv_s
        qj[s, u, v] = pu * ps_u * 0.5
    axes = (("S", 2), ("U", 2), ("V", 2))
    return HypothesisPair(JointPmf(axes, pj), JointPmf(axes, qj),
                          distortion=hamming(2), d_max=1.0)


def _example2_arrays():
    p_su = 0.125 * np.array(
        [[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, 1]], dtype=float
    )
    p_y_u = np.array([[1, 0], [0, 1], [1, 0], [0, 1]], dtype=float)
    p_suy = np.einsum("su,uy->suy", p_su, p_y_u)
    p_y = p_suy.sum(axis=(0, 1))
    q_suy = np.einsum("su,y->suy", p_su, p_y)
    return p_suy, q_suy


def example2_pair() -> HypothesisPair:
    """Perfect-privacy instance: 4-ary (S, U) in correlated blocks, Y the
    parity of U under the null, Y independent under the alternate."""
    p_suy, q_suy = _example2_arrays()
    axes = (("S", 4), ("U", 4), ("Y", 2))
    return HypothesisPair(JointPmf(axes, p_suy), JointPmf(axes, q_suy),
                          distortion=hamming(4), d_max=1.0)


def example2_taci_joint() -> JointPmf:
    """Null law of the perfect-privacy instance with an explicit trivial Z axis."""
    p_suy, _ = _example2_arrays()
    axes = (("S", 4), ("U", 4), ("Y", 2), ("Z", 1))
    return JointPmf(axes, p_suy[..., None])


def zero_rate_binary_pair(p_u0: float = 0.5, flip: float = 0.2,
                          q_u0: float = 0.8, q_flip: float = 0.35) -> HypothesisPair:
    """Binary zero-rate test instance with S = U and noisy V observations."""
    pj = np.zeros((2, 2, 2))
    qj = np.zeros((2, 2, 2))
    for u, v in itertools.product(range(2), repeat=2):
        pu = p_u0 if u == 0 else 1.0 - p_u0
        pv = 1.0 - flip if v == u else flip
        pj[u, u, v] = pu * pv
        qu = q_u0 if u == 0 else 1.0 - q_u0
        qv = 1.0 - q_flip if v == u else q_flip
        qj[u, u, v] = qu * qv
    axes = (("S", 2), ("U", 2), ("V", 2))
    return HypothesisPair(JointPmf(axes, pj), JointPmf(axes, qj),
                          distortion=hamming(2), d_max=1.0)


def counterexample_pair(flip_s: float = 0.15, flip_v: float = 0.25) -> HypothesisPair:
    """Testing-against-independence instance with H_P(S|U,V) < H_P(S|V):
    U a fair coin, S = U + Ber(flip_s), V = U + Ber(flip_v); the alternate
    draws V independently with the same marginal."""
    pj = np.zeros((2, 2, 2))
    qj = np.zeros((2, 2, 2))
    for s, u, v in itertools.product(range(2), repeat=3):
        pu = 0.5
        ps = 1.0 - flip_s if s == u else flip_s
        pv = 1.0 - flip_v if v == u else flip_v
        pj[s, u, v] = pu * ps * pv
    p_v = pj.sum(axis=(0, 1))
    p_su = pj.sum(axis=2)
    qj = np.einsum("su,v->suv", p_su, p_v)
    axes = (("S", 2), ("U", 2), ("V", 2))
    return HypothesisPair(JointPmf(axes, pj), JointPmf(axes, qj),
                          distortion=hamming(2), d_max=1.0)


# ---------------------------------------------------------------------------
# instance files
# ---------------------------------------------------------------------------

def save_instance(pair: HypothesisPair, path: str, labels: dict | None = None) -> None:
    rec = {
        "labels": labels or {},
        "p_suv": json.loads(pair.p.to_json()),
        "q_suv": json.loads(pair.q.to_json()),
    }
    if pair.distortion is not None:
        rec["distortion"] = [[float(x) for x in row] for row in pair.distortion]
        rec["d_max"] = float(pair.d_max)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(rec, fh, indent=2)
        fh.write("\n")


def load_instance(path: str) -> HypothesisPair:
    with open(path, encoding="utf-8") as fh:
        rec = json.load(fh)
    for key in ("p_suv", "q_suv"):
        if key not in rec:
            raise ValueError(f"instance file {path} missing field {key!r}")
    p = JointPmf.from_record(rec["p_suv"])
    q = JointPmf.from_record(rec["q_suv"])
    distortion = rec.get("distortion")
    d_max = rec.get("d_max")
    return HypothesisPair(
        p, q,
        distortion=np.asarray(distortion, float) if distortion is not None else None,
        d_max=float(d_max) if d_max is not None else None,
    )


def conditional_s_given_rest(joint: JointPmf) -> np.ndarray:
    """Conditional of S given all remaining axes, indexed (rest..., S);
    cells with zero conditioning mass fall back to the uniform row."""
    names = joint.names
    rest = tuple(n for n in names if n != "S")
    arr = joint.marginal_array(rest + ("S",))
    denom = arr.sum(axis=-1, keepdims=True)
    ns = arr.shape[-1]
    out = np.divide(arr, denom, out=np.full_like(arr, 1.0 / ns), where=denom > 0)
    return out
