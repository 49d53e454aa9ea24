"""Walkthrough: simulating the coding schemes at finite blocklength.

Builds a random codebook, traces one likelihood-encode / bin / decode /
detect round trip, then runs seeded Monte Carlo trials and checks them
against the exact brute-force error probabilities.

Run:  python demos/finite_blocklength.py
"""

import math

import numpy as np

from htpriv import instances
from htpriv.adversary import zero_rate_model
from htpriv.oracle import exact_error_probabilities
from htpriv.probcore import Channel, Pmf, SequenceSample, mutual_information
from htpriv.regions import attach_channel, zero_rate_exponent
from htpriv.schemes import (
    SchemeConfig,
    build_codebook,
    detect,
    likelihood_encode,
    min_entropy_decode,
    run_trials,
    type_index_check,
    unrank_count_matrix,
    zero_rate_detect,
    zero_rate_encode,
)

# ---------------------------------------------------------------------------
# 1. one round trip through the likelihood encoder
# ---------------------------------------------------------------------------
pair = instances.example1_pair(0.2, 0.0)
wch = Channel([[0.9, 0.1], [0.1, 0.9]])            # auxiliary channel from U
p_u = pair.p.marginal_pmf("U")
joint_uw = p_u.probs[:, None] * wch.rows
p_w = Pmf(joint_uw.sum(axis=0))
i_uw = mutual_information(attach_channel(pair.p.marginal(("U", "V")), wch), "U", "W")

n, eta, rate = 10, 0.05, 1.0
cb = build_codebook(p_w, n, eta, rate, seed=42, mutual_info_uw=i_uw, u_size=2)
print(f"codebook: {cb.size} codewords of length {n}, "
      f"{'identity binning' if cb.identity_binning else f'{cb.num_bins} bins'}")

rev = Channel((joint_uw / joint_uw.sum(axis=0)[None, :]).T)   # P(U | W)
rng = np.random.default_rng(1)
p_uv = pair.p.marginal(("U", "V")).probs
flat = rng.choice(4, size=n, p=p_uv.ravel())
u = SequenceSample(flat // 2, 2)
v = SequenceSample(flat % 2, 2)

m = likelihood_encode(cb, u, rev, delta_prime=0.15, seed=7)
print(f"message: kind={m.kind}, joint-type index={m.type_index}, "
      f"bin={m.bin_or_index}")
if m.kind == "payload":
    counts = unrank_count_matrix(m.type_index, (2, 2), n)
    print(f"declared joint type of (u, w):\n{counts}")
    gate = type_index_check(m, joint_uw, n, delta=0.3)
    jhat = min_entropy_decode(cb, m, v, delta_hat=0.6)
    w_hat = cb.codeword(jhat) if jhat is not None else None
    p_wv = wch.rows.T @ p_uv
    decision = detect(w_hat, v, m, gate, delta_tilde=0.6, p_wv=p_wv)
    print(f"type gate={gate}, decoded index={jhat}, decision H^={decision}")

# ---------------------------------------------------------------------------
# 2. the zero-rate scheme is a single typicality bit
# ---------------------------------------------------------------------------
zr = instances.zero_rate_binary_pair()
p_u0 = zr.p.marginal_pmf("U")
p_v0 = Pmf(zr.p.marginal(("U", "V")).probs.sum(axis=0))
u6 = SequenceSample([1, 0, 1, 1, 0, 1], 2)
bit = zero_rate_encode(u6, p_u0, delta=0.2)
print(f"\nzero-rate: sent bit {bit}; "
      f"decision {zero_rate_detect(bit, u6, p_v0, 0.2)} on a matching block")

# ---------------------------------------------------------------------------
# 3. Monte Carlo trials vs the exact oracle
# ---------------------------------------------------------------------------
cfg = SchemeConfig(scheme="zero_rate", delta=0.15)
n = 6
stats = run_trials(cfg, zr, n, trials=100_000, seed=5)
model = zero_rate_model(p_u0, n, cfg.delta)


def accepts(label, vblock):
    if label != "typical":
        return False
    freq = np.bincount(np.asarray(vblock), minlength=2) / n
    return bool(np.abs(freq - p_v0.probs).max() <= cfg.delta + 1e-15)


alpha, beta = exact_error_probabilities(model, accepts, zr, n)
print(f"\nn={n}, 1e5 trials:")
print(f"alpha: exact {alpha:.5f}  estimate {stats.alpha_hat:.5f}  "
      f"95% CI {stats.alpha_interval}")
print(f"beta:  exact {beta:.5f}  estimate {stats.beta_hat:.5f}  "
      f"95% CI {stats.beta_interval}")

kstar = zero_rate_exponent(p_u0, p_v0, zr.q.marginal(("U", "V")))
print(f"finite-n exponent -log(beta)/n = {-math.log(beta) / n:.4f} nats; "
      f"single-letter limit {kstar:.4f} nats")
