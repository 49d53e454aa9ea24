"""Shared helpers: seeded random instances at desk scale."""

import numpy as np
import pytest

from htpriv.probcore import Channel, JointPmf, Pmf

MASTER_SEED = 20240811
PROPERTY_CASES = 100


@pytest.fixture
def rng():
    return np.random.default_rng(MASTER_SEED)


def random_pmf(rng, size) -> Pmf:
    t = rng.gamma(1.0, 1.0, size=size)
    return Pmf(t / t.sum())


def random_joint(rng, shape, names=None) -> JointPmf:
    t = rng.gamma(1.0, 1.0, size=shape)
    t /= t.sum()
    names = names or tuple("ABCDEFG"[: len(shape)])
    return JointPmf(tuple(zip(names, shape)), t)


def random_channel(rng, nin, nout) -> Channel:
    rows = rng.gamma(1.0, 1.0, size=(nin, nout))
    rows /= rows.sum(axis=1, keepdims=True)
    return Channel(rows)


def random_suv_joint(rng, ns=2, nu=2, nv=2) -> JointPmf:
    return random_joint(rng, (ns, nu, nv), names=("S", "U", "V"))
