"""Derived integer seeds, so each round/trial/stream is reproducible on its own."""
import numpy as np


def derive_seed(base: int, *keys: int) -> int:
    ss = np.random.SeedSequence([int(base) & 0xFFFFFFFFFFFFFFFF, *(int(k) for k in keys)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def derive_rng(base: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(base, *keys))
