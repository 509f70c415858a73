"""The BLINDAI_DISABLE_JIT=1 path must reproduce the compiled kernels."""
import json
import os
import subprocess
import sys
import textwrap

import numpy as np

from blindai._jit import JIT_ENABLED

PROBE = textwrap.dedent("""
    import json
    import numpy as np
    from blindai import dsp
    from blindai._jit import JIT_ENABLED
    from blindai.arena import default_actions, reset
    from blindai.arena import kernel as K
    from blindai.tensor import Tensor, AdamState, adam_step

    rng = np.random.default_rng(0)
    table = default_actions().table
    out = {"jit": JIT_ENABLED}
    x = rng.standard_normal((3, 256))
    X = dsp.fft_rows(x, 256)
    out["fft"] = np.concatenate([X.real.ravel(), X.imag.ravel()]).tolist()
    s = reset(3).data
    ev = np.zeros((K.MAX_EVENTS, 3), dtype=np.int64)
    hp = K.run_frames(s, table, rng.integers(0, 40, 900), rng.integers(0, 40, 900), ev)
    out["hp"] = hp.tolist()
    out["state"] = s.tolist()
    out["mcts"] = int(K.mcts_search(reset(0).data, table, 1, 40, 30, 2, 7, 1.0, 50.0))
    p = Tensor(rng.standard_normal(50), requires_grad=True)
    st = AdamState()
    for _ in range(3):
        p.grad = rng.standard_normal(50)
        adam_step([p], st)
    out["adam"] = p.data.tolist()
    print(json.dumps(out))
""")


def probe(disable: bool) -> dict:
    env = dict(os.environ, BLINDAI_DISABLE_JIT="1" if disable else "0")
    res = subprocess.run([sys.executable, "-c", PROBE], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def test_fallback_matches_compiled():
    fast, slow = probe(False), probe(True)
    assert fast["jit"] == JIT_ENABLED and slow["jit"] is False
    np.testing.assert_allclose(fast["fft"], slow["fft"], rtol=0, atol=1e-9)
    assert fast["hp"] == slow["hp"] and fast["state"] == slow["state"]
    assert fast["mcts"] == slow["mcts"]
    np.testing.assert_allclose(fast["adam"], slow["adam"], rtol=1e-13, atol=0)
