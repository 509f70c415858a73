"""Central finite-difference oracle shared by the gradient tests."""
import numpy as np

from blindai.tensor import backward, no_grad

REL_TOL = 1e-4
ABS_FLOOR = 1e-6
STEP = 1e-6  # small enough that bias probes rarely straddle a ReLU kink


def finite_difference_check(loss_fn, tensors, max_entries=12, seed=0, h=STEP):
    """Compare analytic gradients with central differences.

    ``loss_fn`` rebuilds a scalar loss from the current tensor values. For
    tensors with more than ``max_entries`` elements a random subset is
    probed. Returns the worst ``|analytic - numeric| / max(|numeric|, floor)``
    scaled so that <= 1 means within tolerance.
    """
    rng = np.random.default_rng(seed)
    for t in tensors:
        t.grad = None
    backward(loss_fn(), tensors)
    analytic = [t.grad.copy() for t in tensors]
    worst = 0.0
    for t, g in zip(tensors, analytic):
        flat = t.data.reshape(-1)
        n = flat.size
        idx = np.arange(n) if n <= max_entries else rng.choice(n, max_entries, replace=False)
        for i in idx:
            orig = flat[i]
            with no_grad():
                flat[i] = orig + h
                fp = loss_fn().item()
                flat[i] = orig - h
                fm = loss_fn().item()
            flat[i] = orig
            num = (fp - fm) / (2 * h)
            a = g.reshape(-1)[i]
            err = abs(a - num)
            allowed = max(REL_TOL * abs(num), ABS_FLOOR)
            worst = max(worst, err / allowed)
    return worst
