"""JIT switch.

Hot kernels are decorated with :func:`njit`. Setting ``BLINDAI_DISABLE_JIT=1``
(or running without numba installed) leaves them as plain Python functions
operating on the same numpy arrays, which is slow but bit-identical.
"""
import os

JIT_ENABLED = os.environ.get("BLINDAI_DISABLE_JIT", "").lower() not in ("1", "true", "yes")

if JIT_ENABLED:
    try:
        import numba
    except ImportError:  # pragma: no cover
        JIT_ENABLED = False

if JIT_ENABLED:

    def njit(func=None, **kwargs):
        kwargs.setdefault("cache", True)
        if func is not None:
            return numba.njit(**kwargs)(func)
        return numba.njit(**kwargs)

else:

    def njit(func=None, **kwargs):
        if func is not None:
            return func

        def wrapper(f):
            return f

        return wrapper


def py_func(f):
    """Return the uncompiled Python body of a kernel (itself when JIT is off)."""
    return getattr(f, "py_func", f)
