"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The only operation that dominates Monte Carlo runtime is the shot-noise
reduction: for every message in a batch, sum ``gain * radius^(-alpha)`` over
its Poisson number of interferers.  Both backends consume the same
pre-drawn random arrays, so switching backend never changes the random
stream.

Backend selection happens once at import time:

* default: numba ``@njit`` kernel (compiled lazily, cached on disk);
* ``PPTO_NO_NUMBA=1`` in the environment, or numba missing, selects the
  vectorized numpy path.

``benchmarks/bench_kernels.py`` times the two implementations side by side.
"""

import os

import numpy as np

__all__ = ["BACKEND", "interference_sums", "interference_sums_numpy"]

_FORCE_NUMPY = os.environ.get("PPTO_NO_NUMBA", "").strip() not in ("", "0")


def interference_sums_numpy(counts, u, e, window_radius, alpha):
    """Per-message interference power, vectorized numpy implementation.

    counts : (n,) int array, interferers per message
    u      : (sum(counts),) uniforms; radius_i = window_radius * sqrt(u_i),
             the uniform-on-disk radial inverse CDF
    e      : (sum(counts),) unit-mean exponential fading gains
    """
    n = counts.shape[0]
    if u.shape[0] == 0:
        return np.zeros(n)
    if alpha == 4.0:
        # r^-4 = R^-4 / u^2; avoids a libm pow per element
        w = u * u
        np.divide(window_radius ** -4.0, w, out=w)
        w *= e
    else:
        w = u ** (-0.5 * alpha)
        w *= window_radius ** -alpha
        w *= e
    starts = np.zeros(n, dtype=np.int64)
    np.cumsum(counts[:-1], out=starts[1:])
    # reduceat yields w[start] for empty segments; zero them afterwards
    out = np.add.reduceat(w, np.minimum(starts, w.shape[0] - 1))
    out[counts == 0] = 0.0
    return out


try:  # pragma: no cover - exercised through the public alias
    if _FORCE_NUMPY:
        raise ImportError("numpy backend forced via PPTO_NO_NUMBA")
    from numba import njit

    @njit(cache=True, nogil=True)
    def _interference_sums_numba(counts, u, e, window_radius, alpha):
        n = counts.shape[0]
        out = np.empty(n)
        pos = 0
        if alpha == 4.0:
            c = window_radius ** -4.0
            for j in range(n):
                acc = 0.0
                for _ in range(counts[j]):
                    acc += e[pos] * (c / (u[pos] * u[pos]))
                    pos += 1
                out[j] = acc
        else:
            c = window_radius ** -alpha
            p = -0.5 * alpha
            for j in range(n):
                acc = 0.0
                for _ in range(counts[j]):
                    acc += e[pos] * (c * u[pos] ** p)
                    pos += 1
                out[j] = acc
        return out

    interference_sums = _interference_sums_numba
    BACKEND = "numba"
except ImportError:
    _interference_sums_numba = None
    interference_sums = interference_sums_numpy
    BACKEND = "numpy"
