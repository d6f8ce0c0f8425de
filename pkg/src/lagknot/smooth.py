"""C-infinity cutoff functions used to build profiles and curves."""

import numpy as np

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


def _flat(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def smoothstep(x):
    """Smooth monotone step: 0 for x <= 0, 1 for x >= 1, flat to all orders at both ends."""
    x = np.asarray(x, dtype=float)
    a = _flat(x)
    b = _flat(1.0 - x)
    out = a / (a + b)
    return out if out.ndim else float(out)


def integrated_smoothstep(x):
    """Return the integral of `smoothstep` from 0 to x (x clipped to [0, 1] plus a linear tail).

    For x >= 1 the value is x - 1/2, since the step integrates to 1/2 over [0, 1].
    """
    x = np.asarray(x, dtype=float)
    xc = np.clip(x, 0.0, 1.0)
    half = 0.5 * xc[..., None]
    nodes = half * (1.0 + _GL_NODES)
    inner = (half[..., 0] * (smoothstep(nodes) * _GL_WEIGHTS).sum(axis=-1))
    out = inner + np.maximum(x - 1.0, 0.0)
    return out if out.ndim else float(out)


def bump(x):
    """Smooth bump supported on (0, 1), normalised to peak value 1 at x = 1/2."""
    x = np.asarray(x, dtype=float)
    out = _flat(x) * _flat(1.0 - x) / np.exp(-4.0)
    return out if out.ndim else float(out)
