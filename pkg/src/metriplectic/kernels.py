"""Hot pointwise and stencil kernels.

Each kernel exists twice: a numba ``@njit`` loop and a pure-numpy fallback
performing the same floating point operations in the same order, so both
paths agree bitwise. The numba path is used when numba imports and the
environment variable ``METRIPLECTIC_DISABLE_NUMBA`` is unset (or "0").

All kernels operate on 3-d arrays; callers pad missing axes with length 1.
"""

import os

import numpy as np

_flag = os.environ.get("METRIPLECTIC_DISABLE_NUMBA", "0").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError("numba disabled by METRIPLECTIC_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


# --- numpy reference path ----------------------------------------------------


def diff3_numpy(f, axis, c):
    return (np.roll(f, -1, axis) - np.roll(f, 1, axis)) * c


def strain_pair_numpy(a, b, eta, bulk):
    """Bitwise-symmetric density ``2 eta S_a:S_b + bulk tr(a) tr(b)``.

    ``a`` and ``b`` have shape (3, 3, n); ``eta`` and ``bulk`` shape (n,).
    """
    acc = np.zeros(a.shape[2])
    for i in range(3):
        for k in range(3):
            sa = 0.5 * (a[i, k] + a[k, i])
            sb = 0.5 * (b[i, k] + b[k, i])
            acc = acc + sa * sb
    tra = (a[0, 0] + a[1, 1]) + a[2, 2]
    trb = (b[0, 0] + b[1, 1]) + b[2, 2]
    return (2.0 * eta) * acc + bulk * (tra * trb)


def lambda_apply_numpy(b, eta, bulk, scale):
    """``scale * (2 eta sym(b) + bulk tr(b) I)``; result is exactly symmetric."""
    out = np.empty_like(b)
    trb = (b[0, 0] + b[1, 1]) + b[2, 2]
    for i in range(3):
        for k in range(i, 3):
            sb = 0.5 * (b[i, k] + b[k, i])
            val = 2.0 * eta * sb
            if i == k:
                val = val + bulk * trb
            val = scale * val
            out[i, k] = val
            out[k, i] = val
    return out


# --- numba path --------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def diff3_numba(f, axis, c):
        nx, ny, nz = f.shape
        out = np.empty_like(f)
        if axis == 0:
            for i in range(nx):
                ip = i + 1 if i + 1 < nx else 0
                im = i - 1 if i > 0 else nx - 1
                for j in range(ny):
                    for k in range(nz):
                        out[i, j, k] = (f[ip, j, k] - f[im, j, k]) * c
        elif axis == 1:
            for i in range(nx):
                for j in range(ny):
                    jp = j + 1 if j + 1 < ny else 0
                    jm = j - 1 if j > 0 else ny - 1
                    for k in range(nz):
                        out[i, j, k] = (f[i, jp, k] - f[i, jm, k]) * c
        else:
            for i in range(nx):
                for j in range(ny):
                    for k in range(nz):
                        kp = k + 1 if k + 1 < nz else 0
                        km = k - 1 if k > 0 else nz - 1
                        out[i, j, k] = (f[i, j, kp] - f[i, j, km]) * c
        return out

    @njit(cache=True)
    def strain_pair_numba(a, b, eta, bulk):
        n = a.shape[2]
        out = np.empty(n)
        for p in range(n):
            acc = 0.0
            for i in range(3):
                for k in range(3):
                    sa = 0.5 * (a[i, k, p] + a[k, i, p])
                    sb = 0.5 * (b[i, k, p] + b[k, i, p])
                    acc = acc + sa * sb
            tra = (a[0, 0, p] + a[1, 1, p]) + a[2, 2, p]
            trb = (b[0, 0, p] + b[1, 1, p]) + b[2, 2, p]
            out[p] = (2.0 * eta[p]) * acc + bulk[p] * (tra * trb)
        return out

    @njit(cache=True)
    def lambda_apply_numba(b, eta, bulk, scale):
        n = b.shape[2]
        out = np.empty_like(b)
        for p in range(n):
            trb = (b[0, 0, p] + b[1, 1, p]) + b[2, 2, p]
            for i in range(3):
                for k in range(i, 3):
                    sb = 0.5 * (b[i, k, p] + b[k, i, p])
                    val = 2.0 * eta[p] * sb
                    if i == k:
                        val = val + bulk[p] * trb
                    val = scale[p] * val
                    out[i, k, p] = val
                    out[k, i, p] = val
        return out

    diff3 = diff3_numba
    strain_pair = strain_pair_numba
    lambda_apply = lambda_apply_numba
else:
    diff3 = diff3_numpy
    strain_pair = strain_pair_numpy
    lambda_apply = lambda_apply_numpy
