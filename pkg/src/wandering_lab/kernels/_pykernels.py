"""Pure numpy implementations of the hot kernels.

These are the reference versions; the compiled module ``_ckernels`` must
agree with them to rounding.
"""

import numpy as np


def green_escape(coeffs, zs, max_iter, bailout):
    """Escape-time Green's function for a polynomial.

    Parameters
    ----------
    coeffs : complex array, ascending order ``c0 + c1 z + ... + cd z^d``
    zs : complex array of starting points (any shape)
    max_iter : iteration cap
    bailout : modulus past which the orbit is declared escaped

    Returns
    -------
    green : float array, ``d^-k (log|z_k| + log|a_d|/(d-1))`` at escape, 0 otherwise
    iters : int array, iterations used
    escaped : bool array
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    z = np.array(zs, dtype=complex, copy=True)
    shape = z.shape
    z = z.ravel()
    d = len(coeffs) - 1
    shift = np.log(abs(coeffs[-1])) / (d - 1)

    green = np.zeros(z.shape, dtype=float)
    iters = np.full(z.shape, max_iter, dtype=np.int64)
    escaped = np.zeros(z.shape, dtype=bool)
    active = np.arange(z.size)
    scale = 1.0
    for k in range(max_iter + 1):
        if active.size == 0:
            break
        za = z[active]
        out = np.abs(za) > bailout
        if out.any():
            idx = active[out]
            green[idx] = (np.log(np.abs(za[out])) + shift) * scale
            iters[idx] = k
            escaped[idx] = True
            active = active[~out]
            za = za[~out]
        if k == max_iter or active.size == 0:
            break
        acc = np.full(za.shape, coeffs[-1])
        for c in coeffs[-2::-1]:
            acc = acc * za + c
        z[active] = acc
        scale /= d
    return green.reshape(shape), iters.reshape(shape), escaped.reshape(shape)


def blaschke_eval(zeros, phase, zs):
    """Evaluate ``phase * prod (z - a) / (1 - conj(a) z)`` at every point of ``zs``."""
    zs = np.asarray(zs, dtype=complex)
    out = np.full(zs.shape, complex(phase))
    for a in np.asarray(zeros, dtype=complex):
        out = out * ((zs - a) / (1.0 - np.conj(a) * zs))
    return out
