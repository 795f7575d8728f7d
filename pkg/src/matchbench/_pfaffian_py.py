"""Pure-numpy Pfaffian kernels (fallback when the compiled core is unavailable)."""

import numpy as np


def pfaffian_ltl(a):
    """Pfaffian of an antisymmetric matrix by Parlett-Reid reduction.

    ``a`` is overwritten. Partial pivoting on the sub-diagonal column keeps the
    multipliers bounded by one; each row/column swap flips the sign.
    """
    n = a.shape[0]
    if n % 2:
        return a.dtype.type(0)
    pf = a.dtype.type(1)
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if kp != k + 1:
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            pf = -pf
        piv = a[k, k + 1]
        if piv == 0:
            return a.dtype.type(0)
        pf = pf * piv
        if k + 2 < n:
            tau = a[k, k + 2:] / piv
            col = a[k + 2:, k + 1]
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return pf


def pfaffian_batch(stack):
    """Pfaffians of a ``(m, d, d)`` stack; the stack is overwritten."""
    return np.array([pfaffian_ltl(stack[i]) for i in range(stack.shape[0])],
                    dtype=stack.dtype)
