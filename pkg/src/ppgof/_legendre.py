"""Normalized shifted Legendre polynomials on [0, 1].

The system p_1, p_2, ... is orthonormal in L2[0,1] with p_1 identically 1:
p_k(s) = sqrt(2k-1) * P_{k-1}(2s-1), with P_j the standard Legendre
polynomial of degree j.  Antiderivatives are closed-form, which keeps
compensator integrals of the embedding family exact.
"""

import numpy as np
from scipy.special import eval_legendre


def basis(m, s):
    """Evaluate p_1..p_m at points s in [0,1]; returns shape (m, len(s))."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    x = 2.0 * s - 1.0
    out = np.empty((m, s.size))
    for k in range(1, m + 1):
        out[k - 1] = np.sqrt(2.0 * k - 1.0) * eval_legendre(k - 1, x)
    return out


def basis_integral(m, s):
    """Evaluate the antiderivatives int_0^s p_k(u) du, shape (m, len(s)).

    Uses (2j+1) int P_j = P_{j+1} - P_{j-1}; every component with k >= 2
    integrates to zero over [0,1].
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    x = 2.0 * s - 1.0
    out = np.empty((m, s.size))
    out[0] = s
    for k in range(2, m + 1):
        upper = eval_legendre(k, x) - eval_legendre(k - 2, x)
        out[k - 1] = np.sqrt(2.0 * k - 1.0) * upper / (2.0 * (2.0 * k - 1.0))
    return out
