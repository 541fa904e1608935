"""Random test objects shared by the test modules."""

import numpy as np
from hypothesis import strategies as st


def orthonormal(gen, s, t):
    q, r = np.linalg.qr(gen.standard_normal((s, t)))
    return q * np.sign(np.diag(r))


def orthogonal(gen, k):
    return orthonormal(gen, k, k)


def complement(alpha):
    """Orthonormal basis of the orthogonal complement of the column span of alpha."""
    N, n = alpha.shape
    u, _, _ = np.linalg.svd(alpha, full_matrices=True)
    return u[:, n:]


def noisy_point(gen, alpha, k, eps):
    N, n = alpha.shape
    x = orthonormal(gen, n, k)
    g = gen.standard_normal((N, k))
    a = alpha @ x + eps * g / np.linalg.norm(g)
    u, _, vt = np.linalg.svd(a, full_matrices=False)
    return u @ vt


@st.composite
def dims(draw, max_N=12):
    N = draw(st.integers(1, max_N))
    n = draw(st.integers(1, N))
    k = draw(st.integers(1, n))
    return N, n, k


seeds = st.integers(0, 2**32 - 1)
