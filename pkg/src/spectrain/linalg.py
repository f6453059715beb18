"""Dense linear-algebra and Fourier primitives.

Thin validated wrappers around LAPACK/FFT routines (via numpy).  Matrices are
row-major ``float64``/``complex128`` arrays; returned basis matrices have
orthonormal columns and singular values come back in descending order.  All
functions are pure and thread-safe.
"""

import numpy as np

from .errors import InvalidInput, NumericalFailure

# Fixed solver tolerances; chosen so DMD residuals downstream are dominated
# by data, not solver noise.
SVD_RTOL = 1e-10
EIG_RTOL = 1e-8


def _as_finite_array(M, dtype=None):
    A = np.asarray(M, dtype=dtype)
    if A.size == 0:
        raise InvalidInput("empty input")
    if not np.all(np.isfinite(A)):
        raise InvalidInput("input contains non-finite entries")
    return A


def svd(M):
    """Economy SVD of a real matrix.

    Returns ``(U, s, V)`` with ``M = U @ diag(s) @ V.T``, ``U`` and ``V``
    column-orthonormal and ``s`` nonnegative descending.

    Raises InvalidInput on empty/non-finite input, NumericalFailure if the
    underlying iteration does not converge.
    """
    A = _as_finite_array(M, dtype=np.float64)
    if A.ndim != 2:
        raise InvalidInput("svd expects a 2-D matrix")
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as e:
        raise NumericalFailure(f"SVD did not converge: {e}") from e
    return U, s, Vt.T


def eig(M):
    """Eigendecomposition of a square (possibly complex) matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvectors as unit-norm
    columns satisfying ``M v = lambda v`` to within ``EIG_RTOL * ||M||``.
    """
    A = _as_finite_array(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInput("eig expects a square matrix")
    try:
        w, V = np.linalg.eig(A)
    except np.linalg.LinAlgError as e:
        raise NumericalFailure(f"eigendecomposition did not converge: {e}") from e
    norms = np.linalg.norm(V, axis=0)
    norms[norms == 0] = 1.0
    return w, V / norms


def dft(x):
    """Discrete Fourier transform, spectrum[k] = sum_n x[n] e^{-2*pi*i*k*n/N}."""
    v = np.asarray(x)
    if v.ndim != 1 or v.size == 0:
        raise InvalidInput("dft expects a nonempty 1-D sequence")
    if not np.all(np.isfinite(v)):
        raise InvalidInput("input contains non-finite entries")
    return np.fft.fft(v)


def idft(X):
    """Inverse of :func:`dft`; round-trips within 1e-10 relative."""
    v = np.asarray(X)
    if v.ndim != 1 or v.size == 0:
        raise InvalidInput("idft expects a nonempty 1-D sequence")
    return np.fft.ifft(v)
