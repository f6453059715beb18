"""Data-driven Koopman mode decomposition from snapshot sequences.

Given a snapshot matrix whose columns are successive states of a discrete
dynamical system, :func:`dmd_rrr` computes Ritz eigenvalues/eigenvectors of
the best-fit linear propagator restricted to the dominant SVD subspace,
together with a data-computable residual per eigenpair (no full operator is
ever formed).  Modes are unit 2-norm and the output is ordered by descending
absolute reconstruction coefficient, the coefficient being the least-squares
fit of the *first* snapshot onto the modes.
"""

import json
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateData, InvalidInput
from .linalg import eig, svd

DEFAULT_RANK_TOL = 1e-10
DEFAULT_DELAY = 10

# Leakage above this relative size in a real-part reconstruction means the
# selected index set was not conjugate-closed or the data is genuinely complex.
_REAL_LEAK_RTOL = 1e-6


@dataclass
class DmdResult:
    """Spectral decomposition of one snapshot sequence.

    eigenvalues[j], modes[:, j], coefficients[j] and residuals[j] describe
    the j-th eigenpair; entries are sorted by descending |coefficient|.
    ``rank`` is the retained SVD rank of the data matrix.
    """

    eigenvalues: np.ndarray
    modes: np.ndarray
    coefficients: np.ndarray
    residuals: np.ndarray
    rank: int

    def __len__(self):
        return self.eigenvalues.size


@dataclass
class ModeSelection:
    indices: list[int] = field(default_factory=list)
    clamped: bool = False


def delay_embed(series, depth=DEFAULT_DELAY):
    """Hankel-stack a scalar sequence: column t is (x_t, ..., x_{t+depth-1})."""
    x = np.asarray(series, dtype=np.float64).ravel()
    if depth < 1:
        raise InvalidInput("delay depth must be >= 1")
    if x.size < depth:
        raise InvalidInput(f"series of length {x.size} cannot be embedded at depth {depth}")
    cols = x.size - depth + 1
    out = np.empty((depth, cols))
    for i in range(depth):
        out[i] = x[i : i + cols]
    return out


def _validate_snapshots(snapshots):
    S = np.asarray(snapshots, dtype=np.float64)
    if S.ndim != 2:
        raise InvalidInput("snapshots must be a d x count matrix")
    if S.shape[1] < 3:
        raise InvalidInput("need at least 3 snapshots")
    if not np.all(np.isfinite(S)):
        raise InvalidInput("snapshots contain non-finite entries")
    return S


def dmd_rrr(snapshots, rank_tolerance=DEFAULT_RANK_TOL):
    """Rayleigh-quotient DMD with per-eigenpair data-driven residuals.

    Args:
        snapshots: d x m array, m >= 3, columns ordered in time.
        rank_tolerance: singular values with sigma_k/sigma_1 below this are
            truncated; must lie in [0, 1).

    Returns:
        DmdResult ordered by descending |coefficient|.

    Raises:
        InvalidInput: bad shapes or tolerance.
        DegenerateData: no rank survives truncation.
    """
    S = _validate_snapshots(snapshots)
    if not (0.0 <= rank_tolerance < 1.0):
        raise InvalidInput("rank_tolerance must be in [0, 1)")

    X = S[:, :-1]
    Y = S[:, 1:]

    U, s, V = svd(X)
    if s[0] == 0.0:
        raise DegenerateData("zero data matrix")
    keep = (s > 0.0) & (s / s[0] >= rank_tolerance) if rank_tolerance > 0 else (s > 0.0)
    r = int(np.count_nonzero(keep))
    if r == 0:
        raise DegenerateData("rank 0 after truncation")

    Ur = U[:, :r]
    sr = s[:r]
    Vr = V[:, :r]

    # Rayleigh quotient of the propagator on span(Ur); the full operator
    # Y V S^-1 U* is never assembled.
    B = Y @ (Vr / sr)           # = Y V_r S_r^{-1},  d x r
    A_tilde = Ur.T @ B          # r x r

    lam, W = eig(A_tilde)

    modes = Ur @ W              # Ritz vectors in state space
    norms = np.linalg.norm(modes, axis=0)
    norms[norms == 0] = 1.0
    modes = modes / norms

    # residual_j = ||Y v_j - lambda_j X v_j|| / ||X v_j||  with
    # v_j = V_r S_r^{-1} w_j, so X v_j = U_r w_j and Y v_j = B w_j.
    Xv = Ur @ W
    Yv = B @ W
    num = np.linalg.norm(Yv - Xv * lam[np.newaxis, :], axis=0)
    den = np.linalg.norm(Xv, axis=0)
    den[den == 0] = 1.0
    residuals = num / den

    coeffs, *_ = np.linalg.lstsq(modes, S[:, 0].astype(complex), rcond=None)

    order = np.argsort(-np.abs(coeffs), kind="stable")
    return DmdResult(
        eigenvalues=lam[order],
        modes=modes[:, order],
        coefficients=coeffs[order],
        residuals=residuals[order],
        rank=r,
    )


def conjugate_partner(result, j, rtol=1e-8):
    """Index of the mode conjugate to j, or None if j is (numerically) real."""
    lam = result.eigenvalues
    scale = max(np.abs(lam[j]), 1.0)
    if abs(lam[j].imag) <= rtol * scale:
        return None
    d = np.abs(lam - np.conj(lam[j]))
    k = int(np.argmin(d))
    if k != j and d[k] <= 10 * rtol * scale:
        return k
    return None


def _close_under_conjugation(result, indices):
    out = set(int(i) for i in indices)
    for i in list(out):
        p = conjugate_partner(result, i)
        if p is not None:
            out.add(p)
    return sorted(out)


def select_modes(result, policy):
    """Select mode indices by a ranking policy.

    ``policy`` is either ``{"top_k": k}`` or ``{"through_eigenvalue_one": True}``.
    The latter returns the prefix of the |coefficient|-descending order that
    ends at the eigenvalue nearest 1+0i.  Conjugate partners of selected
    modes are always included.  ``top_k`` beyond the mode count is clamped
    and flagged on the returned ModeSelection.
    """
    if len(result) == 0:
        raise InvalidInput("empty decomposition")
    if "top_k" in policy:
        k = int(policy["top_k"])
        if k < 0:
            raise InvalidInput("top_k must be >= 0")
        clamped = k > len(result)
        k = min(k, len(result))
        idx = list(range(k))
    elif policy.get("through_eigenvalue_one"):
        j_star = int(np.argmin(np.abs(result.eigenvalues - 1.0)))
        idx = list(range(j_star + 1))
        clamped = False
    else:
        raise InvalidInput(f"unknown selection policy: {policy!r}")
    return ModeSelection(indices=_close_under_conjugation(result, idx), clamped=clamped)


def reconstruct(result, mode_indices, t, real=False):
    """Evaluate sum_{k in indices} c_k lambda_k^t m_k at epoch t.

    Conjugate partners of the given indices are always summed as well.  With
    ``real=True`` the real part is returned; a warning is raised if the
    imaginary leakage exceeds 1e-6 relative (selection was not
    conjugate-closed or the underlying data is complex).
    """
    d = result.modes.shape[0]
    idx = list(mode_indices)
    if any(i < 0 or i >= len(result) for i in idx):
        raise InvalidInput("mode index out of range")
    idx = _close_under_conjugation(result, idx)
    out = np.zeros(d, dtype=complex)
    for k in idx:
        out += result.coefficients[k] * result.eigenvalues[k] ** t * result.modes[:, k]
    if not real:
        return out
    scale = np.linalg.norm(out)
    if scale > 0 and np.linalg.norm(out.imag) > _REAL_LEAK_RTOL * scale:
        warnings.warn(
            "real-part reconstruction discards significant imaginary content",
            RuntimeWarning,
            stacklevel=2,
        )
    return out.real


def result_to_json(result):
    """JSON-safe dict: eigenvalues/coefficients as [re, im] pairs."""
    return {
        "eigenvalues": [[z.real, z.imag] for z in result.eigenvalues],
        "coefficients": [[z.real, z.imag] for z in result.coefficients],
        "residuals": [float(r) for r in result.residuals],
        "rank": int(result.rank),
    }


def result_from_json(doc, modes=None):
    lam = np.array([complex(re, im) for re, im in doc["eigenvalues"]])
    coef = np.array([complex(re, im) for re, im in doc["coefficients"]])
    res = np.asarray(doc["residuals"], dtype=np.float64)
    if modes is None:
        modes = np.zeros((0, lam.size), dtype=complex)
    return DmdResult(lam, modes, coef, res, int(doc["rank"]))


def save_result(result, json_path, modes_path=None):
    with open(json_path, "w") as f:
        json.dump(result_to_json(result), f, indent=2)
    if modes_path is not None:
        write_matrix(modes_path, result.modes)


# Binary matrix container: header of three little-endian uint64
# (rows, cols, iscomplex), then row-major little-endian float64 payload
# (complex entries stored as adjacent re, im pairs).
_HEADER = struct.Struct("<QQQ")


def write_matrix(path, A):
    A = np.asarray(A)
    if A.ndim != 2:
        raise InvalidInput("write_matrix expects a 2-D array")
    iscomplex = np.iscomplexobj(A)
    payload = A.astype("<c16" if iscomplex else "<f8", copy=False)
    with open(path, "wb") as f:
        f.write(_HEADER.pack(A.shape[0], A.shape[1], int(iscomplex)))
        f.write(payload.tobytes(order="C"))


def read_matrix(path):
    from .errors import FormatError

    with open(path, "rb") as f:
        head = f.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise FormatError("truncated matrix header")
        rows, cols, iscomplex = _HEADER.unpack(head)
        dtype = np.dtype("<c16") if iscomplex else np.dtype("<f8")
        raw = f.read(rows * cols * dtype.itemsize)
        if len(raw) != rows * cols * dtype.itemsize:
            raise FormatError("truncated matrix payload")
    return np.frombuffer(raw, dtype=dtype).reshape(rows, cols).copy()
