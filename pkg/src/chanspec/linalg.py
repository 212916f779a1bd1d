"""Dense linear-algebra kernel for small complex matrices and spectrum multisets.

Everything in this module is plumbing shared by the channel, qubit, classical
and synthesis layers.  Matrices are plain numpy arrays, row-major, validated at
the boundary; spectra are :class:`SpectrumMultiset` values.  Dimensions stay
small (superoperators up to about 100 x 100), so dense LAPACK routines are used
throughout and the only place convergence can fail surfaces as
:class:`~chanspec.errors.NumericalError`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import NumericalError

# Tolerance ladder.  Producers are one decade tighter than consumers.
HERMITICITY_TOL = 1e-10
SPECTRUM_MATCH_TOL = 1e-8
PSD_MARGIN_TOL = 1e-9


def as_matrix(a, *, square: bool = False, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite complex 2-d array, optionally enforcing squareness."""
    arr = np.array(a, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    if square and arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr


def as_complex_values(values, *, name: str = "values") -> tuple[complex, ...]:
    vals = tuple(complex(v) for v in values)
    for v in vals:
        if not (np.isfinite(v.real) and np.isfinite(v.imag)):
            raise ValueError(f"{name} contains non-finite entries")
    return vals


@dataclass(frozen=True)
class SpectrumMultiset:
    """Unordered collection of complex eigenvalues, multiplicities included."""

    values: tuple[complex, ...]
    tol: float = SPECTRUM_MATCH_TOL

    def __post_init__(self):
        object.__setattr__(self, "values", as_complex_values(self.values))
        if self.tol <= 0:
            raise ValueError("tol must be positive")

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def moment(self, k: int) -> complex:
        """Power sum sum_i lambda_i**k."""
        return complex(sum(v**k for v in self.values))

    def spectral_radius(self) -> float:
        return max(abs(v) for v in self.values)

    def conjugation_closed(self, tol: float | None = None) -> bool:
        """True iff the multiset is invariant under complex conjugation."""
        conj = tuple(v.conjugate() for v in self.values)
        return multiset_match(self.values, conj, tol or self.tol).matched

    def contains(self, value: complex, tol: float | None = None) -> bool:
        t = self.tol if tol is None else tol
        return any(abs(v - value) <= t for v in self.values)

    def remove_one(self, value: complex, tol: float | None = None) -> "SpectrumMultiset":
        """Drop the single occurrence closest to ``value`` (must be within tol)."""
        t = self.tol if tol is None else tol
        if not self.values:
            raise ValueError("multiset is empty")
        idx = min(range(len(self.values)), key=lambda i: abs(self.values[i] - value))
        if abs(self.values[idx] - value) > t:
            raise ValueError(f"no element within {t} of {value}")
        rest = self.values[:idx] + self.values[idx + 1 :]
        return SpectrumMultiset(rest, self.tol)

    def sorted_values(self) -> tuple[complex, ...]:
        """Deterministic display order: modulus desc, then real desc, then imag."""
        return tuple(sorted(self.values, key=lambda z: (-abs(z), -z.real, z.imag)))

    def nonzero(self, tol: float | None = None) -> "SpectrumMultiset":
        t = self.tol if tol is None else tol
        return SpectrumMultiset(tuple(v for v in self.values if abs(v) > t), self.tol)


@dataclass(frozen=True)
class MatchResult:
    """Outcome of a minimum-cost pairing between two multisets."""

    matched: bool
    max_cost: float
    pairing: tuple[tuple[int, int], ...]

    def __bool__(self) -> bool:
        return self.matched


def multiset_match(a, b, tol: float = SPECTRUM_MATCH_TOL) -> MatchResult:
    """Pair two multisets by Hungarian assignment on |a_i - b_j|.

    Matches iff sizes agree and the worst paired distance is at most ``tol``.
    """
    va = as_complex_values(a, name="a")
    vb = as_complex_values(b, name="b")
    if len(va) != len(vb):
        return MatchResult(False, float("inf"), ())
    if not va:
        return MatchResult(True, 0.0, ())
    cost = np.abs(np.subtract.outer(np.array(va), np.array(vb)))
    rows, cols = linear_sum_assignment(cost)
    worst = float(cost[rows, cols].max())
    pairing = tuple(zip(rows.tolist(), cols.tolist()))
    return MatchResult(worst <= tol, worst, pairing)


def eig_multiset(a, tol: float = SPECTRUM_MATCH_TOL) -> SpectrumMultiset:
    """Eigenvalues of a general square matrix as a multiset.

    Backed by LAPACK's Hessenberg + shifted-QR driver; non-convergence is the
    only failure mode and raises :class:`NumericalError`.
    """
    arr = as_matrix(a, square=True)
    try:
        vals = np.linalg.eigvals(arr)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration did not converge: {exc}") from exc
    return SpectrumMultiset(tuple(vals.tolist()), tol)


def herm_eigensystem(h, tol: float = HERMITICITY_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors of a Hermitian matrix.

    The input must be Hermitian within ``tol`` (relative to its norm); the
    Hermitian average is diagonalized so the output is exactly real-spectral.
    """
    arr = as_matrix(h, square=True, name="H")
    scale = max(1.0, float(np.linalg.norm(arr)))
    defect = float(np.linalg.norm(arr - arr.conj().T))
    if defect > tol * scale:
        raise ValueError(f"matrix is not Hermitian within tolerance ({defect:.3e})")
    try:
        w, v = np.linalg.eigh((arr + arr.conj().T) / 2.0)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Hermitian eigensolver did not converge: {exc}") from exc
    return w, v


@dataclass(frozen=True)
class LeastSquaresSolution:
    x: np.ndarray
    residual_norm: float
    rank: int
    rank_deficient: bool


def least_squares(a, b) -> LeastSquaresSolution:
    """Minimum-norm least-squares solution of an overdetermined system.

    Requires rows >= cols.  Rank deficiency is not an error: the minimum-norm
    solution is returned with ``rank_deficient`` set.
    """
    arr = as_matrix(a, name="A")
    rhs = np.atleast_1d(np.asarray(b, dtype=complex))
    if rhs.ndim != 1 or rhs.shape[0] != arr.shape[0]:
        raise ValueError("b must be a vector with one entry per row of A")
    if arr.shape[0] < arr.shape[1]:
        raise ValueError(f"need rows >= cols, got shape {arr.shape}")
    x, _, rank, _ = np.linalg.lstsq(arr, rhs, rcond=None)
    residual = float(np.linalg.norm(arr @ x - rhs))
    return LeastSquaresSolution(x, residual, int(rank), int(rank) < arr.shape[1])


def symmetrize_conjugates(values, tol: float = SPECTRUM_MATCH_TOL) -> tuple[complex, ...]:
    """Snap a conjugation-closed multiset to exact closure.

    Near-real values are projected onto the axis; the rest are paired with
    their closest conjugate partner and averaged.  Raises ``ValueError`` when
    no pairing within ``tol`` exists.
    """
    vals = as_complex_values(values)
    reals = [complex(v.real) for v in vals if abs(v.imag) <= tol]
    upper = sorted((v for v in vals if v.imag > tol), key=lambda z: (z.real, z.imag))
    lower = sorted((v for v in vals if v.imag < -tol), key=lambda z: (z.real, -z.imag))
    if len(upper) != len(lower):
        raise ValueError("multiset is not closed under conjugation")
    out = list(reals)
    remaining = list(lower)
    for z in upper:
        j = min(range(len(remaining)), key=lambda i: abs(z - remaining[i].conjugate()))
        partner = remaining.pop(j)
        if abs(z - partner.conjugate()) > 2 * tol:
            raise ValueError("multiset is not closed under conjugation")
        avg = (z + partner.conjugate()) / 2.0
        out.extend([avg, avg.conjugate()])
    return tuple(out)


def companion_matrix(coeffs) -> np.ndarray:
    """Companion matrix of a monic polynomial given np.poly-style coefficients.

    ``coeffs = [1, a1, ..., an]`` encodes x^n + a1 x^(n-1) + ... + an.  The
    layout has ones on the subdiagonal and ``-a`` (reversed) in the last
    column, so its characteristic polynomial is the input.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.ndim != 1 or c.shape[0] < 2:
        raise ValueError("need at least a degree-1 polynomial")
    if abs(c[0] - 1.0) > 1e-12:
        raise ValueError("polynomial must be monic")
    n = c.shape[0] - 1
    m = np.zeros((n, n), dtype=complex)
    for i in range(1, n):
        m[i, i - 1] = 1.0
    m[:, n - 1] = -c[1:][::-1]
    return m
