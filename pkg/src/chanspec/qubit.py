"""Qubit maps in the Pauli transfer picture and the spectral tetrahedron test.

A Hermiticity-preserving trace-preserving map on M_2 acts on Bloch vectors as
``x -> v + Delta x``; its Pauli transfer matrix is ``[[1, 0], [v, Delta]]``
with entries ``tr(sigma_i T(sigma_j)) / 2``.  The spectrum is ``{1} cup
spec(Delta)``, and a spectrum ``{1, l1, l2, l3}`` belongs to a channel iff the
signature vector s (real eigenvalues kept, conjugate pairs replaced by their
modulus, twice) lies in the tetrahedron with corners ``(1,1,1), (1,-1,-1),
(-1,1,-1), (-1,-1,1)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Channel, verify
from .errors import InfeasibleError, NumericalError
from .linalg import (
    PSD_MARGIN_TOL,
    SPECTRUM_MATCH_TOL,
    SpectrumMultiset,
    as_complex_values,
    herm_eigensystem,
    multiset_match,
)

REAL_AXIS_TOL = 1e-9
TETRA_TOL = 1e-12
POSITIVITY_TOL = 1e-10

SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
for _s in SIGMA:
    _s.setflags(write=False)

# unitary basis change between matrix units and normalized Paulis
_U = np.column_stack([s.reshape(-1) for s in SIGMA]) / np.sqrt(2.0)


@dataclass(frozen=True)
class PauliRep:
    """Affine Bloch action: shift ``v`` (3,) and linear part ``delta`` (3, 3)."""

    v: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        v = np.array(self.v, dtype=float).reshape(3)
        delta = np.array(self.delta, dtype=float)
        if delta.shape != (3, 3):
            raise ValueError("delta must be 3 x 3")
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(delta))):
            raise ValueError("non-finite Pauli representation")
        v.setflags(write=False)
        delta.setflags(write=False)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "delta", delta)

    def transfer_matrix(self) -> np.ndarray:
        t = np.zeros((4, 4))
        t[0, 0] = 1.0
        t[1:, 0] = self.v
        t[1:, 1:] = self.delta
        return t


def pauli_rep(channel: Channel, tol: float = 1e-9) -> PauliRep:
    """Pauli transfer form of a Hermiticity-preserving TP qubit map.

    Raises if the map is not a qubit map, if the transfer matrix has an
    imaginary part above ``tol``, or if its first row deviates from
    ``(1, 0, 0, 0)`` (not trace-preserving).
    """
    if channel.d != 2:
        raise ValueError("pauli_rep requires a qubit map")
    t = _U.conj().T @ channel.superop @ _U
    if float(np.abs(t.imag).max()) > tol:
        raise ValueError("transfer matrix has imaginary entries; map is not Hermiticity-preserving")
    t = t.real
    if float(np.abs(t[0] - np.array([1.0, 0, 0, 0])).max()) > tol:
        raise ValueError("first transfer row is not (1, 0, 0, 0); map is not trace-preserving")
    return PauliRep(v=t[1:, 0], delta=t[1:, 1:])


def from_pauli_rep(rep: PauliRep) -> Channel:
    """Channel with superoperator ``U [[1,0],[v,Delta]] U*`` in matrix units."""
    return Channel(2, superop=_U @ rep.transfer_matrix().astype(complex) @ _U.conj().T)


@dataclass(frozen=True)
class TetraPoint:
    """Membership report for a signature vector against the tetrahedron."""

    s: tuple[float, float, float]
    margins: tuple[float, float, float, float]
    member: bool


def tetra_membership(s, tol: float = TETRA_TOL) -> TetraPoint:
    """Facet margins of s in the tetrahedron; membership means all >= -tol."""
    s1, s2, s3 = (float(x) for x in s)
    margins = (
        1.0 + s1 + s2 + s3,
        1.0 + s1 - s2 - s3,
        1.0 - s1 + s2 - s3,
        1.0 - s1 - s2 + s3,
    )
    return TetraPoint((s1, s2, s3), margins, min(margins) >= -tol)


def _classify_triple(triple, match_tol: float, real_tol: float):
    """Split three eigenvalues into reals plus at most one conjugate pair.

    Returns (ordered values, signature s, reasons); ordered puts reals first
    so a rotation block can occupy slots 2-3.
    """
    reals = [z for z in triple if abs(z.imag) <= real_tol]
    complexes = [z for z in triple if abs(z.imag) > real_tol]
    if len(complexes) not in (0, 2):
        return None, None, ("not-conjugation-closed",)
    if len(complexes) == 2:
        a, b = complexes
        if abs(a - b.conjugate()) > match_tol:
            return None, None, ("not-conjugation-closed",)
        lam = a if a.imag > 0 else b
        ordered = [complex(reals[0].real), lam, lam.conjugate()]
        s = (reals[0].real, abs(lam), abs(lam))
    else:
        ordered = [complex(z.real) for z in triple]
        s = tuple(z.real for z in ordered)
    return ordered, s, ()


@dataclass(frozen=True)
class QubitSpectrumVerdict:
    realizable: bool
    reasons: tuple[str, ...]
    s: tuple[float, float, float] | None
    tetra: TetraPoint | None
    remaining: tuple[complex, ...]


def check_qubit_cp_spectrum(
    values,
    match_tol: float = SPECTRUM_MATCH_TOL,
    real_tol: float = REAL_AXIS_TOL,
) -> QubitSpectrumVerdict:
    """Decide whether a 4-element multiset is the spectrum of a qubit channel.

    Checks in order: an occurrence of 1 (removed; with a degenerate 1 the
    closest occurrence is taken, the rule is permutation symmetric), the
    remaining triple closed under conjugation, and the signature vector inside
    the tetrahedron.  Failure reasons accumulate in ``reasons``.
    """
    vals = as_complex_values(values)
    if len(vals) != 4:
        raise ValueError(f"qubit spectra have exactly 4 elements, got {len(vals)}")
    spectrum = SpectrumMultiset(vals, match_tol)
    if not spectrum.contains(1.0, match_tol):
        return QubitSpectrumVerdict(False, ("missing-one",), None, None, ())
    triple = spectrum.remove_one(1.0, match_tol).values
    ordered, s, reasons = _classify_triple(triple, match_tol, real_tol)
    if ordered is None:
        return QubitSpectrumVerdict(False, reasons, None, None, triple)
    point = tetra_membership(s)
    if not point.member:
        return QubitSpectrumVerdict(False, ("outside-tetrahedron",), s, point, tuple(ordered))
    return QubitSpectrumVerdict(True, (), s, point, tuple(ordered))


def _delta_from_triple(ordered) -> np.ndarray:
    """diag of reals, or diag(real) ++ rotation block for a conjugate pair."""
    if all(abs(z.imag) == 0.0 for z in ordered):
        return np.diag([z.real for z in ordered])
    lam = ordered[1]
    a, b = lam.real, lam.imag
    delta = np.zeros((3, 3))
    delta[0, 0] = ordered[0].real
    delta[1:, 1:] = np.array([[a, b], [-b, a]])
    return delta


def synth_qubit_channel(
    values,
    match_tol: float = SPECTRUM_MATCH_TOL,
    real_tol: float = REAL_AXIS_TOL,
) -> Channel:
    """Unital qubit channel with the requested 4-element spectrum.

    The construction is diagonal (all real) or has one rotation block
    (conjugate pair), with the real eigenvalue in slot 1.  Raises
    :class:`InfeasibleError` when the spectrum fails the tetrahedron test and
    :class:`NumericalError` if the built channel fails verification.
    """
    verdict = check_qubit_cp_spectrum(values, match_tol, real_tol)
    if not verdict.realizable:
        raise InfeasibleError(f"not a qubit channel spectrum: {', '.join(verdict.reasons)}")
    channel = from_pauli_rep(PauliRep(np.zeros(3), _delta_from_triple(verdict.remaining)))
    report = verify(channel)
    achieved = channel.spectrum()
    if report.cp_margin < -PSD_MARGIN_TOL or report.trace_preserving_error > 1e-9:
        raise NumericalError(
            f"constructed qubit map failed verification (cp_margin {report.cp_margin:.3e})"
        )
    if not multiset_match(achieved.values, values, match_tol).matched:
        raise NumericalError("constructed qubit map does not match the target spectrum")
    return channel


@dataclass(frozen=True)
class PositiveQubitResult:
    feasible: bool
    reasons: tuple[str, ...]
    channel: Channel | None


def check_and_synth_positive_qubit(
    values,
    match_tol: float = SPECTRUM_MATCH_TOL,
    real_tol: float = REAL_AXIS_TOL,
) -> PositiveQubitResult:
    """4-element spectra of positive (not necessarily CP) unital TP qubit maps.

    Feasible iff 1 occurs, the rest is conjugation closed, and every modulus
    is at most one; the witness is the same diagonal/rotation construction,
    double-checked through its operator norm.
    """
    vals = as_complex_values(values)
    if len(vals) != 4:
        raise ValueError(f"qubit spectra have exactly 4 elements, got {len(vals)}")
    spectrum = SpectrumMultiset(vals, match_tol)
    reasons = []
    if not spectrum.contains(1.0, match_tol):
        reasons.append("missing-one")
        return PositiveQubitResult(False, tuple(reasons), None)
    triple = spectrum.remove_one(1.0, match_tol).values
    ordered, _, cls_reasons = _classify_triple(triple, match_tol, real_tol)
    if ordered is None:
        return PositiveQubitResult(False, cls_reasons, None)
    if max(abs(z) for z in ordered) > 1.0 + 1e-12:
        return PositiveQubitResult(False, ("modulus-above-one",), None)
    delta = _delta_from_triple(ordered)
    opnorm = float(np.linalg.norm(delta, 2))
    if opnorm > 1.0 + 1e-9:
        raise NumericalError(f"positive construction has operator norm {opnorm}")
    return PositiveQubitResult(True, (), from_pauli_rep(PauliRep(np.zeros(3), delta)))


@dataclass(frozen=True)
class PositivityResult:
    positive: bool
    value: float
    maximizer: np.ndarray


def qubit_positivity(rep: PauliRep, tol: float = POSITIVITY_TOL, max_iter: int = 200) -> PositivityResult:
    """Positivity of the Bloch action: max_{|x|=1} |v + Delta x| <= 1.

    The sphere-constrained quadratic maximum is found through the secular
    equation on the Lagrange multiplier with safeguarded bisection, including
    the hard case where the gradient is orthogonal to the top eigenspace.
    For v = 0 this reduces to the largest singular value of Delta.
    """
    v = rep.v
    delta = rep.delta
    b = delta.T @ delta
    g = delta.T @ v
    w, q = herm_eigensystem(b)
    w = w.real
    gt = (q.T @ g).real
    lam_top = float(w[-1])
    top = w > lam_top - 1e-12
    g_top = float(np.linalg.norm(gt[top]))
    hard = g_top <= 1e-14
    geff = gt.copy()
    if hard:
        geff[top] = 0.0

    def phi(lam: float) -> float:
        return float(np.sum((geff / (lam - w)) ** 2)) - 1.0

    def finish(x_tilde: np.ndarray) -> PositivityResult:
        x = q @ x_tilde
        nx = float(np.linalg.norm(x))
        if nx > 0:
            x = x / nx
        value = float(np.linalg.norm(v + delta @ x))
        return PositivityResult(value <= 1.0 + tol, value, x)

    if hard:
        x_perp = np.where(top, 0.0, geff / np.where(top, 1.0, lam_top - w))
        norm_perp2 = float(np.sum(x_perp**2))
        if norm_perp2 <= 1.0 + 1e-14:
            # maximizer sits at lambda = lam_top with a free top-eigenspace part
            x_tilde = x_perp.copy()
            x_tilde[int(np.argmax(top))] += np.sqrt(max(0.0, 1.0 - norm_perp2))
            return finish(x_tilde)
        lo = lam_top
        hi = lam_top + np.sqrt(norm_perp2) * max(lam_top, 1.0)
        for _ in range(max_iter):
            if phi(hi) < 0.0:
                break
            hi = lam_top + 2.0 * (hi - lam_top)
        else:
            raise NumericalError("secular bracket search did not terminate")
    else:
        # phi(lo) > 0 since the top component alone contributes (2)^2
        lo = lam_top + g_top / 2.0
        hi = lam_top + float(np.linalg.norm(gt)) + 1.0
    converged = False
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if phi(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, abs(hi)):
            converged = True
            break
    if not converged:
        raise NumericalError("secular bisection did not converge within the iteration cap")
    lam = 0.5 * (lo + hi)
    return finish(geff / (lam - w))


def reduce_to_unital(channel: Channel) -> Channel:
    """Drop the Bloch shift: same Delta, v = 0.

    Complete positivity survives the reduction; if the input verifies CP and
    the output does not, something is numerically wrong and this raises.
    """
    rep = pauli_rep(channel)
    out = from_pauli_rep(PauliRep(np.zeros(3), rep.delta))
    in_margin = verify(channel).cp_margin
    out_margin = verify(out).cp_margin
    if in_margin >= -PSD_MARGIN_TOL and out_margin < in_margin - 1e-10:
        raise NumericalError(
            f"unital reduction lost complete positivity ({in_margin:.3e} -> {out_margin:.3e})"
        )
    return out
