"""Observable time series of channels and pole-based qubit realizability.

A series is a_t = tr(A^dagger T^t(rho)); its poles (roots of the minimal
linear recurrence) are a subset of the spectrum of any generating map, which
turns the qubit spectrum test into a test on observed data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Channel
from .errors import InfeasibleError, NumericalError
from .linalg import (
    SPECTRUM_MATCH_TOL,
    SpectrumMultiset,
    as_complex_values,
    as_matrix,
    companion_matrix,
    eig_multiset,
    least_squares,
)
from .qubit import QubitSpectrumVerdict, check_qubit_cp_spectrum, synth_qubit_channel

FIT_TOL = 1e-8
MAX_ORDER = 12
REAL_SERIES_TOL = 1e-10


@dataclass(frozen=True)
class Series:
    """Scalar observations a_0 ... a_(T-1), possibly complex."""

    values: tuple[complex, ...]
    label: str | None = None

    def __post_init__(self):
        vals = as_complex_values(self.values)
        if not vals:
            raise ValueError("series must be non-empty")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def is_real(self, tol: float = REAL_SERIES_TOL) -> bool:
        scale = max(1.0, max(abs(v) for v in self.values))
        return all(abs(v.imag) <= tol * scale for v in self.values)


def generate_series(op, observable, state, steps: int) -> Series:
    """a_t = <A, T^t(rho)> for t = 0..steps-1 by repeated application.

    ``op`` is a :class:`Channel` with matrix observable/state, or a raw
    superoperator acting on vectorized arguments.
    """
    if steps < 1:
        raise ValueError("steps must be positive")
    if isinstance(op, Channel):
        superop = op.superop
        a = as_matrix(observable, square=True, name="observable").reshape(-1)
        r = as_matrix(state, square=True, name="state").reshape(-1)
    else:
        superop = as_matrix(op, square=True, name="superop")
        a = np.asarray(observable, dtype=complex).reshape(-1)
        r = np.asarray(state, dtype=complex).reshape(-1)
    if a.shape[0] != superop.shape[0] or r.shape[0] != superop.shape[0]:
        raise ValueError("observable/state size does not match the superoperator")
    out = np.empty(steps, dtype=complex)
    v = r.copy()
    for t in range(steps):
        out[t] = np.vdot(a, v)
        if t + 1 < steps:
            v = superop @ v
    return Series(tuple(out.tolist()))


@dataclass(frozen=True)
class RecurrenceModel:
    """Minimal fitted recurrence a_{t+r} = sum_k c_k a_{t+k}."""

    order: int
    coefficients: tuple[complex, ...]
    relative_residual: float
    poles: SpectrumMultiset
    rank_deficient: bool


def fit_recurrence(series: Series, tol: float = FIT_TOL, max_order: int = MAX_ORDER) -> RecurrenceModel:
    """Smallest-order linear recurrence fitting the series within ``tol``.

    Order r is accepted when the Hankel least-squares fit has relative
    residual at most ``tol`` and at least r + 1 equations are available
    (so the series must be longer than 2r).  Poles are companion-matrix
    eigenvalues of the recurrence polynomial.
    """
    vals = np.array(series.values)
    real = series.is_real()
    if real:
        vals = vals.real
    n = vals.shape[0]
    if n < 3:
        raise ValueError("series too short to fit any recurrence")
    scale = max(1.0, float(np.abs(vals).max()))
    for order in range(1, max_order + 1):
        rows = n - order
        if rows < order + 1:
            break
        hank = np.empty((rows, order), dtype=vals.dtype)
        for k in range(order):
            hank[:, k] = vals[k : k + rows]
        rhs = vals[order:]
        sol = least_squares(hank, rhs)
        rel = sol.residual_norm / max(float(np.linalg.norm(rhs)), 1e-30 * scale)
        if rel <= tol:
            coeffs = sol.x.real if real else sol.x
            # monic polynomial x^r - c_{r-1} x^{r-1} - ... - c_0
            poly = np.concatenate([[1.0], -coeffs[::-1]])
            poles = eig_multiset(companion_matrix(poly))
            return RecurrenceModel(
                order=order,
                coefficients=tuple(complex(c) for c in coeffs),
                relative_residual=float(rel),
                poles=poles,
                rank_deficient=sol.rank_deficient,
            )
    raise NumericalError(f"no finite recurrence of order <= {max_order} at tolerance {tol}")


@dataclass(frozen=True)
class SeriesVerdict:
    realizable: bool
    reasons: tuple[str, ...]
    model: RecurrenceModel
    padded_spectrum: tuple[complex, ...] | None
    witness: Channel | None
    note: str


_CONCLUSIVE = "four poles determine the full qubit spectrum; the verdict is conclusive"
_PADDED = (
    "fewer than four poles: the verdict assumes the unobserved eigenvalues are zero, "
    "so a negative answer does not rule out qubit channels with other spectra"
)


def qubit_series_verdict(
    series: Series,
    fit_tol: float = FIT_TOL,
    match_tol: float = SPECTRUM_MATCH_TOL,
    max_order: int = MAX_ORDER,
) -> SeriesVerdict:
    """Can some qubit channel have produced this series?

    Fits the minimal recurrence, adjoins 1 to the poles when absent, pads
    with zeros to four values, and runs the qubit spectrum test.  On success
    the witness channel is synthesized from the padded spectrum.
    """
    model = fit_recurrence(series, fit_tol, max_order)
    poles = list(model.poles.values)
    if not any(abs(p - 1.0) <= match_tol for p in poles):
        poles.append(1.0 + 0.0j)
    if len(poles) > 4:
        return SeriesVerdict(
            False,
            ("too-many-poles",),
            model,
            None,
            None,
            "more than four poles cannot come from a qubit map",
        )
    padded = tuple(poles) + (0.0 + 0.0j,) * (4 - len(poles))
    note = _CONCLUSIVE if len(poles) == 4 else _PADDED
    verdict: QubitSpectrumVerdict = check_qubit_cp_spectrum(padded, match_tol)
    if not verdict.realizable:
        return SeriesVerdict(False, verdict.reasons, model, padded, None, note)
    try:
        witness = synth_qubit_channel(padded, match_tol)
    except InfeasibleError as exc:  # pragma: no cover - guarded by the verdict
        return SeriesVerdict(False, (str(exc),), model, padded, None, note)
    return SeriesVerdict(True, (), model, padded, witness, note)
