"""Routing layer: from a target spectrum to an explicit channel construction.

Three entry points with set, multiset, and strict-positivity semantics.  Every
path returns a :class:`SynthesisResult` whose ``achieved`` spectrum is
recomputed from the delivered channel, never assumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Channel, verify
from .classical import (
    MOMENT_HORIZON,
    NonnegRealization,
    lift_to_channel,
    moment_report,
    nniep_optimize,
    suleimanova_companion,
    to_stochastic,
)
from .errors import InfeasibleError, NumericalError, SynthesisError
from .linalg import (
    SPECTRUM_MATCH_TOL,
    SpectrumMultiset,
    as_complex_values,
    companion_matrix,
    eig_multiset,
    multiset_match,
    symmetrize_conjugates,
)
from .qubit import REAL_AXIS_TOL, synth_qubit_channel

DEDUPE_TOL = 1e-8
PAD_STEPS = 4


@dataclass(frozen=True)
class SynthesisResult:
    channel: Channel
    d: int
    route: str
    target: tuple[complex, ...]
    achieved: SpectrumMultiset
    kernel_added: int
    realization: NonnegRealization | None = None


def _dedupe(values, tol: float = DEDUPE_TOL) -> list[complex]:
    """Cluster-average a value list into representatives (set semantics)."""
    pool = sorted(as_complex_values(values), key=lambda z: (z.real, z.imag))
    out = []
    while pool:
        ref = pool[0]
        cluster = [z for z in pool if abs(z - ref) <= tol]
        pool = [z for z in pool if abs(z - ref) > tol]
        out.append(sum(cluster) / len(cluster))
    return out


def _kernel_count(spectrum: SpectrumMultiset, tol: float = DEDUPE_TOL) -> int:
    return sum(1 for v in spectrum if abs(v) <= tol)


def _embed_blocks(blocks: list[Channel]) -> Channel:
    """Direct-sum channel: each block acts on its diagonal sector, the rest dies."""
    dims = [b.d for b in blocks]
    d = sum(dims)
    kraus = []
    offset = 0
    for block in blocks:
        for k in block.kraus:
            big = np.zeros((d, d), dtype=complex)
            big[offset : offset + block.d, offset : offset + block.d] = k
            kraus.append(big)
        offset += block.d
    return Channel(d, kraus=kraus)


def synth_spectral_set(values, tol: float = DEDUPE_TOL) -> SynthesisResult:
    """Channel whose spectral set (eigenvalues without multiplicity) equals Λ.

    One unital qubit block per real element and per conjugate-pair
    representative, each with block spectrum {1, 1, λ, conj(λ)}; the direct
    sum has dimension 2(N_r + N_c) <= 2 max(N - 1, 1).  Λ = {1} yields the
    qubit identity.
    """
    target = _dedupe(values, tol)
    if any(abs(z) <= tol for z in target):
        raise InfeasibleError("spectral sets must not contain 0")
    if any(abs(z) > 1.0 + 1e-12 for z in target):
        raise InfeasibleError("spectral radius above 1")
    if not any(abs(z - 1.0) <= tol for z in target):
        raise InfeasibleError("spectral sets of channels contain 1")
    for z in target:
        if abs(z.imag) > REAL_AXIS_TOL and not any(
            abs(z.conjugate() - w) <= tol for w in target
        ):
            raise InfeasibleError(f"set is not closed under conjugation near {z}")

    reps = []
    for z in target:
        if abs(z - 1.0) <= tol:
            continue
        if abs(z.imag) <= REAL_AXIS_TOL:
            reps.append(complex(z.real))
        elif z.imag > 0:
            reps.append(z)
    if not reps:
        channel = Channel(2, kraus=[np.eye(2, dtype=complex)])
    else:
        blocks = [synth_qubit_channel([1.0, 1.0, lam, lam.conjugate()]) for lam in reps]
        channel = _embed_blocks(blocks)

    achieved = eig_multiset(channel.superop)
    achieved_set = [z for z in _dedupe(achieved.values, tol) if abs(z) > tol]
    if len(achieved_set) != len(target) or not multiset_match(
        achieved_set, target, 10 * tol
    ).matched:
        raise NumericalError("achieved spectral set does not match the target")
    return SynthesisResult(
        channel=channel,
        d=channel.d,
        route="qubit_blocks",
        target=tuple(target),
        achieved=achieved,
        kernel_added=_kernel_count(achieved),
    )


def _validate_nonzero_target(values) -> tuple[complex, ...]:
    vals = as_complex_values(values)
    if not vals:
        raise ValueError("empty target spectrum")
    if any(abs(z) <= DEDUPE_TOL for z in vals):
        raise InfeasibleError("target multiset must be nonzero (zeros are free padding)")
    if any(abs(z) > 1.0 + 1e-12 for z in vals):
        raise InfeasibleError("spectral radius above 1")
    if not any(abs(z - 1.0) <= SPECTRUM_MATCH_TOL for z in vals):
        raise InfeasibleError("channel spectra contain 1")
    try:
        return symmetrize_conjugates(vals)
    except ValueError as exc:
        raise InfeasibleError(str(exc)) from exc


def _finish_classical(
    target, realization: NonnegRealization, route: str
) -> SynthesisResult:
    channel = lift_to_channel(realization.S)
    achieved = eig_multiset(channel.superop)
    nonzero = achieved.nonzero(DEDUPE_TOL)
    if not multiset_match(nonzero.values, target, 1e-7).matched:
        raise NumericalError("lifted channel nonzero spectrum does not match the target")
    return SynthesisResult(
        channel=channel,
        d=channel.d,
        route=route,
        target=tuple(target),
        achieved=achieved,
        kernel_added=_kernel_count(achieved),
        realization=realization,
    )


def _is_suleimanova(vals) -> bool:
    if any(abs(z.imag) > REAL_AXIS_TOL for z in vals):
        return False
    reals = sorted(z.real for z in vals)
    positives = [x for x in reals if x > 1e-12]
    return (
        len(positives) == 1
        and abs(positives[0] - 1.0) <= SPECTRUM_MATCH_TOL
        and sum(reals) >= -1e-12
    )


def synth_nonzero_spectrum(
    values, restarts: int = 50, seed: int = 0
) -> SynthesisResult:
    """Channel whose nonzero spectrum equals the target multiset Λ.

    Moment screening first (mu_k >= 0 is necessary for any channel;
    the divisibility condition is necessary for the stochastic route used
    here).  Routes: Suleimanova-shaped spectra go through the companion
    construction; real quadruples with nonnegative sum through the size-4
    optimizer with a companion fast path; everything else through the
    optimizer with increasing zero padding.
    """
    target = _validate_nonzero_target(values)
    n = len(target)
    report = moment_report(target, MOMENT_HORIZON)
    if not report.mucond1_ok:
        k = report.first_violation
        detail = f"mu_{k} = {report.mu[k - 1]:.6g} < 0" if k else "moments are not real"
        raise InfeasibleError(f"moment screening failed at horizon {report.horizon}: {detail}")

    if _is_suleimanova(target):
        try:
            return _finish_classical(
                target, suleimanova_companion([z.real for z in target]), "companion"
            )
        except NumericalError:
            pass  # defensive escalation to the optimizer

    all_real = all(abs(z.imag) <= REAL_AXIS_TOL for z in target)
    if all_real and n == 4 and sum(z.real for z in target) >= -1e-12:
        coeffs = np.real(np.atleast_1d(np.poly([z.real for z in target])))
        if coeffs[1:].max() <= 1e-12:
            comp = companion_matrix(coeffs).real
            return _finish_classical(target, to_stochastic(comp, provenance="companion"), "companion")
        realization = nniep_optimize(target, 4, restarts=restarts, seed=seed)
        return _finish_classical(target, realization, "optimizer")

    if not report.mucond2_ok:
        m, km = report.mucond2_violation
        raise SynthesisError(
            f"not synthesized: mu_{m} > 0 but mu_{km} is not, so no nonnegative-matrix "
            "realization exists at any size; existence as a channel spectrum is not refuted"
        )
    last: Exception | None = None
    for size in range(n, n + PAD_STEPS + 1):
        try:
            realization = nniep_optimize(target, size, restarts=restarts, seed=seed + size)
            return _finish_classical(target, realization, "optimizer")
        except SynthesisError as exc:
            last = exc
    raise SynthesisError(
        f"not synthesized up to padding {n + PAD_STEPS} ({last}); existence is not refuted"
    )


def synth_full_kraus_rank(
    values, restarts: int = 50, seed: int = 0
) -> SynthesisResult:
    """Primitive channel with full Kraus rank d^2 realizing the nonzero spectrum Λ.

    Needs a unique peripheral eigenvalue 1 and strictly positive power sums up
    to the horizon (both necessary).  Repeated-real spectra {1} cup {r,...,r}
    take the circulant fast path r*I + (1-r)/n * J; the rest run the
    optimizer with a strict positivity floor.
    """
    target = _validate_nonzero_target(values)
    n = len(target)
    below = [z for z in target if abs(z - 1.0) > SPECTRUM_MATCH_TOL]
    if len(below) != n - 1:
        raise InfeasibleError("full-rank spectra contain 1 exactly once")
    if any(abs(z) > 1.0 - 1e-9 for z in below):
        raise InfeasibleError("all eigenvalues besides 1 must have modulus < 1")
    report = moment_report(target, MOMENT_HORIZON)
    bad = [k + 1 for k, m in enumerate(report.mu) if m <= 1e-10]
    if bad:
        raise InfeasibleError(
            f"mu_{bad[0]} = {report.mu[bad[0] - 1]:.6g} is not strictly positive "
            f"(horizon {report.horizon}); no full-rank realization"
        )

    rest = [z for z in below]
    if all(abs(z.imag) <= REAL_AXIS_TOL for z in rest) and (
        len(rest) == 0
        or max(z.real for z in rest) - min(z.real for z in rest) <= 1e-9
    ):
        if rest:
            r = float(np.mean([z.real for z in rest]))
            circ = r * np.eye(n) + (1.0 - r) / n * np.ones((n, n))
        else:
            circ = np.ones((1, 1))
        realization = to_stochastic(circ, provenance="circulant-direct")
        result = _finish_classical(target, realization, "circulant-direct")
    else:
        last: Exception | None = None
        result = None
        for size in range(n, n + PAD_STEPS + 1):
            try:
                realization = nniep_optimize(
                    target, size, restarts=restarts, seed=seed + size, strict_positive=True
                )
                result = _finish_classical(target, realization, "optimizer")
                break
            except SynthesisError as exc:
                last = exc
        if result is None:
            raise SynthesisError(
                f"not synthesized up to padding {n + PAD_STEPS} ({last}); "
                "existence is not refuted"
            )
    margin = verify(result.channel).cp_margin
    if margin <= 0.0:
        raise NumericalError(f"full-rank construction has CP margin {margin:.3e}")
    return result
