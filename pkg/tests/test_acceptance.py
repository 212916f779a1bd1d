"""End-to-end acceptance checks for the library's headline guarantees.

Each test prints one PASS/FAIL line to the real stdout so a full run reads
as a checklist even under pytest capture.  The tolerances here are the
contract; loosening them is not an option.
"""

import sys
import time

import numpy as np
import pytest

from chanspec import (
    CycleBlock,
    CycleSpec,
    InfeasibleError,
    PauliRep,
    Series,
    check_qubit_cp_spectrum,
    eig_multiset,
    fit_recurrence,
    from_pauli_rep,
    generate_series,
    is_primitive,
    jll_counterexample_channel,
    lift_to_channel,
    moment_report,
    moments,
    multiset_match,
    normalize_trace_preserving,
    qubit_series_verdict,
    random_channel,
    synth_cycles,
    synth_full_kraus_rank,
    synth_nonzero_spectrum,
    synth_qubit_channel,
    synth_spectral_set,
    tetra_membership,
    verify,
    wielandt_bound,
)


def _report(num: int, name: str, passed: bool) -> None:
    line = f"[ACCEPTANCE {num:02d}] {'PASS' if passed else 'FAIL'} {name}"
    print(line, file=sys.__stdout__)


def boundary_series(x: float, y: float, steps: int) -> Series:
    t = np.arange(steps)
    vals = (np.imag(((1.0 - 1.0j) * x) ** t) + y**t) / np.sqrt(2.0)
    return Series(tuple(vals.tolist()))


def distinct_nonzero(values, tol: float = 1e-8):
    out = []
    for z in values:
        if abs(z) <= tol:
            continue
        if not any(abs(z - w) <= 10 * tol for w in out):
            out.append(z)
    return out


def test_acceptance_01_series_family_boundary():
    ok = False
    try:
        start = time.perf_counter()
        y = 2.0 / 3.0
        margins = {}
        for x, expect in ((0.58, True), (0.59, False)):
            verdict = qubit_series_verdict(boundary_series(x, y, 64))
            assert verdict.realizable is expect, (x, verdict.reasons)
            check = check_qubit_cp_spectrum(verdict.padded_spectrum)
            margins[x] = min(check.tetra.margins)
            closed_form = 1.0 + y - 2.0 * np.sqrt(2.0) * x
            assert abs(margins[x] - closed_form) <= 1e-6
        assert margins[0.58] > 0.0 > margins[0.59]
        assert time.perf_counter() - start < 1.0
        ok = True
    finally:
        _report(1, "series verdicts flip between x = 0.58 and x = 0.59", ok)


def test_acceptance_02_qubit_spectrum_soundness():
    ok = False
    try:
        start = time.perf_counter()
        for seed in range(1000):
            ch = random_channel(2, 1 + seed % 4, seed=seed)
            verdict = check_qubit_cp_spectrum(ch.spectrum().values)
            assert verdict.realizable, (seed, verdict.reasons)
        assert time.perf_counter() - start < 10.0
        ok = True
    finally:
        _report(2, "1000 random qubit channel spectra all accepted", ok)


def test_acceptance_03_qubit_spectrum_completeness():
    ok = False
    try:
        rng = np.random.default_rng(20260823)
        done = 0
        while done < 1000:
            s = rng.uniform(-1.0, 1.0, size=3)
            if not tetra_membership(s).member:
                continue
            target = [1.0, float(s[0]), float(s[1]), float(s[2])]
            ch = synth_qubit_channel(target)
            rep = verify(ch)
            assert rep.cp_margin >= -1e-9
            assert rep.trace_preserving_error <= 1e-9
            assert multiset_match(ch.spectrum().values, target, 1e-8).matched
            done += 1
        ok = True
    finally:
        _report(3, "1000 signatures uniform in the tetrahedron all synthesized", ok)


def test_acceptance_04_tetrahedron_choi_equivalence():
    ok = False
    try:
        grid = np.linspace(-1.0, 1.0, 21)
        for s1 in grid:
            for s2 in grid:
                for s3 in grid:
                    point = tetra_membership((s1, s2, s3))
                    ch = from_pauli_rep(PauliRep(np.zeros(3), np.diag([s1, s2, s3])))
                    choi = ch.choi
                    w = np.linalg.eigvalsh((choi + choi.conj().T) / 2.0)
                    assert point.member == (w[0] >= -1e-10), (s1, s2, s3)
                    assert abs(min(point.margins) / 2.0 - w[0]) <= 1e-10
        ok = True
    finally:
        _report(4, "facet margins match Choi eigenvalues on the 21^3 grid", ok)


def test_acceptance_05_kraus_moment_formula():
    ok = False
    try:
        for seed in range(100):
            d = 2 + seed % 2
            ch = random_channel(d, 1 + seed % 4, seed=seed)
            a = moments(ch, 4, method="superop")
            b = moments(ch, 4, method="kraus")
            for k in range(4):
                assert abs(a[k] - b[k]) <= 1e-8 * abs(a[k]) + 1e-10, (seed, k)
        ok = True
    finally:
        _report(5, "Kraus-product moments equal superoperator traces", ok)


def test_acceptance_06_moment_divisibility_counterexample():
    ok = False
    try:
        ch = jll_counterexample_channel(3)
        mu = moments(ch, 2)
        assert abs(mu[0] - 2.0) <= 1e-10
        assert abs(mu[1]) <= 1e-10
        report = moment_report(ch.spectrum().values, d_list=(3,))
        assert report.jll_violations.get(3) == (1, 2)
        prim = is_primitive(ch)
        assert prim.span_primitive
        assert prim.span_saturation_step is not None
        assert prim.span_saturation_step <= wielandt_bound(3)
        ok = True
    finally:
        _report(6, "channel with mu_1 = 2, mu_2 = 0 is primitive within the span bound", ok)


def test_acceptance_07_stochastic_lift_spectrum_law():
    ok = False
    try:
        rng = np.random.default_rng(7)
        for _ in range(200):
            n = int(rng.integers(2, 7))
            s = rng.dirichlet(np.ones(n), size=n).T
            ch = lift_to_channel(s)
            target = list(eig_multiset(s).values) + [0.0] * (n * n - n)
            assert multiset_match(ch.spectrum().values, target, 1e-8).matched
            choi = ch.choi
            off = choi - np.diag(np.diag(choi))
            assert np.count_nonzero(off) == 0
            assert abs(verify(ch).cp_margin - float(s.min())) <= 1e-14
        ok = True
    finally:
        _report(7, "200 lifted stochastic matrices obey the spectrum and margin law", ok)


def test_acceptance_08_spectral_set_synthesis():
    ok = False
    try:
        rng = np.random.default_rng(8)
        for _ in range(200):
            n_total = int(rng.integers(2, 7))
            values = [1.0 + 0.0j]
            remaining = n_total - 1
            while remaining > 0:
                if remaining >= 2 and rng.random() < 0.5:
                    r = rng.uniform(0.1, 1.0)
                    theta = rng.uniform(0.15, np.pi - 0.15)
                    z = r * np.exp(1j * theta)
                    if min(abs(z - w) for w in values) < 1e-3:
                        continue
                    values += [z, z.conjugate()]
                    remaining -= 2
                else:
                    mag = rng.uniform(0.05, 1.0)
                    z = complex(mag if rng.random() < 0.5 else -mag)
                    if min(abs(z - w) for w in values) < 1e-3:
                        continue
                    values.append(z)
                    remaining -= 1
            res = synth_spectral_set(values)
            assert res.d <= 2 * (n_total - 1), (n_total, res.d)
            achieved_set = distinct_nonzero(res.channel.spectrum().values)
            assert len(achieved_set) == n_total
            assert multiset_match(achieved_set, values, 1e-8).matched
        ok = True
    finally:
        _report(8, "200 spectral sets realized within dimension 2(N-1)", ok)


def test_acceptance_09_peripheral_cycle_synthesis():
    ok = False
    try:
        specs = [
            CycleSpec((CycleBlock(3, 1, [1.0]),)),
            CycleSpec((CycleBlock(1, 2, [1.0, np.exp(1j * np.pi / 5)]),)),
            CycleSpec((CycleBlock(1, 2, [1.0, 1j]),)),
            CycleSpec((CycleBlock(2, 2, [1.0, 1j]),)),
        ]
        for spec in specs:
            predicted = spec.predicted_peripheral().values
            assert len(predicted) == sum(c.n * c.d**2 for c in spec.cycles)
            ch = synth_cycles(spec)
            nonzero = ch.spectrum().nonzero(1e-8)
            assert multiset_match(nonzero.values, predicted, 1e-8).matched
            assert all(abs(abs(v) - 1.0) <= 1e-8 for v in nonzero.values)
        ok = True
    finally:
        _report(9, "cycle constructions hit the predicted peripheral multisets", ok)


def test_acceptance_10_classical_pipeline():
    ok = False
    try:
        res = synth_nonzero_spectrum([1.0, -0.5, -0.3])
        assert res.route == "companion"
        assert res.realization.M.min() >= 0.0
        assert np.max(np.abs(res.realization.S.sum(axis=0) - 1.0)) <= 1e-10
        nonzero = res.achieved.nonzero(1e-8)
        assert multiset_match(nonzero.values, [1.0, -0.5, -0.3], 1e-7).matched

        start = time.perf_counter()
        res2 = synth_nonzero_spectrum([1.0, 1.0, 1.0, -1.0], restarts=50)
        elapsed = time.perf_counter() - start
        assert res2.d == 4
        assert res2.route == "optimizer"
        nonzero2 = res2.achieved.nonzero(1e-8)
        assert multiset_match(nonzero2.values, [1.0, 1.0, 1.0, -1.0], 1e-7).matched
        assert elapsed < 30.0
        ok = True
    finally:
        _report(10, "companion and optimizer routes deliver the classical spectra", ok)


def test_acceptance_11_strictly_positive_realizations():
    ok = False
    try:
        for target in ([1.0, 0.1], [1.0, -0.2, -0.2]):
            res = synth_full_kraus_rank(target)
            assert res.realization.S.min() > 0.0
            assert verify(res.channel).cp_margin > 0.0
            nonzero = res.achieved.nonzero(1e-8)
            assert multiset_match(nonzero.values, target, 1e-7).matched
        with pytest.raises(InfeasibleError):
            synth_full_kraus_rank([1.0, -1.0])
        ok = True
    finally:
        _report(11, "entrywise-positive realizations exist and {1,-1} is rejected", ok)


def test_acceptance_12_normalization_recovers_scale():
    ok = False
    try:
        rng = np.random.default_rng(12)
        for seed in range(50):
            d = int(rng.integers(2, 4))
            ch = random_channel(d, int(rng.integers(1, 4)), seed=seed)
            c = float(rng.uniform(0.5, 2.0))
            scaled = c * ch.superop
            res = normalize_trace_preserving(scaled)
            assert abs(res.spectral_radius - c) <= 1e-6
            achieved = [res.spectral_radius * v for v in res.channel.spectrum().values]
            assert multiset_match(achieved, eig_multiset(scaled).values, 1e-6).matched
        ok = True
    finally:
        _report(12, "50 scaled maps renormalized with the radius recovered", ok)


def test_acceptance_13_series_recurrence_recovery():
    ok = False
    try:
        y = 2.0 / 3.0
        for x in (0.58, 0.59, 0.3, -0.45):
            series = boundary_series(x, y, 64)
            model = fit_recurrence(series)
            assert model.order == 3, (x, model.order)
            lam = (1.0 + 1.0j) * x
            expected = [complex(y), lam, lam.conjugate()]
            assert len(model.poles.values) == 3
            for pole in model.poles.values:
                assert min(abs(pole - e) for e in expected) <= 1e-6

            # the documented 4x4 generator reproduces the closed form
            t_hat = np.zeros((4, 4))
            t_hat[0, 0] = 1.0
            t_hat[1, 1] = y
            t_hat[2:, 2:] = [[x, x], [-x, x]]
            rho = np.array([1.0, 1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0), 0.0])
            obs = np.array([0.0, 1.0, 0.0, 1.0])
            generated = generate_series(t_hat, obs, rho, 64)
            assert np.allclose(generated.values, series.values, atol=1e-12)

            # degree-4 annihilation by the generator's characteristic polynomial
            coeffs = np.poly(np.array([1.0, y, lam, lam.conjugate()]))
            vals = np.array(series.values)
            scale = max(float(np.abs(vals).max()), 1.0)
            for t in range(len(vals) - 4):
                acc = sum(coeffs[k] * vals[t + 4 - k] for k in range(5))
                assert abs(acc) <= 1e-8 * scale
        ok = True
    finally:
        _report(13, "64-step series fit at order 3 with annihilating recurrences", ok)
