import numpy as np
import pytest

from chanspec import (
    Channel,
    NumericalError,
    Series,
    fit_recurrence,
    generate_series,
    multiset_match,
    qubit_series_verdict,
    random_channel,
    verify,
)


def closed_form(poles, weights, steps):
    t = np.arange(steps)
    vals = np.zeros(steps, dtype=complex)
    for p, w in zip(poles, weights):
        vals += w * np.asarray(p, dtype=complex) ** t
    return Series(tuple(vals.tolist()))


def test_generate_series_alternates_under_bit_flip():
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    ch = Channel.from_kraus([sx])
    ground = np.diag([1.0, 0.0]).astype(complex)
    series = generate_series(ch, ground, ground, 6)
    assert np.allclose(series.values, [1, 0, 1, 0, 1, 0], atol=1e-12)
    assert series.is_real()


def test_generate_series_raw_superop():
    series = generate_series(np.array([[0.5]]), [1.0], [1.0], 5)
    assert np.allclose(series.values, [1.0, 0.5, 0.25, 0.125, 0.0625], atol=1e-15)


def test_generate_series_validation():
    ch = random_channel(2, 2, seed=0)
    eye = np.eye(2, dtype=complex)
    with pytest.raises(ValueError):
        generate_series(ch, eye, eye, 0)
    with pytest.raises(ValueError):
        generate_series(np.eye(4), [1.0, 0.0], [1.0, 0.0, 0.0, 0.0], 3)


def test_fit_order_one():
    geometric = closed_form([0.5], [1.0], 12)
    model = fit_recurrence(geometric)
    assert model.order == 1
    assert abs(model.poles.values[0] - 0.5) < 1e-10
    assert model.relative_residual <= 1e-8

    constant = closed_form([1.0], [1.0], 10)
    model = fit_recurrence(constant)
    assert model.order == 1
    assert abs(model.poles.values[0] - 1.0) < 1e-10


def test_fit_minimal_order_two():
    series = closed_form([0.9, 0.3], [1.0, 1.0], 20)
    model = fit_recurrence(series)
    assert model.order == 2
    assert multiset_match(model.poles.values, [0.9, 0.3], 1e-8).matched


def test_fit_order_exactly_three():
    series = closed_form([1.0, 0.5, -0.25], [1.0, 1.0, 1.0], 24)
    model = fit_recurrence(series)
    assert model.order == 3
    assert multiset_match(model.poles.values, [1.0, 0.5, -0.25], 1e-6).matched


def test_fit_all_zero_series_is_rank_deficient():
    model = fit_recurrence(Series((0.0,) * 8))
    assert model.order == 1
    assert model.rank_deficient


def test_fit_rejects_noise_and_short_series():
    rng = np.random.default_rng(3)
    with pytest.raises(NumericalError):
        fit_recurrence(Series(tuple(rng.normal(size=30).tolist())))
    with pytest.raises(ValueError):
        fit_recurrence(Series((1.0, 0.5)))


def test_channel_series_poles_sit_in_the_spectrum():
    rng = np.random.default_rng(5)
    for seed in range(5):
        ch = random_channel(2, 3, seed=seed)
        obs = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        obs = obs + obs.conj().T
        state = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        state = state @ state.conj().T
        series = generate_series(ch, obs, state / np.trace(state).real, 25)
        model = fit_recurrence(series)
        assert model.order <= 4
        spectrum = ch.spectrum().values
        for pole in model.poles.values:
            assert min(abs(pole - z) for z in spectrum) < 1e-5

        # the characteristic polynomial annihilates every observable series
        coeffs = np.poly(np.array(spectrum))
        vals = np.array(series.values)
        scale = float(np.abs(vals).max())
        for t in range(len(vals) - 4):
            acc = sum(coeffs[k] * vals[t + 4 - k] for k in range(5))
            assert abs(acc) <= 1e-8 * max(scale, 1.0)


def test_verdict_realizable_family_member():
    x = 0.58
    lam = (1 + 1j) * x
    series = closed_form([1.0, 2.0 / 3.0, lam, lam.conjugate()], [1.0, 1.0, 0.5, 0.5], 30)
    verdict = qubit_series_verdict(series)
    assert verdict.realizable
    assert verdict.model.order == 4
    assert "conclusive" in verdict.note
    assert verdict.witness is not None
    assert verify(verdict.witness).is_cptp()
    assert multiset_match(
        verdict.witness.spectrum().values, [1.0, 2.0 / 3.0, lam, lam.conjugate()], 1e-6
    ).matched


def test_verdict_rejects_family_member_outside():
    x = 0.59
    lam = (1 + 1j) * x
    series = closed_form([1.0, 2.0 / 3.0, lam, lam.conjugate()], [1.0, 1.0, 0.5, 0.5], 30)
    verdict = qubit_series_verdict(series)
    assert not verdict.realizable
    assert verdict.reasons == ("outside-tetrahedron",)
    assert "conclusive" in verdict.note
    assert verdict.witness is None
    assert len(verdict.padded_spectrum) == 4


def test_verdict_pads_constant_series():
    verdict = qubit_series_verdict(closed_form([1.0], [1.0], 10))
    assert verdict.realizable
    assert multiset_match(verdict.padded_spectrum, [1.0, 0.0, 0.0, 0.0], 1e-10).matched
    assert "assumes the unobserved eigenvalues are zero" in verdict.note
    assert verify(verdict.witness).is_cptp()


def test_verdict_too_many_poles():
    series = closed_form([0.9, 0.7, 0.5, 0.3, 0.1], [1.0] * 5, 30)
    verdict = qubit_series_verdict(series)
    assert not verdict.realizable
    assert verdict.reasons == ("too-many-poles",)
    assert verdict.padded_spectrum is None
