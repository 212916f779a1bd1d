import numpy as np
import pytest

from chanspec import (
    Channel,
    InfeasibleError,
    PauliRep,
    check_and_synth_positive_qubit,
    check_qubit_cp_spectrum,
    from_pauli_rep,
    multiset_match,
    pauli_rep,
    qubit_positivity,
    random_channel,
    reduce_to_unital,
    synth_qubit_channel,
    tetra_membership,
    verify,
)


def amplitude_damping(gamma: float) -> Channel:
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=complex)
    k1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    return Channel.from_kraus([k0, k1])


def test_pauli_rep_amplitude_damping():
    rep = pauli_rep(amplitude_damping(0.75))
    assert np.allclose(rep.v, [0.0, 0.0, 0.75], atol=1e-12)
    assert np.allclose(rep.delta, np.diag([0.5, 0.5, 0.25]), atol=1e-12)


def test_pauli_rep_sigma_z_conjugation():
    sz = np.diag([1.0, -1.0]).astype(complex)
    ch = Channel.from_kraus([sz])
    rep = pauli_rep(ch)
    assert np.allclose(rep.v, 0.0, atol=1e-12)
    assert np.allclose(rep.delta, np.diag([-1.0, -1.0, 1.0]), atol=1e-12)


def test_pauli_rep_round_trip():
    rep = PauliRep(v=[0.1, -0.2, 0.3], delta=0.2 * np.eye(3) + 0.05)
    back = pauli_rep(from_pauli_rep(rep))
    assert np.allclose(back.v, rep.v, atol=1e-12)
    assert np.allclose(back.delta, rep.delta, atol=1e-12)


def test_pauli_rep_rejects_non_qubit_and_non_tp():
    with pytest.raises(ValueError):
        pauli_rep(random_channel(3, 2, seed=0))
    with pytest.raises(ValueError):
        pauli_rep(Channel(2, superop=0.9 * np.eye(4, dtype=complex)))


def test_tetra_membership_corners_and_interior():
    for corner in [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]:
        point = tetra_membership(corner)
        assert point.member
        assert abs(min(point.margins)) <= 1e-12
    origin = tetra_membership((0.0, 0.0, 0.0))
    assert origin.member
    assert np.allclose(origin.margins, 1.0)


def test_tetra_membership_outside():
    point = tetra_membership((0.9, 0.9, 0.5))
    assert not point.member
    assert abs(min(point.margins) - (-0.3)) < 1e-12


def test_check_spectrum_accepts_real_and_pair():
    real = check_qubit_cp_spectrum([1.0, 0.5, 0.5, 0.25])
    assert real.realizable
    assert np.allclose(real.s, (0.5, 0.5, 0.25))

    pair = check_qubit_cp_spectrum([1.0, 0.8, 0.3 + 0.4j, 0.3 - 0.4j])
    assert pair.realizable
    assert np.allclose(pair.s, (0.8, 0.5, 0.5))
    assert abs(min(pair.tetra.margins) - 0.2) < 1e-12


def test_check_spectrum_degenerate_one_is_boundary():
    verdict = check_qubit_cp_spectrum([1.0, 1.0, 0.5, 0.5])
    assert verdict.realizable
    assert abs(min(verdict.tetra.margins)) <= 1e-12


def test_check_spectrum_rejections():
    missing = check_qubit_cp_spectrum([0.9, 0.5, 0.5, 0.25])
    assert not missing.realizable
    assert missing.reasons == ("missing-one",)

    unpaired = check_qubit_cp_spectrum([1.0, 0.3 + 0.4j, 0.3 + 0.4j, 0.1])
    assert not unpaired.realizable
    assert unpaired.reasons == ("not-conjugation-closed",)

    outside = check_qubit_cp_spectrum([1.0, 0.9, 0.9, -0.9])
    assert not outside.realizable
    assert outside.reasons == ("outside-tetrahedron",)
    assert abs(min(outside.tetra.margins) - (-1.7)) < 1e-12

    with pytest.raises(ValueError):
        check_qubit_cp_spectrum([1.0, 0.5, 0.5])


def test_spectra_of_random_channels_pass_the_check():
    # soundness: every qubit channel spectrum must be accepted
    for seed in range(100):
        ch = random_channel(2, 1 + seed % 4, seed=seed)
        verdict = check_qubit_cp_spectrum(ch.spectrum().values)
        assert verdict.realizable, (seed, verdict.reasons)


def test_synth_real_spectrum():
    target = [1.0, 0.5, 0.5, 0.25]
    ch = synth_qubit_channel(target)
    report = verify(ch)
    assert report.is_cptp()
    assert report.unital_error < 1e-9
    assert multiset_match(ch.spectrum().values, target, 1e-8).matched


def test_synth_conjugate_pair_spectrum():
    target = [1.0, 0.8, 0.3 + 0.4j, 0.3 - 0.4j]
    ch = synth_qubit_channel(target)
    assert verify(ch).is_cptp()
    assert multiset_match(ch.spectrum().values, target, 1e-8).matched


def test_synth_rejects_outside_tetrahedron():
    with pytest.raises(InfeasibleError):
        synth_qubit_channel([1.0, 0.9, 0.9, -0.9])


def test_positive_but_not_cp_spectrum():
    # (1, 1, -1) sits outside the tetrahedron yet all moduli are 1
    result = check_and_synth_positive_qubit([1.0, 1.0, 1.0, -1.0])
    assert result.feasible
    assert result.channel is not None
    rep = pauli_rep(result.channel)
    assert np.allclose(np.abs(np.linalg.eigvals(rep.delta)), 1.0, atol=1e-12)
    assert not check_qubit_cp_spectrum([1.0, 1.0, 1.0, -1.0]).realizable
    assert verify(result.channel).cp_margin < -1e-3


def test_positive_rejections():
    big = check_and_synth_positive_qubit([1.0, 0.5, 0.5, 1.2])
    assert not big.feasible
    assert big.reasons == ("modulus-above-one",)
    missing = check_and_synth_positive_qubit([0.5, 0.5, 0.5, 0.5])
    assert not missing.feasible
    assert missing.reasons == ("missing-one",)


def test_positivity_soft_case():
    res = qubit_positivity(PauliRep([0.5, 0.0, 0.0], np.diag([0.9, 0.3, 0.3])))
    assert not res.positive
    assert abs(res.value - 1.4) < 1e-9
    assert abs(abs(res.maximizer[0]) - 1.0) < 1e-9

    ok = qubit_positivity(PauliRep([0.1, 0.0, 0.0], np.diag([0.5, 0.2, 0.2])))
    assert ok.positive
    assert abs(ok.value - 0.6) < 1e-9


def test_positivity_hard_case_free_top_component():
    # gradient orthogonal to the top eigenspace, interior perpendicular part
    res = qubit_positivity(PauliRep([0.0, 0.0, 0.2], np.diag([0.8, 0.5, 0.4])))
    assert res.positive
    assert abs(res.value - np.sqrt(52.0 / 75.0)) < 1e-9
    assert abs(abs(res.maximizer[0]) - np.sqrt(35.0) / 6.0) < 1e-9
    assert abs(res.maximizer[1]) < 1e-9
    assert abs(res.maximizer[2] - 1.0 / 6.0) < 1e-9


def test_positivity_hard_case_secular_branch():
    # perpendicular part alone exceeds the sphere, multiplier leaves lam_top
    res = qubit_positivity(PauliRep([0.0, 0.0, 3.0], np.diag([0.5, 0.2, 0.4])))
    assert not res.positive
    assert abs(res.value - 3.4) < 1e-9
    assert abs(abs(res.maximizer[2]) - 1.0) < 1e-9


def test_positivity_zero_shift_reduces_to_operator_norm():
    on_boundary = qubit_positivity(PauliRep(np.zeros(3), np.diag([1.0, 0.5, 0.5])))
    assert on_boundary.positive
    assert abs(on_boundary.value - 1.0) < 1e-12
    over = qubit_positivity(PauliRep(np.zeros(3), np.diag([1.4, 0.5, 0.5])))
    assert not over.positive
    assert abs(over.value - 1.4) < 1e-12


def test_positivity_amplitude_damping_boundary():
    res = qubit_positivity(pauli_rep(amplitude_damping(0.75)))
    assert res.positive
    assert abs(res.value - 1.0) < 1e-9


def test_positivity_matches_sphere_sampling():
    rng = np.random.default_rng(11)
    for _ in range(25):
        rep = PauliRep(rng.normal(scale=0.4, size=3), rng.normal(scale=0.4, size=(3, 3)))
        res = qubit_positivity(rep)
        assert abs(np.linalg.norm(res.maximizer) - 1.0) < 1e-9
        attained = np.linalg.norm(rep.v + rep.delta @ res.maximizer)
        assert abs(attained - res.value) < 1e-9
        x = rng.normal(size=(500, 3))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        sampled = np.linalg.norm(rep.v[None, :] + x @ rep.delta.T, axis=1).max()
        assert res.value >= sampled - 1e-9


def test_reduce_to_unital_amplitude_damping():
    out = reduce_to_unital(amplitude_damping(0.75))
    rep = pauli_rep(out)
    assert np.allclose(rep.v, 0.0, atol=1e-12)
    assert np.allclose(rep.delta, np.diag([0.5, 0.5, 0.25]), atol=1e-12)
    report = verify(out)
    assert report.is_cptp()
    assert report.unital_error < 1e-9
    assert multiset_match(out.spectrum().values, [1.0, 0.5, 0.5, 0.25], 1e-8).matched
