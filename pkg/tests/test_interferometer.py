import math

import numpy as np
import pytest

from fibersdc.errors import ConfigError, StateError
from fibersdc.interferometer import (
    DetectionOutcome,
    InterferometerConfig,
    beamsplitter,
    classify,
    delay_loop,
    evolve_bsm,
    hadamard_waveplate,
    load_reference_outputs,
    measurement_distribution,
    verdict_distribution,
)
from fibersdc.states import (
    BELL_ORDER,
    BellState,
    PhotonMode,
    TwoPhotonState,
    align_global_phase,
    dump_state,
    make_bell,
    overlap,
)

R2 = 1.0 / math.sqrt(2.0)


def _mix(coeffs):
    out = TwoPhotonState()
    for c, b in zip(coeffs, BELL_ORDER):
        out = out.added(make_bell(b).scaled(c))
    return out


def _random_bell_mix(rng):
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    return _mix(v / np.linalg.norm(v))


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def test_config_defaults_valid():
    cfg = InterferometerConfig()
    assert cfg.delay1_ns == pytest.approx(2 * cfg.delay0_ns)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"delay0_ns": 5.0, "delay1_ns": 9.0},
        {"delay0_ns": -1.0, "delay1_ns": -2.0},
        {"detector_resolution_ns": 5.0},
        {"detector_resolution_ns": 0.0},
        {"detector_resolution_ns": 7.0},
    ],
)
def test_config_rejects_bad_geometry(kwargs):
    with pytest.raises(ConfigError):
        InterferometerConfig(**kwargs)


# ---------------------------------------------------------------------------
# structural elements
# ---------------------------------------------------------------------------

# Hand-expanded coupler images of the four Bell classes, with the H arms
# on the symmetric coupler and the V arms on its conjugate, input-crossed.
# The parallel-polarization classes bunch into the same four outcomes with
# equal weight, the symmetric crossed class bunches per port, and the
# singlet anti-bunches.


def test_beamsplitter_phi_plus_expansion():
    out = beamsplitter(make_bell(BellState.PHI_PLUS))
    expect = {
        (PhotonMode("2", "H", 0), PhotonMode("2", "H", 0)): 0.5j,
        (PhotonMode("3", "H", 0), PhotonMode("3", "H", 0)): 0.5j,
        (PhotonMode("2", "V", 0), PhotonMode("2", "V", 0)): -0.5j,
        (PhotonMode("3", "V", 0), PhotonMode("3", "V", 0)): -0.5j,
    }
    assert len(out) == len(expect)
    for (m1, m2), amp in expect.items():
        assert out.amplitude(m1, m2) == pytest.approx(amp, abs=1e-12)


def test_beamsplitter_phi_minus_expansion():
    out = beamsplitter(make_bell(BellState.PHI_MINUS))
    expect = {
        (PhotonMode("2", "H", 0), PhotonMode("2", "H", 0)): 0.5j,
        (PhotonMode("3", "H", 0), PhotonMode("3", "H", 0)): 0.5j,
        (PhotonMode("2", "V", 0), PhotonMode("2", "V", 0)): 0.5j,
        (PhotonMode("3", "V", 0), PhotonMode("3", "V", 0)): 0.5j,
    }
    assert len(out) == len(expect)
    for (m1, m2), amp in expect.items():
        assert out.amplitude(m1, m2) == pytest.approx(amp, abs=1e-12)


def test_beamsplitter_psi_plus_expansion():
    out = beamsplitter(make_bell(BellState.PSI_PLUS))
    expect = {
        (PhotonMode("2", "H", 0), PhotonMode("2", "V", 0)): R2,
        (PhotonMode("3", "H", 0), PhotonMode("3", "V", 0)): R2,
    }
    assert len(out) == len(expect)
    for (m1, m2), amp in expect.items():
        assert out.amplitude(m1, m2) == pytest.approx(amp, abs=1e-12)


def test_beamsplitter_psi_minus_expansion():
    out = beamsplitter(make_bell(BellState.PSI_MINUS))
    expect = {
        (PhotonMode("2", "H", 0), PhotonMode("3", "V", 0)): -1j * R2,
        (PhotonMode("2", "V", 0), PhotonMode("3", "H", 0)): 1j * R2,
    }
    assert len(out) == len(expect)
    for (m1, m2), amp in expect.items():
        assert out.amplitude(m1, m2) == pytest.approx(amp, abs=1e-12)


def test_beamsplitter_preserves_inner_products(rng):
    for _ in range(25):
        a = _random_bell_mix(rng)
        b = _random_bell_mix(rng)
        before = overlap(a, b)
        after = overlap(beamsplitter(a), beamsplitter(b))
        assert after == pytest.approx(before, abs=1e-10)
        assert beamsplitter(a).norm() == pytest.approx(a.norm(), abs=1e-10)


def test_hadamard_waveplate_rotates_and_involutes(rng):
    state = TwoPhotonState(
        {(PhotonMode("A", "H", 0), PhotonMode("B", "H", 0)): 1.0}
    )
    rotated = hadamard_waveplate(state, "A")
    assert rotated.amplitude(
        PhotonMode("A", "H", 0), PhotonMode("B", "H", 0)
    ) == pytest.approx(R2)
    assert rotated.amplitude(
        PhotonMode("A", "V", 0), PhotonMode("B", "H", 0)
    ) == pytest.approx(R2)
    for _ in range(5):
        mixed = _random_bell_mix(rng)
        twice = hadamard_waveplate(hadamard_waveplate(mixed, "0"), "0")
        assert abs(overlap(mixed, twice) - mixed.norm() ** 2) < 1e-10


def test_delay_loop_shifts_and_phases():
    state = TwoPhotonState(
        {(PhotonMode("A", "V", 0), PhotonMode("B", "H", 0)): 1.0}
    )
    delayed = delay_loop(state, "A", "V", 2, phase_rad=0.25)
    amp = delayed.amplitude(PhotonMode("A", "V", 2), PhotonMode("B", "H", 0))
    assert amp == pytest.approx(np.exp(0.25j), abs=1e-12)
    assert delayed.norm() == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        delay_loop(state, "A", "V", 3)


# ---------------------------------------------------------------------------
# the analyzer map
# ---------------------------------------------------------------------------


def test_evolve_matches_reference_file_bit_exact():
    cfg = InterferometerConfig()
    reference = load_reference_outputs()
    for which in BELL_ORDER:
        got = dump_state(align_global_phase(evolve_bsm(make_bell(which), cfg)))
        want = dump_state(align_global_phase(reference[which]))
        assert got == want, which


def test_evolve_rejects_bad_support():
    cfg = InterferometerConfig()
    both_same_port = TwoPhotonState(
        {(PhotonMode("0", "H", 0), PhotonMode("0", "V", 0)): 1.0}
    )
    with pytest.raises(StateError):
        evolve_bsm(both_same_port, cfg)
    late = TwoPhotonState({(PhotonMode("0", "H", 1), PhotonMode("1", "V", 1)): 1.0})
    with pytest.raises(StateError):
        evolve_bsm(late, cfg)
    wrong_ports = TwoPhotonState({(PhotonMode("A", "H", 0), PhotonMode("B", "V", 0)): 1.0})
    with pytest.raises(StateError):
        evolve_bsm(wrong_ports, cfg)


def test_evolve_unitary_at_random_phases(rng):
    cfg = InterferometerConfig()
    worst = 0.0
    for _ in range(100):
        c = cfg.with_phases(*(rng.uniform(0, 2 * np.pi, 2)))
        mix = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
        outs = [evolve_bsm(_mix(row), c) for row in mix]
        for i in range(4):
            for j in range(4):
                want = 1.0 if i == j else 0.0
                worst = max(worst, abs(overlap(outs[i], outs[j]) - want))
    assert worst < 1e-9


def test_evolve_never_double_occupies_a_mode(rng):
    cfg = InterferometerConfig()
    for _ in range(20):
        c = cfg.with_phases(*(rng.uniform(0, 2 * np.pi, 2)))
        for which in BELL_ORDER:
            for (m1, m2), _ in evolve_bsm(make_bell(which), c).items():
                assert m1 != m2


def test_evolve_is_linear(rng):
    cfg = InterferometerConfig().with_phases(0.4, 1.1)
    a = _random_bell_mix(rng)
    b = _random_bell_mix(rng)
    combined = evolve_bsm(a.added(b.scaled(0.5j)), cfg)
    separate = evolve_bsm(a, cfg).added(evolve_bsm(b, cfg).scaled(0.5j))
    assert abs(overlap(combined, separate) - combined.norm() ** 2) < 1e-10


# ---------------------------------------------------------------------------
# measurement statistics
# ---------------------------------------------------------------------------


def test_distribution_phi_plus_two_outcomes():
    cfg = InterferometerConfig()
    dist = measurement_distribution(evolve_bsm(make_bell(BellState.PHI_PLUS), cfg), cfg)
    want = {
        DetectionOutcome("A", "H", "A", "V", 0): 0.5,
        DetectionOutcome("B", "H", "B", "V", 0): 0.5,
    }
    assert set(dist) == set(want)
    for k, p in want.items():
        assert dist[k] == pytest.approx(p, abs=1e-12)


def test_distribution_psi_plus_eight_outcomes():
    cfg = InterferometerConfig()
    dist = measurement_distribution(evolve_bsm(make_bell(BellState.PSI_PLUS), cfg), cfg)
    assert len(dist) == 8
    for outcome, p in dist.items():
        assert p == pytest.approx(0.125, abs=1e-12)
        assert outcome.dt_bins == 1
        assert not outcome.same_port()


def test_distribution_psi_minus_two_bin_separation():
    cfg = InterferometerConfig()
    dist = measurement_distribution(evolve_bsm(make_bell(BellState.PSI_MINUS), cfg), cfg)
    assert len(dist) == 8
    for outcome, p in dist.items():
        assert p == pytest.approx(0.125, abs=1e-12)
        assert outcome.dt_bins == 2
        assert not outcome.same_pol()


def test_distribution_requires_normalized_input():
    cfg = InterferometerConfig()
    with pytest.raises(StateError):
        measurement_distribution(make_bell(BellState.PHI_PLUS).scaled(2.0), cfg)


def test_distribution_sums_to_one_at_random_phases(rng):
    cfg = InterferometerConfig()
    for _ in range(30):
        c = cfg.with_phases(*(rng.uniform(0, 2 * np.pi, 2)))
        state = evolve_bsm(_random_bell_mix(rng), c)
        total = sum(measurement_distribution(state, c).values())
        assert total == pytest.approx(1.0, abs=1e-9)


def test_distribution_ignores_global_time_translation():
    cfg = InterferometerConfig()
    state = evolve_bsm(make_bell(BellState.PSI_PLUS), cfg)
    shifted = state
    for port in ("A", "B"):
        for pol in ("H", "V"):
            shifted = delay_loop(shifted, port, pol, 1, phase_rad=0.0)
    a = measurement_distribution(state, cfg)
    b = measurement_distribution(shifted, cfg)
    assert set(a) == set(b)
    for k in a:
        assert a[k] == pytest.approx(b[k], abs=1e-12)


def test_diagonal_score_is_maximal_at_calibration():
    cfg = InterferometerConfig()
    def score(p0, p1):
        c = cfg.with_phases(p0, p1)
        return sum(verdict_distribution(b, c).get(b, 0.0) for b in BELL_ORDER) / 4.0
    peak = score(0.0, 0.0)
    assert peak == pytest.approx(1.0, abs=1e-12)
    for p0 in np.linspace(0, 2 * np.pi, 13, endpoint=False):
        for p1 in np.linspace(0, 2 * np.pi, 13, endpoint=False):
            assert score(float(p0), float(p1)) <= peak + 1e-12


def test_detuning_leaks_but_stays_normalized():
    cfg = InterferometerConfig().with_phases(np.pi / 2, 0.0)
    vd = verdict_distribution(BellState.PSI_MINUS, cfg)
    assert vd.get(BellState.PSI_MINUS, 0.0) < 1.0 - 1e-3
    assert vd.get(None, 0.0) > 1e-3
    assert sum(vd.values()) == pytest.approx(1.0, abs=1e-9)


def test_distributions_vary_continuously_in_phase():
    cfg = InterferometerConfig()
    eps = 1e-5
    base = verdict_distribution(BellState.PHI_PLUS, cfg.with_phases(0.7, 0.3))
    nudged = verdict_distribution(BellState.PHI_PLUS, cfg.with_phases(0.7 + eps, 0.3))
    keys = set(base) | set(nudged)
    drift = max(abs(base.get(k, 0.0) - nudged.get(k, 0.0)) for k in keys)
    assert drift < 1e-3


# ---------------------------------------------------------------------------
# outcome classification
# ---------------------------------------------------------------------------


def test_outcome_orders_earlier_photon_first():
    outcome = DetectionOutcome.from_modes(
        PhotonMode("B", "H", 2), PhotonMode("A", "V", 0)
    )
    assert (outcome.first_port, outcome.first_pol) == ("A", "V")
    assert outcome.dt_bins == 2


def test_outcome_sorts_simultaneous_clicks():
    a = DetectionOutcome.from_modes(PhotonMode("B", "V", 1), PhotonMode("A", "H", 1))
    b = DetectionOutcome.from_modes(PhotonMode("A", "H", 1), PhotonMode("B", "V", 1))
    assert a == b
    assert a.dt_bins == 0


@pytest.mark.parametrize(
    "outcome,want",
    [
        (DetectionOutcome("A", "H", "A", "V", 0), BellState.PHI_PLUS),
        (DetectionOutcome("B", "H", "B", "V", 0), BellState.PHI_PLUS),
        (DetectionOutcome("A", "H", "B", "H", 0), BellState.PHI_MINUS),
        (DetectionOutcome("A", "V", "B", "V", 0), BellState.PHI_MINUS),
        (DetectionOutcome("A", "H", "B", "V", 1), BellState.PSI_PLUS),
        (DetectionOutcome("B", "V", "A", "V", 1), BellState.PSI_PLUS),
        (DetectionOutcome("A", "H", "A", "V", 2), BellState.PSI_MINUS),
        (DetectionOutcome("A", "H", "B", "V", 2), BellState.PSI_MINUS),
        (DetectionOutcome("A", "H", "A", "H", 0), None),
        (DetectionOutcome("A", "H", "B", "V", 0), None),
        (DetectionOutcome("A", "H", "A", "V", 1), None),
        (DetectionOutcome("A", "H", "B", "H", 2), None),
        (DetectionOutcome("A", "H", "B", "V", 3), None),
    ],
)
def test_classify_signature_table(outcome, want):
    assert classify(outcome) is want


def test_calibrated_verdicts_are_all_diagonal():
    cfg = InterferometerConfig()
    for which in BELL_ORDER:
        vd = verdict_distribution(which, cfg)
        assert vd.get(which, 0.0) == pytest.approx(1.0, abs=1e-9)
