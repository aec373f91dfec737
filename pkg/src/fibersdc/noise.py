"""Source imperfections, phase drift and detection-event simulation.

Three noise mechanisms sit between the ideal encoder and the verdict
stream:

* source infidelity: with probability 1 - source_fidelity the emitted
  pair is one of the three other Bell classes, uniformly;
* loop phase drift: the two per-traversal phases perform independent
  Gaussian random walks between recalibrations, detuning the analyzer;
* accidental coincidences: uncorrelated detector pairs fire at a fixed
  rate and produce uniformly random signatures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .interferometer import (
    DetectionOutcome,
    InterferometerConfig,
    classify,
    evolve_bsm,
    measurement_distribution,
    verdict_label,
)
from .states import (
    BELL_ORDER,
    BELL_BY_LABEL,
    POLARIZATIONS,
    OUTPUT_PORTS,
    BellState,
    TwoPhotonState,
    make_bell,
)


@dataclass(frozen=True)
class SourceConfig:
    """Entangled-pair source and detection-rate settings.

    pair_rate_hz is the raw emission rate; coincidence_rate_hz is the rate
    of pairs that survive transmission and produce two detector clicks,
    and is what sets event spacing in simulated streams.
    """

    pair_rate_hz: float = 2.27e5
    coincidence_rate_hz: float = 200.0
    source_fidelity: float = 0.97
    accidental_rate_hz: float = 1.359

    def __post_init__(self):
        if not (0.0 < self.coincidence_rate_hz <= self.pair_rate_hz):
            raise ConfigError("need 0 < coincidence_rate_hz <= pair_rate_hz")
        if not (0.0 <= self.source_fidelity <= 1.0):
            raise ConfigError("source_fidelity must be in [0, 1]")
        if self.accidental_rate_hz < 0:
            raise ConfigError("accidental_rate_hz must be >= 0")

    @property
    def total_rate_hz(self) -> float:
        return self.coincidence_rate_hz + self.accidental_rate_hz

    @property
    def accidental_fraction(self) -> float:
        return self.accidental_rate_hz / self.total_rate_hz


@dataclass(frozen=True)
class DriftConfig:
    """Loop-phase drift between recalibrations.

    Each loop phase performs an independent Gaussian random walk with
    standard deviation sigma_rad_per_sqrt_s * sqrt(elapsed).  Every
    recalibration_period_s of operating time the servo pulls both phases
    back to recalibration_residual_rad, the small static error the servo
    cannot remove.
    """

    sigma_rad_per_sqrt_s: float = 3.0
    recalibration_period_s: float = 100.0
    recalibration_residual_rad: float = 0.0

    def __post_init__(self):
        if self.sigma_rad_per_sqrt_s < 0:
            raise ConfigError("sigma_rad_per_sqrt_s must be >= 0")
        if self.recalibration_period_s <= 0:
            raise ConfigError("recalibration_period_s must be positive")


def drift_phases(
    t_since_recal_s: float, config: DriftConfig, rng: np.random.Generator
) -> tuple[float, float]:
    """One marginal sample of both loop phases at a given time offset.

    Draws fresh walk endpoints; use PhaseWalk when consecutive samples
    must share a trajectory.  With sigma == 0 this returns the residual
    values exactly.
    """
    if t_since_recal_s < 0:
        raise ConfigError("time since recalibration must be >= 0")
    spread = config.sigma_rad_per_sqrt_s * math.sqrt(t_since_recal_s)
    base = config.recalibration_residual_rad
    z0, z1 = rng.standard_normal(2)
    return base + spread * z0, base + spread * z1


class PhaseWalk:
    """Stateful phase trajectory with periodic recalibration.

    Query times must be non-decreasing.  The walk is advanced in
    increments, and whenever a query crosses one or more recalibration
    boundaries the phases reset to the residual at the last boundary
    before continuing.
    """

    def __init__(self, config: DriftConfig, rng: np.random.Generator):
        self._cfg = config
        self._rng = rng
        self._t = 0.0
        self._phi0 = config.recalibration_residual_rad
        self._phi1 = config.recalibration_residual_rad
        self._resets = 0

    @property
    def recalibrations(self) -> int:
        return self._resets

    def _advance(self, dt: float) -> None:
        if dt <= 0:
            return
        step = self._cfg.sigma_rad_per_sqrt_s * math.sqrt(dt)
        z0, z1 = self._rng.standard_normal(2)
        self._phi0 += step * z0
        self._phi1 += step * z1

    def phases_at(self, t_s: float) -> tuple[float, float]:
        if t_s < self._t - 1e-9:
            raise ConfigError("PhaseWalk queries must be non-decreasing in time")
        period = self._cfg.recalibration_period_s
        while math.floor(t_s / period) > math.floor(self._t / period):
            boundary = (math.floor(self._t / period) + 1) * period
            self._t = boundary
            self._phi0 = self._cfg.recalibration_residual_rad
            self._phi1 = self._cfg.recalibration_residual_rad
            self._resets += 1
        self._advance(t_s - self._t)
        self._t = max(self._t, t_s)
        return self._phi0, self._phi1


def _sample_emitted(
    ideal: BellState, config: SourceConfig, rng: np.random.Generator
) -> BellState:
    if rng.random() < config.source_fidelity:
        return ideal
    others = [b for b in BELL_ORDER if b is not ideal]
    return others[rng.integers(0, 3)]


def apply_source_noise(
    ideal: BellState, config: SourceConfig, rng: np.random.Generator
) -> TwoPhotonState:
    """Emit the ideal Bell pair, or a uniformly random wrong one."""
    return make_bell(_sample_emitted(ideal, config, rng))


def _sample_accidental_outcome(rng: np.random.Generator) -> DetectionOutcome:
    """Uncorrelated double click: independent uniform detectors and a
    uniform bin separation in 0..3."""
    p1 = OUTPUT_PORTS[rng.integers(0, 2)]
    l1 = POLARIZATIONS[rng.integers(0, 2)]
    p2 = OUTPUT_PORTS[rng.integers(0, 2)]
    l2 = POLARIZATIONS[rng.integers(0, 2)]
    dt = int(rng.integers(0, 4))
    if dt == 0:
        (p1, l1), (p2, l2) = sorted(((p1, l1), (p2, l2)))
    return DetectionOutcome(p1, l1, p2, l2, dt)


def _sample_from_distribution(
    dist: dict[DetectionOutcome, float], rng: np.random.Generator
) -> DetectionOutcome:
    outcomes = sorted(dist)
    probs = np.array([dist[o] for o in outcomes])
    probs = probs / probs.sum()
    return outcomes[rng.choice(len(outcomes), p=probs)]


def sample_detection(
    sent: BellState,
    phases: tuple[float, float],
    source_cfg: SourceConfig,
    interf_cfg: InterferometerConfig,
    rng: np.random.Generator,
) -> tuple[DetectionOutcome, BellState | None]:
    """Sample one detected signature for a sent class at given phases.

    Returns the outcome together with its verdict.  With probability
    accidental_rate / (coincidence_rate + accidental_rate) the event is an
    uncorrelated accidental instead of a real pair.
    """
    if rng.random() < source_cfg.accidental_fraction:
        outcome = _sample_accidental_outcome(rng)
    else:
        emitted = _sample_emitted(sent, source_cfg, rng)
        cfg = interf_cfg.with_phases(phases[0], phases[1])
        dist = measurement_distribution(evolve_bsm(make_bell(emitted), cfg), cfg)
        outcome = _sample_from_distribution(dist, rng)
    return outcome, classify(outcome)


@dataclass(frozen=True)
class DetectionEvent:
    wall_time_s: float
    truth: BellState
    outcome: DetectionOutcome
    verdict: BellState | None


def generate_event_stream(
    schedule: list[tuple[BellState, float]],
    source_cfg: SourceConfig,
    drift_cfg: DriftConfig,
    interf_cfg: InterferometerConfig,
    rng: np.random.Generator,
) -> list[DetectionEvent]:
    """Simulate a timed run through a schedule of (sent class, seconds).

    Coincidences arrive as a Poisson process at the total detected rate;
    the phase walk advances between arrivals and recalibrates on its
    period.  Events come back in strictly increasing wall time.
    """
    walk = PhaseWalk(drift_cfg, rng)
    rate = source_cfg.total_rate_hz
    events: list[DetectionEvent] = []
    t = 0.0
    for sent, duration in schedule:
        if duration < 0:
            raise ConfigError("schedule durations must be >= 0")
        end = t + duration
        while True:
            t += rng.exponential(1.0 / rate)
            if t >= end:
                t = end
                break
            phases = walk.phases_at(t)
            outcome, verdict = sample_detection(sent, phases, source_cfg, interf_cfg, rng)
            events.append(DetectionEvent(t, sent, outcome, verdict))
    return events


def tally_verdicts(events: list[DetectionEvent]) -> tuple[np.ndarray, np.ndarray]:
    """Count matrix over (truth, verdict) plus per-truth ambiguous counts.

    The matrix rows and columns follow canonical Bell order; ambiguous
    verdicts are tallied separately, mirroring how a bench discards them.
    """
    counts = np.zeros((4, 4), dtype=np.int64)
    ambiguous = np.zeros(4, dtype=np.int64)
    for ev in events:
        row = ev.truth.index
        if ev.verdict is None:
            ambiguous[row] += 1
        else:
            counts[row, ev.verdict.index] += 1
    return counts, ambiguous


# --------------------------------------------------------------------------
# event-log serialization
# --------------------------------------------------------------------------

_LOG_COLUMNS = "wall_time_s,truth,port1,pol1,port2,pol2,dt_bins,verdict"


def write_event_log(path, events: list[DetectionEvent], header: dict[str, str]) -> None:
    """Write events as CSV with `# key: value` header lines."""
    with open(path, "w", encoding="utf-8") as fh:
        for key in sorted(header):
            fh.write(f"# {key}: {header[key]}\n")
        fh.write(_LOG_COLUMNS + "\n")
        for ev in events:
            o = ev.outcome
            fh.write(
                f"{ev.wall_time_s:.6f},{ev.truth.label},{o.first_port},{o.first_pol},"
                f"{o.second_port},{o.second_pol},{o.dt_bins},{verdict_label(ev.verdict)}\n"
            )


def read_event_log(path) -> tuple[list[DetectionEvent], dict[str, str]]:
    header: dict[str, str] = {}
    events: list[DetectionEvent] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, val = body.split(":", 1)
                    header[key.strip()] = val.strip()
                continue
            if line == _LOG_COLUMNS:
                continue
            parts = line.split(",")
            if len(parts) != 8:
                raise ConfigError(f"bad event log line: {raw!r}")
            outcome = DetectionOutcome(parts[2], parts[3], parts[4], parts[5], int(parts[6]))
            verdict = None if parts[7] == "ambiguous" else BELL_BY_LABEL[parts[7]]
            events.append(
                DetectionEvent(float(parts[0]), BELL_BY_LABEL[parts[1]], outcome, verdict)
            )
    return events, header
