"""Channel-capacity analysis of the four-class verdict channel.

The characterization run yields a 4x4 count matrix over (sent class,
decoded verdict).  This module turns counts into conditional
probabilities, computes mutual information, maximizes it over input
distributions with the Blahut-Arimoto iteration, and attaches a bootstrap
uncertainty to the capacity estimate.  All information quantities are in
bits (base-2 logs).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


def _as_matrix(counts) -> np.ndarray:
    m = np.asarray(counts, dtype=float)
    if m.shape != (4, 4):
        raise ConfigError(f"expected a 4x4 matrix, got shape {m.shape}")
    if (m < 0).any():
        raise ConfigError("counts must be non-negative")
    return m


def estimate_conditionals(counts) -> np.ndarray:
    """Row-normalize a count matrix into P(verdict | sent)."""
    m = _as_matrix(counts)
    sums = m.sum(axis=1)
    if (sums <= 0).any():
        raise ConfigError("every row needs at least one count")
    return m / sums[:, None]


def subtract_uniform_background(counts, accidental_fraction: float) -> np.ndarray:
    """Optional accidental correction before normalizing.

    Removes the expected uniform-accidental load from each row: accidental
    signatures land on the four verdict zones with relative masses
    (1, 1, 2, 2)/6 among accepted events.  Entries are floored at zero.
    """
    if not (0.0 <= accidental_fraction < 1.0):
        raise ConfigError("accidental_fraction must be in [0, 1)")
    m = _as_matrix(counts)
    zone = np.array([1.0, 1.0, 2.0, 2.0]) / 6.0
    expected = accidental_fraction * m.sum(axis=1)[:, None] * zone[None, :]
    return np.maximum(m - expected, 0.0)


def mutual_information(input_dist, conditionals) -> float:
    """I(X;Y) in bits for inputs p(x) and channel P(y|x)."""
    p = np.asarray(input_dist, dtype=float)
    P = np.asarray(conditionals, dtype=float)
    if p.ndim != 1 or P.shape[0] != p.shape[0]:
        raise ConfigError("input distribution does not match channel rows")
    if abs(p.sum() - 1.0) > 1e-9 or (p < -1e-12).any():
        raise ConfigError("input distribution must be a probability vector")
    q = p @ P
    total = 0.0
    for x in range(P.shape[0]):
        if p[x] <= 0:
            continue
        for y in range(P.shape[1]):
            if P[x, y] > 0 and q[y] > 0:
                total += p[x] * P[x, y] * np.log2(P[x, y] / q[y])
    return float(total)


@dataclass(frozen=True)
class CapacityResult:
    capacity_bits: float
    input_distribution: np.ndarray
    iterations: int
    converged: bool


def channel_capacity(
    conditionals,
    tol: float = 1e-9,
    max_iterations: int = 100000,
    return_trajectory: bool = False,
):
    """Blahut-Arimoto capacity of a discrete memoryless channel.

    Starts from the uniform input and alternates the two closed-form
    updates.  Iteration stops when the capacity lower bound moves by less
    than `tol` (relative) in one step; the duality gap max_x D(x) - I is
    also required to be small, which brackets the true capacity.  With
    `return_trajectory` the per-iteration lower bounds come back too (they
    are non-decreasing, a property the tests pin).
    """
    P = np.asarray(conditionals, dtype=float)
    if P.ndim != 2 or (P < -1e-12).any():
        raise ConfigError("channel matrix must be non-negative")
    if np.abs(P.sum(axis=1) - 1.0).max() > 1e-9:
        raise ConfigError("channel rows must each sum to 1")
    n = P.shape[0]
    p = np.full(n, 1.0 / n)
    logP = np.zeros_like(P)
    np.log2(P, where=P > 0, out=logP)
    trajectory: list[float] = []
    last = -np.inf
    converged = False
    iterations = 0
    capacity = 0.0
    for iterations in range(1, max_iterations + 1):
        q = p @ P
        logq = np.zeros_like(q)
        np.log2(q, where=q > 0, out=logq)
        # D[x] = KL(P(.|x) || q) in bits
        D = np.where(P > 0, P * (logP - logq[None, :]), 0.0).sum(axis=1)
        capacity = float(p @ D)
        trajectory.append(capacity)
        gap = float(D.max() - capacity)
        if abs(capacity - last) <= tol * max(1.0, abs(capacity)) and gap <= max(
            tol * 100, 1e-12
        ) * max(1.0, abs(capacity)):
            converged = True
            break
        last = capacity
        w = p * np.exp2(D)
        p = w / w.sum()
    result = CapacityResult(capacity, p.copy(), iterations, converged)
    if return_trajectory:
        return result, trajectory
    return result


def bootstrap_ci(
    counts, resamples: int = 1000, rng: np.random.Generator | None = None
) -> float:
    """Standard deviation of the capacity under row-wise multinomial
    resampling of the count matrix.  Each resample redraws every row with
    its observed total and empirical distribution."""
    m = _as_matrix(counts)
    if resamples < 2:
        raise ConfigError("need at least 2 resamples")
    if rng is None:
        rng = np.random.default_rng(0)
    P = estimate_conditionals(m)
    totals = m.sum(axis=1).astype(int)
    caps = np.empty(resamples)
    for i in range(resamples):
        rows = [rng.multinomial(totals[x], P[x]) for x in range(4)]
        resampled = np.array(rows, dtype=float)
        # a verdict column can come back empty; row sums stay positive
        caps[i] = channel_capacity(estimate_conditionals(resampled), tol=1e-7).capacity_bits
    return float(np.std(caps, ddof=1))


def partial_bsm_channel() -> np.ndarray:
    """Verdict channel of an analyzer without the time-bin stage.

    Such a device resolves only the two antisymmetric-signature classes;
    the two parallel-polarization classes produce identical statistics and
    are decoded by a fair guess between them.  Rows and columns follow
    canonical Bell order.
    """
    return np.array(
        [
            [0.5, 0.5, 0.0, 0.0],
            [0.5, 0.5, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def load_reference_counts() -> np.ndarray:
    """The bundled bench count matrix (canonical Bell order)."""
    from importlib import resources

    ref = resources.files("fibersdc.data").joinpath("characterization_counts.txt")
    with resources.as_file(ref) as path:
        return load_counts(path)


def load_counts(path) -> np.ndarray:
    """Read a whitespace-separated 4x4 integer count matrix.

    `#` starts a comment; four data rows of four fields each are required.
    """
    rows = []
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read counts file {path}: {exc}") from exc
    with fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ConfigError(f"count rows need 4 entries, got: {raw!r}")
            try:
                rows.append([int(p) for p in parts])
            except ValueError as exc:
                raise ConfigError(f"bad count entry in line: {raw!r}") from exc
    if len(rows) != 4:
        raise ConfigError(f"expected 4 count rows, got {len(rows)}")
    return np.array(rows, dtype=np.int64)


def save_counts(path, counts) -> None:
    m = np.asarray(counts)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# rows: sent class, columns: verdict, canonical Bell order\n")
        for row in m:
            fh.write(" ".join(str(int(v)) for v in row) + "\n")
