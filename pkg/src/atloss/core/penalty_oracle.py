"""Exhaustive check of the binary penalty as a QUBO objective.

For a fixed observation x of k cells, every one of the 2^k forecast indicator
patterns is encoded as a saturated forecast y = theta +- margin. The overall
penalty must be zero only at the pattern f(x), and the sharp, noise-free AT
loss must order patterns exactly as the penalty does.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from atloss.config import DEFAULT_THRESHOLD, ORACLE_MAX_CELLS
from atloss.core.exceptions import OracleSizeError
from atloss.core.loss import at_loss, at_loss_cells, binary_penalty, indicator, overall_penalty
from atloss.core.metrics import contingency
from atloss.core.params import AtLossParams
from atloss.utils.seeding import derive_rng

logger = logging.getLogger(__name__)

CHUNK_ROWS = 1 << 15

# Above this size the per-assignment calls into the public ops are skipped
EXHAUSTIVE_CALL_LIMIT = 12


@dataclass
class OracleReport:
    k: int
    assignments: int
    min_penalty: int
    argmin_unique: bool
    argmin_matches: bool
    penalty_matches_xor: bool
    penalty_matches_table: bool
    ranking_consistent: bool
    max_limit_error: float
    counterexample: str = ""
    groups: list[tuple[int, int, float, float]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (
            self.min_penalty == 0
            and self.argmin_unique
            and self.argmin_matches
            and self.penalty_matches_xor
            and self.penalty_matches_table
            and self.ranking_consistent
        )

    def to_record(self) -> dict:
        return {
            "k": self.k,
            "assignments": self.assignments,
            "min_penalty": self.min_penalty,
            "argmin_unique": self.argmin_unique,
            "argmin_matches": self.argmin_matches,
            "penalty_matches_xor": self.penalty_matches_xor,
            "penalty_matches_table": self.penalty_matches_table,
            "ranking_consistent": self.ranking_consistent,
            "max_limit_error": self.max_limit_error,
            "counterexample": self.counterexample,
            "passed": self.passed,
        }


def _bits(start: int, stop: int, k: int) -> np.ndarray:
    """Rows of the binary expansion of start..stop-1, least significant cell first."""
    codes = np.arange(start, stop, dtype=np.int64)[:, None]
    return (codes >> np.arange(k, dtype=np.int64)) & 1


def run_penalty_oracle(
    k: int,
    seed: int = 0,
    theta: float = DEFAULT_THRESHOLD,
    tau: float = 0.01,
    margin: float = 0.5,
    limit_tolerance: float = 1e-9,
    x: np.ndarray | None = None,
) -> OracleReport:
    """
    Enumerates all 2^k forecast patterns for a random (or given) observation.

    Raises:
        OracleSizeError: k is not in [1, 20].
    """
    if k < 1 or k > ORACLE_MAX_CELLS:
        raise OracleSizeError(f"k must lie in [1, {ORACLE_MAX_CELLS}], got {k}")
    if x is None:
        x = derive_rng(seed, 7).uniform(0.0, 2.0 * theta, k)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (k,):
        raise OracleSizeError(f"x must have shape ({k},), got {x.shape}")

    params = AtLossParams(tau=tau, theta=theta, deterministic=True)
    fx = indicator(x, theta)
    truth_code = int(np.sum(fx << np.arange(k)))
    total = 1 << k

    penalties = np.empty(total, dtype=np.int64)
    losses = np.empty(total)
    table_ok = True
    for start in range(0, total, CHUNK_ROWS):
        stop = min(start + CHUNK_ROWS, total)
        bits = _bits(start, stop, k)
        y = np.where(bits == 1, theta + margin, theta - margin)
        diff = fx[None, :] - bits
        penalties[start:stop] = np.sum(diff * diff, axis=1)
        cell_losses, _ = at_loss_cells(np.broadcast_to(x, y.shape), y, params)
        losses[start:stop] = cell_losses.mean(axis=1)
        misses = np.sum((fx[None, :] == 1) & (bits == 0), axis=1)
        false_alarms = np.sum((fx[None, :] == 0) & (bits == 1), axis=1)
        table_ok &= bool(np.array_equal(misses + false_alarms, penalties[start:stop]))

    xor_ok = True
    counterexample = ""
    if k <= EXHAUSTIVE_CALL_LIMIT:
        for code in range(total):
            y = np.where(_bits(code, code + 1, k)[0] == 1, theta + margin, theta - margin)
            brute = sum(binary_penalty(float(a), float(b), theta) for a, b in zip(x, y))
            table = contingency(x, y, theta)
            value = overall_penalty(x, y, theta)
            if value != brute or value != penalties[code]:
                xor_ok = False
                counterexample = counterexample or f"pattern {code}: penalty {value} vs xor {brute}"
            if table.misses + table.false_alarms != value:
                table_ok = False
                counterexample = counterexample or f"pattern {code}: table disagrees"
            if abs(at_loss(x, y, params).value - losses[code]) > limit_tolerance:
                xor_ok = False
                counterexample = counterexample or f"pattern {code}: at_loss mismatch"

    min_penalty = int(penalties.min())
    argmins = np.flatnonzero(penalties == min_penalty)

    ranking_ok = True
    groups = []
    previous_high = -np.inf
    for p in np.unique(penalties):
        group = losses[penalties == p]
        low, high = float(group.min()), float(group.max())
        groups.append((int(p), int(group.size), low, high))
        if high - low > limit_tolerance or low <= previous_high:
            ranking_ok = False
            counterexample = counterexample or f"penalty {p}: loss range [{low}, {high}]"
        previous_high = high

    limit_error = float(np.max(np.abs(losses - penalties / k)))
    report = OracleReport(
        k=k,
        assignments=total,
        min_penalty=min_penalty,
        argmin_unique=argmins.size == 1,
        argmin_matches=bool(argmins.size == 1 and argmins[0] == truth_code),
        penalty_matches_xor=xor_ok,
        penalty_matches_table=table_ok,
        ranking_consistent=ranking_ok,
        max_limit_error=limit_error,
        counterexample=counterexample,
        groups=groups,
    )
    logger.info(
        f"Penalty oracle k={k}: {total} patterns, ranking "
        f"{'consistent' if ranking_ok else 'INCONSISTENT'}, limit error {limit_error:.3g}"
    )
    return report
