"""Score-guided progressive masking-level scheduler.

Each epoch the scheduler scores the clean level and the current frontier
level with a frequency memory bank, trains on the argmin, and unlocks the
next level when the frontier's relative validation change stalls below a
dynamically adjusted threshold.  The scheduler is evaluator-agnostic: any
callable (epoch, level) -> score drives it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

from .errors import InvalidLevelError, UndefinedBaselineError

Evaluator = Callable[[int, int], float]

LEVELS = (1, 2, 3, 4)
MAX_LEVEL = 4


def relative_change(q_prev: float, q_curr: float) -> float:
    """(q_curr - q_prev) / q_prev; the baseline must be positive."""
    if q_prev <= 0:
        raise UndefinedBaselineError(f"baseline score must be positive, got {q_prev}")
    return (q_curr - q_prev) / q_prev


def dynamic_threshold(tau_init: float, dq_max: float, dq: float, epsilon: float) -> float:
    """tau = tau_init * dq_max / (|dq| + epsilon)."""
    return tau_init * dq_max / (abs(dq) + epsilon)


@dataclass(frozen=True)
class CurriculumState:
    """Scheduler state: frontier level p, selection counts, stall tracking."""

    p: int = 2
    counts: tuple[int, int, int, int] = (1, 1, 1, 1)
    dq_max: float = float("-inf")
    tau_init: float = 0.15
    epsilon: float = 1e-6
    last_q: dict[int, float] = field(default_factory=dict)
    epoch: int = 0
    bank_includes_clean: bool = False  # follow the memory-bank sum without the clean term by default

    def count(self, level: int) -> int:
        return self.counts[level - 1]


def severity_score(state: CurriculumState, level: int, q: float) -> float:
    """Memory-bank score: clean uses its own count, the frontier sums the masked counts."""
    if level == 1:
        return state.count(1) * q
    if level == state.p:
        levels = LEVELS if state.bank_includes_clean else LEVELS[1:]
        return sum(state.count(l) for l in levels) * q
    raise InvalidLevelError(f"level must be 1 or the frontier {state.p}, got {level}")


def select_level(s_clean: float, s_frontier: float, p: int) -> int:
    """Argmin of the two candidate scores; ties prefer the clean level."""
    return 1 if s_clean <= s_frontier else p


@dataclass(frozen=True)
class EpochRecord:
    t: int
    chosen: int
    p: int
    counts: tuple[int, int, int, int]
    dq: float | None
    tau: float | None
    q_clean: float
    q_p: float

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "chosen": self.chosen,
            "p": self.p,
            "N": list(self.counts),
            "dq": self.dq,
            "tau": self.tau,
            "q_clean": self.q_clean,
            "q_p": self.q_p,
        }


def step(state: CurriculumState, q_clean: float, q_p: float) -> tuple[CurriculumState, int, EpochRecord]:
    """Advance one epoch given the two validation scores.

    When the frontier wins the argmin, the relative change of its score
    against the previous epoch at the same level decides the upgrade: a
    change below the dynamic threshold unlocks the next level (resetting the
    stall tracker).  The first frontier epoch after an unlock has no
    same-level predecessor and skips the check.
    """
    t = state.epoch + 1
    eval_level = state.p
    counts = list(state.counts)
    p = state.p
    dq_max = state.dq_max
    dq: float | None = None
    tau: float | None = None

    s_clean = severity_score(state, 1, q_clean)
    s_frontier = severity_score(state, state.p, q_p)
    chosen = select_level(s_clean, s_frontier, state.p)

    if chosen != 1:
        q_prev = state.last_q.get(eval_level)
        if q_prev is not None and q_prev > 0:
            dq = relative_change(q_prev, q_p)
            dq_max = max(dq_max, abs(dq))
            tau = dynamic_threshold(state.tau_init, dq_max, dq, state.epsilon)
            # dq_max == 0 means every observed change since the last unlock was
            # exactly zero; that is complete stagnation even though tau == 0
            stalled = abs(dq) < tau or dq_max == 0.0
            if stalled and p < MAX_LEVEL:
                p += 1
                chosen = p
                dq_max = float("-inf")
        counts[chosen - 1] += 1
    else:
        counts[0] += 1

    last_q = dict(state.last_q)
    last_q[1] = q_clean
    last_q[eval_level] = q_p
    new_state = replace(
        state,
        p=p,
        counts=tuple(counts),
        dq_max=dq_max,
        last_q=last_q,
        epoch=t,
    )
    record = EpochRecord(t, chosen, p, new_state.counts, dq, tau, q_clean, q_p)
    return new_state, chosen, record


def run(
    evaluator: Evaluator,
    epochs: int,
    tau_init: float = 0.15,
    epsilon: float = 1e-6,
    bank_includes_clean: bool = False,
) -> list[EpochRecord]:
    """Drive the scheduler for a fixed number of epochs and return the trace."""
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    state = CurriculumState(tau_init=tau_init, epsilon=epsilon, bank_includes_clean=bank_includes_clean)
    records = []
    for t in range(1, epochs + 1):
        q_clean = float(evaluator(t, 1))
        q_p = float(evaluator(t, state.p))
        state, _, record = step(state, q_clean, q_p)
        records.append(record)
    return records


def write_trace_jsonl(records: list[EpochRecord], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json()) + "\n")


def summarize(records: list[EpochRecord]) -> dict:
    """Final frontier, selection histogram, and the epochs where upgrades happened."""
    upgrades = [r.t for prev, r in zip([None] + records[:-1], records) if prev is not None and r.p > prev.p]
    if records and records[0].p > 2:
        upgrades.insert(0, records[0].t)
    return {
        "epochs": len(records),
        "final_p": records[-1].p if records else 2,
        "N": list(records[-1].counts) if records else [1, 1, 1, 1],
        "chosen_histogram": {level: sum(1 for r in records if r.chosen == level) for level in LEVELS},
        "upgrade_epochs": upgrades,
    }


# Synthetic evaluator families for simulation and testing.


def constant_evaluator(score: float = 50.0) -> Evaluator:
    return lambda t, level: score


def linear_evaluator(start: float = 30.0, gain: float = 1.0) -> Evaluator:
    """Score improves linearly with epoch; masked levels trail the clean level."""
    return lambda t, level: start + gain * t - 2.0 * (level - 1)


def noisy_plateau_evaluator(seed: int = 0, base: float = 50.0, noise: float = 2.0) -> Evaluator:
    def evaluate(t: int, level: int) -> float:
        h = (t * 2654435761 + level * 40503 + seed * 97) % 1000
        return base + noise * (h / 500.0 - 1.0)

    return evaluate
