"""Brute-force reference implementations the real code is checked against.

These recompute everything from first principles (record logs, not the
production counters) and stay deliberately independent of the package
internals they oracle.
"""

from __future__ import annotations

from fractions import Fraction


def ranking_oracle(test_log: list[tuple[str, str, str]], divisions: tuple[str, ...]):
    """Red-zone ranking recomputed from the raw result log.

    test_log rows are (holder, division, result). Returns the ordered
    division list (descending ratio, lexicographic ties) and the untested
    set, counting every logged test cumulatively.
    """
    tests: dict[str, int] = {d: 0 for d in divisions}
    positives: dict[str, int] = {d: 0 for d in divisions}
    for _holder, division, result in test_log:
        tests[division] += 1
        if result == "Positive":
            positives[division] += 1
    eligible = [d for d in divisions if tests[d] >= 1]
    eligible.sort(key=lambda d: (-Fraction(positives[d], tests[d]), d))
    untested = sorted(d for d in divisions if tests[d] == 0)
    return eligible, untested


def levels_oracle(
    test_log: list[tuple[str, str, str]], divisions: tuple[str, ...]
) -> dict[str, int]:
    """Priority levels by enumeration: latest result per holder, then sort
    all tested holders by (is_positive, red-zone rank of their division)."""
    ranking, _ = ranking_oracle(test_log, divisions)
    rank = {d: i + 1 for i, d in enumerate(ranking)}
    latest: dict[str, tuple[str, str]] = {}
    for holder, division, result in test_log:
        latest[holder] = (division, result)
    d_count = len(divisions)
    return {
        holder: rank[division] + (d_count if result == "Positive" else 0)
        for holder, (division, result) in latest.items()
    }


class PushSimulator:
    """Recomputes inoculation eligibility from first principles each step.

    Tracks nothing but the level map, per-holder dose counts, vaccine
    binding and stock; every accept/reject decision is derived fresh by
    scanning all holders, so counter bookkeeping bugs in the real
    implementation cannot hide here.
    """

    def __init__(self, levels: dict[str, int], dose_limits: dict[str, int],
                 stock: dict[str, int], initial_doses: dict[str, int] | None = None,
                 binding: dict[str, str] | None = None):
        self.levels = dict(levels)
        self.dose_limits = dict(dose_limits)  # vaccine -> limit
        self.stock = dict(stock)  # vaccine -> storage
        self.doses = dict(initial_doses or {})  # holder -> dose count
        self.binding = dict(binding or {})  # holder -> vaccine

    def _limit_of(self, holder: str) -> int | None:
        vaccine = self.binding.get(holder)
        return None if vaccine is None else self.dose_limits[vaccine]

    def _active(self, holder: str) -> bool:
        limit = self._limit_of(holder)
        done = self.doses.get(holder, 0)
        return limit is None or done < limit

    def first_dose_levels_pending(self) -> list[int]:
        return [
            level
            for holder, level in self.levels.items()
            if self.doses.get(holder, 0) == 0
        ]

    def completion_levels_pending(self) -> list[int]:
        return [
            level for holder, level in self.levels.items() if self._active(holder)
        ]

    def legal(self, holder: str, vaccine: str) -> str | None:
        """None when the push is legal, else the expected error name."""
        if holder not in self.levels:
            return "HolderNotInCampaign"
        if not self._active(holder):
            return "DoseLimitReached"
        if self.stock.get(vaccine, 0) < 1:
            return "OutOfStock"
        bound = self.binding.get(holder)
        if bound is not None and bound != vaccine:
            return "VaccineMismatch"
        first_pending = self.first_dose_levels_pending()
        if first_pending:
            target = min(first_pending)
            if self.levels[holder] != target or self.doses.get(holder, 0) != 0:
                return "PriorityViolation"
            return None
        completion_pending = self.completion_levels_pending()
        target = min(completion_pending) if completion_pending else None
        if target is None or self.levels[holder] != target:
            return "PriorityViolation"
        return None

    def push(self, holder: str, vaccine: str) -> str | None:
        error = self.legal(holder, vaccine)
        if error is None:
            self.stock[vaccine] -= 1
            self.doses[holder] = self.doses.get(holder, 0) + 1
            self.binding.setdefault(holder, vaccine)
        return error
