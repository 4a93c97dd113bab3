"""Covid test records and per-division aggregate statistics.

Divisions are configuration; the default is the eight divisions of
Bangladesh. The red-zone ranking orders divisions by the ratio of positive
results to total tests, the quantity that drives vaccination priority.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

BANGLADESH_DIVISIONS = (
    "Barisal",
    "Chattogram",
    "Dhaka",
    "Khulna",
    "Mymensingh",
    "Rajshahi",
    "Rangpur",
    "Sylhet",
)


class TestResult(str, Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"


@dataclass(frozen=True)
class TestRecord:
    holder_id: str
    issuer_id: str
    result: TestResult
    division: str
    sequence: int

    def state_value(self) -> dict:
        return {
            "holder_id": self.holder_id,
            "issuer_id": self.issuer_id,
            "result": self.result.value,
            "division": self.division,
            "sequence": self.sequence,
        }


@dataclass
class LocationStats:
    division: str
    total_tests: int = 0
    total_positives: int = 0
    total_vaccinated: int = 0

    def ratio(self) -> Fraction | None:
        if self.total_tests < 1:
            return None
        return Fraction(self.total_positives, self.total_tests)

    def state_value(self) -> dict:
        return {
            "division": self.division,
            "total_tests": self.total_tests,
            "total_positives": self.total_positives,
            "total_vaccinated": self.total_vaccinated,
        }


@dataclass
class TestingState:
    divisions: tuple[str, ...]
    current: dict = field(default_factory=dict)  # holder_id -> TestRecord
    stats: dict = field(default_factory=dict)  # division -> LocationStats

    def __post_init__(self) -> None:
        for division in self.divisions:
            self.stats.setdefault(division, LocationStats(division))

    def apply_result(self, record: TestRecord) -> None:
        # latest record wins for the holder; counts stay cumulative
        self.current[record.holder_id] = record
        stats = self.stats[record.division]
        stats.total_tests += 1
        if record.result is TestResult.POSITIVE:
            stats.total_positives += 1

    def record_vaccination(self, division: str) -> None:
        self.stats[division].total_vaccinated += 1

    def red_zone_ranking(self) -> tuple[list[tuple[str, Fraction]], list[str]]:
        """Divisions with at least one test, descending by positive ratio.

        Ties break lexicographically; untested divisions are excluded and
        returned separately.
        """
        eligible = []
        untested = []
        for division in self.divisions:
            ratio = self.stats[division].ratio()
            if ratio is None:
                untested.append(division)
            else:
                eligible.append((division, ratio))
        eligible.sort(key=lambda item: (-item[1], item[0]))
        return eligible, sorted(untested)

    def state_value(self) -> dict:
        return {
            "current": {h: r.state_value() for h, r in self.current.items()},
            "stats": {d: s.state_value() for d, s in self.stats.items()},
        }
