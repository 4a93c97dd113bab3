"""Vaccine inventory, the priority campaign snapshot and dose gating.

A campaign freezes the red-zone ranking and assigns every tested holder a
level in 1..2D (D = configured division count): negatives get the rank of
their division, positives get D + rank. Inoculation then runs in two
phases: all first doses in level order, then remaining doses in level
order; a holder leaves the list exactly when reaching the vaccine's dose
limit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import canonical
from .errors import PriorityViolation


@dataclass
class Vaccine:
    vaccine_id: str
    name: str
    storage: int
    dose_limit: int  # immutable after creation

    def record(self) -> dict:
        return {
            "vaccine_id": self.vaccine_id,
            "name": self.name,
            "storage": self.storage,
            "dose_limit": self.dose_limit,
        }


@dataclass
class DoseState:
    holder_id: str
    vaccine_id: str  # bound at first dose, never changes
    dose_number: int
    level: int  # campaign level at which doses were given

    def state_value(self) -> dict:
        return {
            "holder_id": self.holder_id,
            "vaccine_id": self.vaccine_id,
            "dose_number": self.dose_number,
            "level": self.level,
        }


@dataclass
class Campaign:
    campaign_id: str
    ranking: list[str]  # division order at snapshot time
    levels: dict  # holder_id -> level in 1..2D
    first_dose_remaining: dict  # level -> holders at that level still on dose 0
    completion_remaining: dict  # level -> holders at that level below dose limit
    list_digest: str
    active: bool = True
    doses_given: int = 0
    remaining: set = field(default_factory=set)  # the vaccination list

    @classmethod
    def build(
        cls,
        campaign_id: str,
        ranking: list[str],
        levels: dict,
        dose_of: dict,
    ) -> "Campaign":
        fdr: dict[int, int] = {}
        cr: dict[int, int] = {}
        for holder, level in levels.items():
            dose = dose_of.get(holder, 0)
            if dose == 0:
                fdr[level] = fdr.get(level, 0) + 1
            cr[level] = cr.get(level, 0) + 1
        return cls(
            campaign_id=campaign_id,
            ranking=list(ranking),
            levels=dict(levels),
            first_dose_remaining=fdr,
            completion_remaining=cr,
            list_digest=priority_list_digest(levels),
            remaining=set(levels),
        )

    def ordered_list(self) -> list[tuple[str, int]]:
        return sorted(self.levels.items(), key=lambda item: (item[1], item[0]))

    def first_dose_level(self) -> int | None:
        """Lowest level that still has holders waiting for a first dose."""
        pending = [lvl for lvl, n in self.first_dose_remaining.items() if n > 0]
        return min(pending) if pending else None

    def completion_level(self) -> int | None:
        pending = [lvl for lvl, n in self.completion_remaining.items() if n > 0]
        return min(pending) if pending else None

    def check_turn(self, holder_id: str, dose_number: int) -> None:
        """The phase-ordering rule; raises PriorityViolation off-turn."""
        level = self.levels[holder_id]
        first_level = self.first_dose_level()
        if first_level is not None:
            if level != first_level or dose_number != 0:
                raise PriorityViolation(
                    f"level {first_level} first doses are still pending"
                )
            return
        completion_level = self.completion_level()
        if completion_level is None or level != completion_level:
            raise PriorityViolation(
                f"completion is at level {completion_level}, holder is at {level}"
            )

    def record_dose(self, holder_id: str, new_dose_number: int, dose_limit: int) -> bool:
        """Updates counters after a dose; returns True when the holder completes."""
        level = self.levels[holder_id]
        if new_dose_number == 1:
            self.first_dose_remaining[level] -= 1
        self.doses_given += 1
        if new_dose_number >= dose_limit:
            self.completion_remaining[level] -= 1
            self.remaining.discard(holder_id)
            return True
        return False

    def state_value(self) -> dict:
        return {
            "campaign_id": self.campaign_id,
            "ranking": list(self.ranking),
            "levels": dict(self.levels),
            "first_dose_remaining": {str(k): v for k, v in self.first_dose_remaining.items()},
            "completion_remaining": {str(k): v for k, v in self.completion_remaining.items()},
            "list_digest": self.list_digest,
            "active": self.active,
            "doses_given": self.doses_given,
            "remaining": sorted(self.remaining),
        }

    def snapshot(self) -> dict:
        """The export format; its digest must match the ledger anchor."""
        return {
            "campaign_id": self.campaign_id,
            "ranking": list(self.ranking),
            "holders": [
                {"holder_id": h, "level": lvl} for h, lvl in self.ordered_list()
            ],
            "first_dose_remaining": {str(k): v for k, v in sorted(self.first_dose_remaining.items())},
            "completion_remaining": {str(k): v for k, v in sorted(self.completion_remaining.items())},
            "active": self.active,
            "doses_given": self.doses_given,
            "list_digest": self.list_digest,
        }


def priority_list_digest(levels: dict) -> str:
    """Digest of the full ordered priority list, the on-chain anchor value."""
    ordered = sorted(levels.items(), key=lambda item: (item[1], item[0]))
    return canonical.digest([[holder, level] for holder, level in ordered])


def assign_levels(
    tested: dict, ranking: list[str], division_count: int
) -> dict:
    """holder -> level; negatives rank 1..D by division rank, positives D+rank.

    `tested` maps holder_id -> (division, is_positive).
    """
    rank_of = {division: i + 1 for i, division in enumerate(ranking)}
    levels = {}
    for holder, (division, is_positive) in tested.items():
        rank = rank_of[division]
        levels[holder] = division_count + rank if is_positive else rank
    return levels


@dataclass
class VaccinationState:
    vaccines: dict = field(default_factory=dict)  # vaccine_id -> Vaccine
    names: set = field(default_factory=set)
    doses: dict = field(default_factory=dict)  # holder_id -> DoseState
    campaign: Campaign | None = None

    def add_vaccine(self, vaccine: Vaccine) -> None:
        self.vaccines[vaccine.vaccine_id] = vaccine
        self.names.add(vaccine.name)

    def dose_numbers(self) -> dict:
        return {h: d.dose_number for h, d in self.doses.items()}

    def completed(self, holder_id: str) -> bool:
        dose = self.doses.get(holder_id)
        if dose is None:
            return False
        return dose.dose_number >= self.vaccines[dose.vaccine_id].dose_limit

    def state_value(self) -> dict:
        return {
            "vaccines": {vid: v.record() for vid, v in self.vaccines.items()},
            "doses": {h: d.state_value() for h, d in self.doses.items()},
            "campaign": self.campaign.state_value() if self.campaign else None,
        }
