"""The registry node: one deterministic state machine over the ledger.

Every mutating operation validates against current state, commits exactly
one transaction (mined immediately into a block), applies the recorded
outcome, and emits exactly one event. The apply step reads only the
transaction payload, so replaying the chain from genesis reconstructs the
terminal state bit-exactly; the state digest is the proof.

All mutations are serialized through one lock; reads return data from the
latest committed state.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Optional

from . import canonical, credentials, registry, testing, vaccination
from .errors import (
    CampaignInProgress,
    DoseLimitReached,
    DuplicateRegistration,
    DuplicateVaccine,
    HolderNotInCampaign,
    InvalidParameters,
    InvalidRole,
    NoActiveCampaign,
    NonPositiveDelta,
    NoTestedHolders,
    NoTestOnRecord,
    NotPending,
    MalformedProfile,
    NotVaccinated,
    OutOfStock,
    SignInFailed,
    Unauthorized,
    UnknownActor,
    UnknownDivision,
    UnknownHolder,
    UnknownVaccine,
    VaccineMismatch,
    WalletBanned,
)
from .ledger import Blockchain, ChainConfig, ChainWriter, Transaction
from .registry import Actor, PermissionMask, RegistryState, Role, Status
from .testing import BANGLADESH_DIVISIONS, TestingState, TestRecord, TestResult
from .vaccination import Campaign, DoseState, Vaccine, VaccinationState

ROLE_FLAGS = {
    Role.ISSUER: "issuer",
    Role.HOLDER: "holder",
    Role.AUTHORITY: "authority",
    Role.VACCINE_PROVIDER: "vaccine provider",
}


@dataclass(frozen=True)
class NodeConfig:
    authority_wallet: str = "0xA000000000000000"
    authority_password: str = "change-me"
    authority_name: str = "Central Health Authority"
    divisions: tuple[str, ...] = BANGLADESH_DIVISIONS
    difficulty: int = 12
    max_txs_per_block: int = 100
    nid_allowlist: frozenset = frozenset()
    licence_allowlist: frozenset = frozenset()
    kdf_log2_n: int = 14

    def chain_config(self) -> ChainConfig:
        return ChainConfig(
            difficulty=self.difficulty, max_txs_per_block=self.max_txs_per_block
        )


@dataclass(frozen=True)
class Event:
    sequence: int
    kind: str
    affected: tuple[str, ...]
    tx_id: str

    def to_dict(self) -> dict:
        return {
            "sequence": self.sequence,
            "kind": self.kind,
            "affected": list(self.affected),
            "tx_id": self.tx_id,
        }


@dataclass(frozen=True)
class DoseEvent:
    holder_id: str
    vaccine_id: str
    dose_number: int
    level: int
    completed: bool
    tx_id: str

    def to_dict(self) -> dict:
        return {
            "holder_id": self.holder_id,
            "vaccine_id": self.vaccine_id,
            "dose_number": self.dose_number,
            "level": self.level,
            "completed": self.completed,
            "tx_id": self.tx_id,
        }


class Node:
    """Single-writer facade over the whole registry."""

    def __init__(
        self,
        config: NodeConfig,
        chain: Blockchain | None = None,
        writer: ChainWriter | None = None,
        bootstrap: bool = True,
    ):
        self.config = config
        self.chain = chain if chain is not None else Blockchain(config.chain_config())
        self.writer = writer
        self.registry = RegistryState()
        self.testing = TestingState(divisions=config.divisions)
        self.vaccination = VaccinationState()
        self.events: list[Event] = []
        self._seq = 0
        self._lock = threading.RLock()
        for height, tx in self.chain.iter_transactions():
            self._apply(tx, height)
            self._seq = max(self._seq, tx.timestamp)
        if bootstrap and self.registry.authority_sid is None:
            self._bootstrap()

    # ----- commit machinery -----

    def _commit(
        self,
        kind: str,
        payload_value: canonical.Value,
        submitter: str,
        anchors: list[tuple[str, str]] = (),
    ) -> tuple[Transaction, int]:
        tx = Transaction.build(kind, payload_value, submitter, self._seq + 1, anchors)
        self.chain.append_transaction(tx)
        block = self.chain.mine_block()
        if self.writer is not None:
            self.writer.append(block)
        self._seq = tx.timestamp
        self._apply(tx, block.height)
        return tx, block.height

    def _apply(self, tx: Transaction, height: int) -> None:
        payload = tx.payload_value()
        handler = getattr(self, f"_apply_{tx.kind}")
        handler(payload, tx, height)

    def _emit(self, kind: str, affected: list[str], tx_id: str) -> None:
        self.events.append(
            Event(
                sequence=len(self.events) + 1,
                kind=kind,
                affected=tuple(affected),
                tx_id=tx_id,
            )
        )

    def _bootstrap(self) -> None:
        """Creates and approves the single governing authority."""
        wallet = self.config.authority_wallet
        sid = self._make_sid(wallet, Role.AUTHORITY)
        combined = registry.combined_credential_digest(
            wallet, sid, self.config.authority_password
        )
        self._commit(
            "signup",
            {
                "sid": sid,
                "role": Role.AUTHORITY.value,
                "wallet": wallet,
                "profile": {"name": self.config.authority_name},
                "credential_hash": combined,
            },
            wallet,
        )
        actor = self.registry.get(sid)
        self._commit(
            "approval",
            {"sid": sid, "decision": "approve", "outcome": Status.APPROVED.value,
             "reason": None},
            sid,
            anchors=[(f"actor:{sid}", canonical.digest(actor.identity_record()))],
        )

    def _make_sid(self, wallet: str, role: Role) -> str:
        return "SID" + canonical.digest(["sid", wallet, role.value, self._seq + 1])[:13]

    # ----- registry operations -----

    def request_signup(self, role: str, wallet: str, profile: dict, password: str) -> str:
        with self._lock:
            try:
                role_enum = Role(role)
            except ValueError:
                raise InvalidRole(f"unknown role {role!r}")
            if role_enum is Role.AUTHORITY:
                raise InvalidRole("the authority is fixed at bootstrap")
            if not isinstance(wallet, str) or not wallet.strip():
                raise MalformedProfile("wallet must be a non-empty string")
            if wallet in self.registry.banned_wallets:
                raise WalletBanned(f"wallet {wallet} is permanently banned")
            if self.registry.is_registered(wallet, role_enum):
                raise DuplicateRegistration(
                    f"wallet already registered for role {role_enum.value}"
                )
            clean = registry.validate_profile(role_enum, profile, self.config.divisions)
            sid = self._make_sid(wallet, role_enum)
            combined = registry.combined_credential_digest(wallet, sid, password)
            self._commit(
                "signup",
                {
                    "sid": sid,
                    "role": role_enum.value,
                    "wallet": wallet,
                    "profile": clean,
                    "credential_hash": combined,
                },
                wallet,
            )
            return sid

    def _apply_signup(self, payload: dict, tx: Transaction, height: int) -> None:
        role = Role(payload["role"])
        salt = canonical.digest(["salt", tx.tx_id])[:32]
        actor = Actor(
            sid=payload["sid"],
            wallet=payload["wallet"],
            role=role,
            status=Status.PENDING,
            credential_hash=payload["credential_hash"],
            credential_check=registry.credential_check(
                payload["credential_hash"], salt, self.config.kdf_log2_n
            ),
            profile=dict(payload["profile"]),
            salt=salt,
            created_seq=tx.timestamp,
        )
        self.registry.add_pending(actor)
        self._emit("signup", [actor.sid], tx.tx_id)

    def approve_signup(self, caller: str, target_sid: str, decision: str) -> tuple[Status, Optional[str]]:
        with self._lock:
            self._require_authority(caller)
            target = self.registry.get(target_sid)
            if target is None:
                raise UnknownActor(f"no actor {target_sid}")
            if target.status is not Status.PENDING:
                raise NotPending(f"actor is {target.status.value}")
            if decision not in ("approve", "reject"):
                raise InvalidParameters("decision must be approve or reject")
            reason: Optional[str] = None
            if decision == "approve" and self._credentials_listed(target):
                outcome = Status.APPROVED
            else:
                if decision == "approve":
                    reason = "CredentialMismatch"
                outcome = Status.REJECTED
                if self.registry.rejections.get(target.wallet, 0) + 1 >= registry.BAN_THRESHOLD:
                    outcome = Status.BANNED
            anchors = []
            if outcome is Status.APPROVED:
                anchors.append(
                    (f"actor:{target_sid}", canonical.digest(target.identity_record()))
                )
            self._commit(
                "approval",
                {"sid": target_sid, "decision": decision,
                 "outcome": outcome.value, "reason": reason},
                caller,
                anchors=anchors,
            )
            return outcome, reason

    def _credentials_listed(self, actor: Actor) -> bool:
        if actor.role is Role.HOLDER:
            return actor.profile.get("nid") in self.config.nid_allowlist
        if actor.role in (Role.ISSUER, Role.VACCINE_PROVIDER):
            return actor.profile.get("licence") in self.config.licence_allowlist
        return False

    def _apply_approval(self, payload: dict, tx: Transaction, height: int) -> None:
        self.registry.set_status(payload["sid"], Status(payload["outcome"]))
        self._emit("approval", [payload["sid"], tx.submitter], tx.tx_id)

    def sign_in(self, wallet: str, sid: str, password: str) -> str:
        with self._lock:
            combined = registry.combined_credential_digest(wallet, sid, password)
            for role in registry.SIGN_IN_ORDER:
                actor = self.registry.find_credential(sid, wallet, role)
                if actor is None:
                    continue
                check = registry.credential_check(
                    combined, actor.salt, self.config.kdf_log2_n
                )
                if check == actor.credential_check and actor.status is Status.APPROVED:
                    return ROLE_FLAGS[role]
            raise SignInFailed("no matching approved credential")

    def set_permission(self, caller: str, mask: dict) -> PermissionMask:
        with self._lock:
            actor = self.registry.approved(caller, Role.HOLDER)
            if actor is None:
                raise Unauthorized("only an approved holder can set permissions")
            parsed = PermissionMask.from_dict(mask)
            self._commit(
                "set_permission",
                {"holder_id": caller, "mask": parsed.to_dict()},
                caller,
                anchors=[(f"permissions:{caller}", canonical.digest(parsed.to_dict()))],
            )
            return parsed

    def _apply_set_permission(self, payload: dict, tx: Transaction, height: int) -> None:
        self.registry.set_permissions(
            payload["holder_id"], PermissionMask.from_dict(payload["mask"])
        )
        self._emit("set_permission", [payload["holder_id"]], tx.tx_id)

    # ----- testing operations -----

    def issue_result(self, caller: str, holder_id: str, result: str) -> TestRecord:
        with self._lock:
            issuer = self.registry.approved(caller, Role.ISSUER)
            if issuer is None:
                raise Unauthorized("only an approved issuer can issue results")
            holder = self.registry.approved(holder_id, Role.HOLDER)
            if holder is None:
                raise UnknownHolder(f"no approved holder {holder_id}")
            try:
                result_enum = TestResult(result)
            except ValueError:
                raise InvalidParameters("result must be Positive or Negative")
            division = holder.profile["division"]
            cert_digest = canonical.digest(
                credentials.test_certificate_fields(
                    holder.profile["name"],
                    holder.profile["age"],
                    holder.profile.get("photo_digest"),
                    division,
                    result_enum.value,
                    issuer.profile["name"],
                )
            )
            self._commit(
                "issue_result",
                {
                    "holder_id": holder_id,
                    "issuer_id": caller,
                    "result": result_enum.value,
                    "division": division,
                },
                caller,
                anchors=[(f"testcert:{holder_id}", cert_digest)],
            )
            return self.testing.current[holder_id]

    def _apply_issue_result(self, payload: dict, tx: Transaction, height: int) -> None:
        record = TestRecord(
            holder_id=payload["holder_id"],
            issuer_id=payload["issuer_id"],
            result=TestResult(payload["result"]),
            division=payload["division"],
            sequence=tx.timestamp,
        )
        self.testing.apply_result(record)
        self._emit("issue_result", [payload["holder_id"], payload["issuer_id"]], tx.tx_id)

    def location_stats(self, division: str) -> testing.LocationStats:
        with self._lock:
            if division not in self.config.divisions:
                raise UnknownDivision(f"unknown division {division!r}")
            return self.testing.stats[division]

    def red_zone_ranking(self):
        with self._lock:
            return self.testing.red_zone_ranking()

    # ----- vaccination operations -----

    def add_vaccine(self, caller: str, name: str, storage: int, dose_limit: int) -> Vaccine:
        with self._lock:
            self._require_authority(caller)
            if not isinstance(name, str) or not name.strip():
                raise InvalidParameters("vaccine name must be non-empty")
            if not isinstance(storage, int) or isinstance(storage, bool) or storage < 0:
                raise InvalidParameters("storage must be a non-negative integer")
            if not isinstance(dose_limit, int) or isinstance(dose_limit, bool) or dose_limit < 1:
                raise InvalidParameters("dose_limit must be >= 1")
            if name in self.vaccination.names:
                raise DuplicateVaccine(f"vaccine {name!r} already exists")
            vaccine_id = "VAX" + canonical.digest(["vaccine", name, self._seq + 1])[:10]
            record = {
                "vaccine_id": vaccine_id,
                "name": name,
                "storage": storage,
                "dose_limit": dose_limit,
            }
            self._commit(
                "add_vaccine",
                record,
                caller,
                anchors=[(f"vaccine:{vaccine_id}", canonical.digest(record))],
            )
            return self.vaccination.vaccines[vaccine_id]

    def _apply_add_vaccine(self, payload: dict, tx: Transaction, height: int) -> None:
        self.vaccination.add_vaccine(
            Vaccine(
                vaccine_id=payload["vaccine_id"],
                name=payload["name"],
                storage=payload["storage"],
                dose_limit=payload["dose_limit"],
            )
        )
        self._emit("add_vaccine", [tx.submitter], tx.tx_id)

    def update_storage(self, caller: str, vaccine_id: str, delta: int) -> int:
        with self._lock:
            self._require_authority(caller)
            if not isinstance(delta, int) or isinstance(delta, bool) or delta < 1:
                raise NonPositiveDelta("storage can only grow, delta must be >= 1")
            vaccine = self.vaccination.vaccines.get(vaccine_id)
            if vaccine is None:
                raise UnknownVaccine(f"no vaccine {vaccine_id}")
            updated = vaccine.record()
            updated["storage"] += delta
            self._commit(
                "update_storage",
                {"vaccine_id": vaccine_id, "delta": delta,
                 "new_storage": updated["storage"]},
                caller,
                anchors=[(f"vaccine:{vaccine_id}", canonical.digest(updated))],
            )
            return vaccine.storage

    def _apply_update_storage(self, payload: dict, tx: Transaction, height: int) -> None:
        self.vaccination.vaccines[payload["vaccine_id"]].storage = payload["new_storage"]
        self._emit("update_storage", [tx.submitter], tx.tx_id)

    def prioritise(self, caller: str) -> Campaign:
        with self._lock:
            self._require_authority(caller)
            campaign = self.vaccination.campaign
            if campaign is not None and campaign.active and campaign.doses_given > 0:
                raise CampaignInProgress(
                    "close the running campaign before re-prioritising"
                )
            tested = {}
            for holder_id, record in self.testing.current.items():
                actor = self.registry.approved(holder_id, Role.HOLDER)
                if actor is None or self.vaccination.completed(holder_id):
                    continue
                tested[holder_id] = (
                    record.division,
                    record.result is TestResult.POSITIVE,
                )
            if not tested:
                raise NoTestedHolders("nobody with a test record to prioritise")
            ranking = [d for d, _ in self.testing.red_zone_ranking()[0]]
            levels = vaccination.assign_levels(
                tested, ranking, len(self.config.divisions)
            )
            campaign_id = "CMP" + canonical.digest(["campaign", self._seq + 1])[:10]
            list_digest = vaccination.priority_list_digest(levels)
            self._commit(
                "prioritise",
                {
                    "campaign_id": campaign_id,
                    "ranking": ranking,
                    "levels": {h: lvl for h, lvl in sorted(levels.items())},
                    "list_digest": list_digest,
                },
                caller,
                anchors=[(f"priority_list:{campaign_id}", list_digest)],
            )
            return self.vaccination.campaign

    def _apply_prioritise(self, payload: dict, tx: Transaction, height: int) -> None:
        campaign = Campaign.build(
            campaign_id=payload["campaign_id"],
            ranking=payload["ranking"],
            levels=payload["levels"],
            dose_of=self.vaccination.dose_numbers(),
        )
        self.vaccination.campaign = campaign
        self._emit("prioritise", sorted(payload["levels"]), tx.tx_id)

    def close_campaign(self, caller: str) -> Campaign:
        with self._lock:
            self._require_authority(caller)
            campaign = self.vaccination.campaign
            if campaign is None or not campaign.active:
                raise NoActiveCampaign("no active campaign to close")
            self._commit(
                "close_campaign", {"campaign_id": campaign.campaign_id}, caller
            )
            return campaign

    def _apply_close_campaign(self, payload: dict, tx: Transaction, height: int) -> None:
        self.vaccination.campaign.active = False
        self._emit("close_campaign", [tx.submitter], tx.tx_id)

    def push_vaccine(self, caller: str, holder_id: str, vaccine_id: str) -> DoseEvent:
        with self._lock:
            provider = self.registry.approved(caller, Role.VACCINE_PROVIDER)
            if provider is None:
                raise Unauthorized("only an approved vaccine provider can inoculate")
            campaign = self.vaccination.campaign
            if campaign is None or not campaign.active:
                raise NoActiveCampaign("prioritisation has not produced a campaign")
            vaccine = self.vaccination.vaccines.get(vaccine_id)
            if vaccine is None:
                raise UnknownVaccine(f"no vaccine {vaccine_id}")
            if holder_id not in campaign.levels:
                raise HolderNotInCampaign(
                    f"holder {holder_id} is not in the campaign snapshot"
                )
            return self._push_checked(caller, holder_id, vaccine, campaign)

    def _push_checked(
        self, caller: str, holder_id: str, vaccine: Vaccine, campaign: Campaign
    ) -> DoseEvent:
        dose = self.vaccination.doses.get(holder_id)
        dose_number = dose.dose_number if dose else 0
        if holder_id not in campaign.remaining:
            raise DoseLimitReached(f"holder completed all {dose_number} doses")
        if vaccine.storage < 1:
            raise OutOfStock(f"vaccine {vaccine.name} is out of stock")
        if dose is not None and dose.vaccine_id != vaccine.vaccine_id:
            raise VaccineMismatch(
                "dose course must be completed with the same vaccine"
            )
        campaign.check_turn(holder_id, dose_number)
        holder = self.registry.get(holder_id)
        level = campaign.levels[holder_id]
        new_dose = dose_number + 1
        passport_digest = canonical.digest(
            credentials.passport_fields(
                holder.profile["name"], vaccine.name, new_dose, level
            )
        )
        tx, _ = self._commit(
            "push_vaccine",
            {
                "holder_id": holder_id,
                "vaccine_id": vaccine.vaccine_id,
                "dose_number": new_dose,
                "level": level,
                "division": holder.profile["division"],
            },
            caller,
            anchors=[(f"passport:{holder_id}", passport_digest)],
        )
        return DoseEvent(
            holder_id=holder_id,
            vaccine_id=vaccine.vaccine_id,
            dose_number=new_dose,
            level=level,
            completed=holder_id not in campaign.remaining,
            tx_id=tx.tx_id,
        )

    def _apply_push_vaccine(self, payload: dict, tx: Transaction, height: int) -> None:
        holder_id = payload["holder_id"]
        vaccine = self.vaccination.vaccines[payload["vaccine_id"]]
        vaccine.storage -= 1
        dose = self.vaccination.doses.get(holder_id)
        if dose is None:
            dose = DoseState(
                holder_id=holder_id,
                vaccine_id=payload["vaccine_id"],
                dose_number=0,
                level=payload["level"],
            )
            self.vaccination.doses[holder_id] = dose
        dose.dose_number = payload["dose_number"]
        dose.level = payload["level"]
        campaign = self.vaccination.campaign
        campaign.record_dose(holder_id, dose.dose_number, vaccine.dose_limit)
        if dose.dose_number == 1:
            self.testing.record_vaccination(payload["division"])
        self._emit("push_vaccine", [holder_id, tx.submitter], tx.tx_id)

    # ----- credentials -----

    def issue_test_certificate(self, caller: str) -> credentials.CredentialPayload:
        with self._lock:
            holder = self.registry.approved(caller, Role.HOLDER)
            if holder is None:
                raise Unauthorized("only the holder can generate their certificate")
            record = self.testing.current.get(caller)
            if record is None:
                raise NoTestOnRecord("no covid test on record")
            issuer = self.registry.get(record.issuer_id)
            fields = credentials.test_certificate_fields(
                holder.profile["name"],
                holder.profile["age"],
                holder.profile.get("photo_digest"),
                record.division,
                record.result.value,
                issuer.profile["name"],
            )
            entry = self.chain.get_anchor_entry(f"testcert:{caller}")
            height, anchor = entry
            return credentials.CredentialPayload(
                kind=credentials.KIND_TEST,
                fields=fields,
                anchor=anchor,
                ledger_height=height,
            )

    def issue_vaccine_passport(self, caller: str) -> credentials.CredentialPayload:
        with self._lock:
            holder = self.registry.approved(caller, Role.HOLDER)
            if holder is None:
                raise Unauthorized("only the holder can generate their passport")
            dose = self.vaccination.doses.get(caller)
            if dose is None or dose.dose_number < 1:
                raise NotVaccinated("no dose on record")
            vaccine = self.vaccination.vaccines[dose.vaccine_id]
            fields = credentials.passport_fields(
                holder.profile["name"], vaccine.name, dose.dose_number, dose.level
            )
            height, anchor = self.chain.get_anchor_entry(f"passport:{caller}")
            return credentials.CredentialPayload(
                kind=credentials.KIND_PASSPORT,
                fields=fields,
                anchor=anchor,
                ledger_height=height,
            )

    def verify_credential(
        self, payload: credentials.CredentialPayload
    ) -> credentials.VerificationReport:
        with self._lock:
            return credentials.verify_credential(self.chain, payload)

    def masked_fields(self, payload: credentials.CredentialPayload) -> dict:
        """Display fields honoring the holder's permission mask.

        The anchor written at the credential's height names the holder
        (testcert:<sid> / passport:<sid>), so the mask lookup is exact.
        """
        with self._lock:
            key = self._anchor_key_at(payload.ledger_height, payload.anchor)
            if key is not None and ":" in key:
                actor = self.registry.get(key.split(":", 1)[1])
                if actor is not None:
                    return registry.apply_mask(payload.fields, actor.permissions)
            return dict(payload.fields)

    def _anchor_key_at(self, height: int, digest: str) -> Optional[str]:
        if not 0 <= height <= self.chain.height:
            return None
        for tx in self.chain.blocks[height].tx_list:
            for key, anchored in tx.anchors:
                if anchored == digest:
                    return key
        return None

    # ----- shared -----

    def _require_authority(self, caller: str) -> Actor:
        actor = self.registry.approved(caller, Role.AUTHORITY)
        if actor is None:
            raise Unauthorized("authority credentials required")
        return actor

    def pending_signups(self, caller: str) -> list[Actor]:
        with self._lock:
            self._require_authority(caller)
            return [
                a for a in self.registry.actors.values() if a.status is Status.PENDING
            ]

    def verify_chain(self):
        with self._lock:
            return self.chain.verify_chain()

    def get_anchor(self, key: str) -> Optional[str]:
        with self._lock:
            return self.chain.get_anchor(key)

    def poll_events(self, after: int) -> list[Event]:
        with self._lock:
            if after < 0:
                raise InvalidParameters("after must be >= 0")
            return self.events[after:]

    def state_value(self) -> dict:
        return {
            "registry": self.registry.state_value(),
            "testing": self.testing.state_value(),
            "vaccination": self.vaccination.state_value(),
            "events": [e.to_dict() for e in self.events],
            "last_seq": self._seq,
        }

    def state_digest(self) -> str:
        with self._lock:
            return canonical.digest(self.state_value())
