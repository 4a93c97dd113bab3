"""Role-based identity: actors, approval lifecycle, credentials, privacy masks.

Pure state and validation rules; all mutations are driven by the node's
single writer so that every change is backed by a committed transaction.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum

from . import canonical
from .errors import MalformedProfile


class Role(str, Enum):
    AUTHORITY = "Authority"
    ISSUER = "Issuer"
    VACCINE_PROVIDER = "VaccineProvider"
    HOLDER = "Holder"


class Status(str, Enum):
    PENDING = "Pending"
    APPROVED = "Approved"
    REJECTED = "Rejected"
    BANNED = "Banned"


# sign-in probes stored credential hashes role by role, in this order
SIGN_IN_ORDER = (Role.ISSUER, Role.HOLDER, Role.AUTHORITY, Role.VACCINE_PROVIDER)

# wallets with this many rejected signups are banned for good
BAN_THRESHOLD = 3

MASK_FIELDS = ("name", "age", "location", "photo", "test_result", "vaccination_status")


@dataclass(frozen=True)
class PermissionMask:
    """Per-field profile visibility; defaults to everything visible."""

    name: bool = True
    age: bool = True
    location: bool = True
    photo: bool = True
    test_result: bool = True
    vaccination_status: bool = True

    def to_dict(self) -> dict:
        return {f: getattr(self, f) for f in MASK_FIELDS}

    @classmethod
    def from_dict(cls, data: dict) -> "PermissionMask":
        unknown = set(data) - set(MASK_FIELDS)
        if unknown:
            raise MalformedProfile(f"unknown permission fields: {sorted(unknown)}")
        if any(not isinstance(v, bool) for v in data.values()):
            raise MalformedProfile("permission flags must be booleans")
        return cls(**{f: data.get(f, True) for f in MASK_FIELDS})


@dataclass
class Actor:
    sid: str
    wallet: str
    role: Role
    status: Status
    credential_hash: str  # combined digest of (wallet, sid, password); ledger-anchored
    credential_check: str  # scrypt of credential_hash, off-chain sign-in material
    profile: dict
    salt: str = ""
    permissions: PermissionMask = field(default_factory=PermissionMask)
    created_seq: int = 0

    def identity_record(self) -> dict:
        """The canonical identity record whose digest is anchored on-chain."""
        record = {"sid": self.sid, "role": self.role.value, "wallet": self.wallet,
                  "name": self.profile.get("name", "")}
        if self.role is Role.HOLDER:
            record["nid"] = self.profile.get("nid", "")
        elif self.role in (Role.ISSUER, Role.VACCINE_PROVIDER):
            record["licence"] = self.profile.get("licence", "")
        return record

    def state_value(self) -> dict:
        return {
            "sid": self.sid,
            "wallet": self.wallet,
            "role": self.role.value,
            "status": self.status.value,
            "credential_hash": self.credential_hash,
            "credential_check": self.credential_check,
            "salt": self.salt,
            "profile": self.profile,
            "permissions": self.permissions.to_dict(),
            "created_seq": self.created_seq,
        }


def combined_credential_digest(wallet: str, sid: str, password: str) -> str:
    """The sign-in digest: one hash over wallet address, system id and password."""
    return canonical.digest([wallet, sid, password])


def credential_check(combined: str, salt: str, log2_n: int) -> str:
    """Slow salted hash of the combined digest, kept off-chain."""
    return hashlib.scrypt(
        combined.encode("ascii"),
        salt=salt.encode("ascii"),
        n=1 << log2_n,
        r=8,
        p=1,
        maxmem=64 * 1024 * 1024,
        dklen=32,
    ).hex()


def validate_profile(role: Role, profile: dict, divisions: tuple[str, ...]) -> dict:
    """Checks role-specific profile shape; returns a normalized copy."""
    if not isinstance(profile, dict):
        raise MalformedProfile("profile must be a mapping")
    clean: dict = {}
    name = profile.get("name")
    if not isinstance(name, str) or not name.strip():
        raise MalformedProfile("profile needs a non-empty name")
    clean["name"] = name.strip()
    if role is Role.HOLDER:
        age = profile.get("age")
        if not isinstance(age, int) or isinstance(age, bool) or not 0 <= age <= 150:
            raise MalformedProfile("holder age must be an integer in 0..150")
        division = profile.get("division")
        if division not in divisions:
            raise MalformedProfile(f"unknown division {division!r}")
        nid = profile.get("nid")
        if not isinstance(nid, str) or not nid.strip():
            raise MalformedProfile("holder profile needs a NID")
        clean.update(age=age, division=division, nid=nid.strip())
        photo = profile.get("photo_digest")
        if photo is not None:
            if not isinstance(photo, str) or len(photo) != 64:
                raise MalformedProfile("photo_digest must be a 64-char hex digest")
            clean["photo_digest"] = photo
    elif role in (Role.ISSUER, Role.VACCINE_PROVIDER):
        licence = profile.get("licence")
        if not isinstance(licence, str) or not licence.strip():
            raise MalformedProfile(f"{role.value} profile needs a licence number")
        clean["licence"] = licence.strip()
    else:  # Authority, bootstrap only
        pass
    return clean


@dataclass
class RegistryState:
    actors: dict = field(default_factory=dict)  # sid -> Actor
    by_wallet_role: dict = field(default_factory=dict)  # (wallet, role) -> sid
    rejections: dict = field(default_factory=dict)  # wallet -> rejected count
    banned_wallets: set = field(default_factory=set)
    authority_sid: str | None = None

    def get(self, sid: str) -> Actor | None:
        return self.actors.get(sid)

    def is_registered(self, wallet: str, role: Role) -> bool:
        return (wallet, role.value) in self.by_wallet_role

    def add_pending(self, actor: Actor) -> None:
        self.actors[actor.sid] = actor
        self.by_wallet_role[(actor.wallet, actor.role.value)] = actor.sid

    def set_status(self, sid: str, status: Status) -> Actor:
        actor = self.actors[sid]
        actor.status = status
        if status in (Status.REJECTED, Status.BANNED):
            # rejected slots are freed so the wallet may try again (until banned)
            self.by_wallet_role.pop((actor.wallet, actor.role.value), None)
            self.rejections[actor.wallet] = self.rejections.get(actor.wallet, 0) + 1
            if status is Status.BANNED:
                self.banned_wallets.add(actor.wallet)
        elif status is Status.APPROVED and actor.role is Role.AUTHORITY:
            self.authority_sid = actor.sid
        return actor

    def approved(self, sid: str, role: Role | None = None) -> Actor | None:
        actor = self.actors.get(sid)
        if actor is None or actor.status is not Status.APPROVED:
            return None
        if role is not None and actor.role is not role:
            return None
        return actor

    def find_credential(self, sid: str, wallet: str, role: Role) -> Actor | None:
        actor = self.actors.get(sid)
        if actor is None or actor.role is not role or actor.wallet != wallet:
            return None
        return actor

    def set_permissions(self, sid: str, mask: PermissionMask) -> Actor:
        actor = self.actors[sid]
        actor.permissions = mask
        return actor

    def state_value(self) -> dict:
        return {
            "actors": {sid: a.state_value() for sid, a in self.actors.items()},
            "rejections": dict(self.rejections),
            "banned_wallets": sorted(self.banned_wallets),
            "authority_sid": self.authority_sid,
        }


def apply_mask(fields: dict, mask: PermissionMask) -> dict:
    """Drops credential display fields the holder has hidden.

    The anchored digest always covers the full field set; masking is a
    display concern only.
    """
    flag_of = {
        "holder_name": "name",
        "age": "age",
        "location": "location",
        "photo": "photo",
        "test_result": "test_result",
        "vaccine_taken": "vaccination_status",
        "vaccine_name": "vaccination_status",
        "dose_number": "vaccination_status",
        "priority": "vaccination_status",
    }
    visible = {}
    for key, value in fields.items():
        flag = flag_of.get(key)
        if flag is None or getattr(mask, flag):
            visible[key] = value
    return visible
