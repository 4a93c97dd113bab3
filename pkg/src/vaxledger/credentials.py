"""QR credential payloads: test certificates (QR1) and vaccine passports (QR2).

A payload is the canonical field map plus the chain anchor that binds it:
the digest of the fields is recorded on the ledger when the underlying
record is committed, so issuing a credential is a pure read and verifying
one needs nothing but the chain. Wire form is canonical bytes wrapped in
base64url; the QR symbol carries exactly that text.
"""

from __future__ import annotations

import base64
import binascii
from dataclasses import dataclass
from typing import Optional

from . import canonical, qr
from .errors import PayloadTooLarge, QRDecodeError
from .ledger import Blockchain

KIND_TEST = "TestCertificate"
KIND_PASSPORT = "VaccinePassport"

TEST_FIELDS = ("holder_name", "age", "photo", "location", "test_result", "issuer_name")
PASSPORT_FIELDS = ("holder_name", "vaccine_taken", "vaccine_name", "dose_number", "priority")


@dataclass(frozen=True)
class CredentialPayload:
    kind: str
    fields: dict
    anchor: str
    ledger_height: int

    def fields_digest(self) -> str:
        return canonical.digest(self.fields)

    def to_value(self) -> dict:
        return {
            "kind": self.kind,
            "fields": self.fields,
            "anchor": self.anchor,
            "ledger_height": self.ledger_height,
        }

    @classmethod
    def from_value(cls, value: object) -> "CredentialPayload":
        if not isinstance(value, dict):
            raise QRDecodeError("credential payload is not a mapping")
        try:
            kind = value["kind"]
            fields = value["fields"]
            anchor = value["anchor"]
            height = value["ledger_height"]
        except KeyError as exc:
            raise QRDecodeError(f"credential payload missing {exc}") from exc
        if kind not in (KIND_TEST, KIND_PASSPORT):
            raise QRDecodeError(f"unknown credential kind {kind!r}")
        if not isinstance(fields, dict) or not isinstance(anchor, str):
            raise QRDecodeError("malformed credential payload")
        if not isinstance(height, int):
            raise QRDecodeError("malformed ledger height")
        return cls(kind=kind, fields=fields, anchor=anchor, ledger_height=height)

    def to_text(self) -> str:
        """base64url wire form; also the QR symbol content."""
        raw = canonical.encode(self.to_value())
        text = base64.urlsafe_b64encode(raw).decode("ascii")
        if len(text) > qr.MAX_PAYLOAD_BYTES:
            raise PayloadTooLarge(
                f"credential text of {len(text)} bytes exceeds QR capacity"
            )
        return text

    @classmethod
    def from_text(cls, text: str) -> "CredentialPayload":
        try:
            raw = base64.b64decode(
                text.strip().encode("ascii"), altchars=b"-_", validate=True
            )
        except (binascii.Error, UnicodeEncodeError, ValueError) as exc:
            raise QRDecodeError(f"not base64url credential text: {exc}") from exc
        try:
            value = canonical.decode(raw)
        except canonical.DecodeError as exc:
            raise QRDecodeError(f"not a credential payload: {exc}") from exc
        return cls.from_value(value)


def test_certificate_fields(
    holder_name: str,
    age: int,
    photo_digest: Optional[str],
    division: str,
    result: str,
    issuer_name: str,
) -> dict:
    """The exact QR1 field set; photos travel as digests, never bytes."""
    return {
        "holder_name": holder_name,
        "age": age,
        "photo": photo_digest or "",
        "location": division,
        "test_result": result,
        "issuer_name": issuer_name,
    }


def passport_fields(
    holder_name: str, vaccine_name: str, dose_number: int, priority: int
) -> dict:
    return {
        "holder_name": holder_name,
        "vaccine_taken": True,
        "vaccine_name": vaccine_name,
        "dose_number": dose_number,
        "priority": priority,
    }


def encode_qr(payload: CredentialPayload, scale: int = 8, border: int = 4) -> bytes:
    """Deterministic PNG bytes of the QR symbol for a payload."""
    return qr.encode_png(payload.to_text().encode("ascii"), scale=scale, border=border)


def decode_qr(png: bytes) -> CredentialPayload:
    return CredentialPayload.from_text(qr.decode_png(png).decode("ascii"))


@dataclass(frozen=True)
class VerificationReport:
    valid: bool
    reason: Optional[str] = None  # AnchorMismatch | UnknownAnchor | ChainInvalid

    def to_dict(self) -> dict:
        return {"valid": self.valid, "reason": self.reason}


def verify_credential(chain: Blockchain, payload: CredentialPayload) -> VerificationReport:
    """Public, unauthenticated check of a credential against the chain.

    Valid iff the payload fields still hash to the anchored digest at the
    recorded height and the chain prefix up to that height verifies.
    """
    if payload.ledger_height < 0 or payload.ledger_height > chain.height:
        return VerificationReport(False, "UnknownAnchor")
    if payload.fields_digest() != payload.anchor:
        return VerificationReport(False, "AnchorMismatch")
    if payload.anchor not in chain.anchors_at(payload.ledger_height):
        return VerificationReport(False, "UnknownAnchor")
    prefix = chain.verify_chain(upto_height=payload.ledger_height)
    if not prefix.valid:
        return VerificationReport(False, "ChainInvalid")
    return VerificationReport(True)
