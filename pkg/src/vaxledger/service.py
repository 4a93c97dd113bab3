"""HTTP/JSON API over the node: sessions, endpoints, events, persistence.

All state mutations funnel through one writer lock and run off the event
loop; reads serve the latest committed state. A bounded pending-mutation
queue (`max_pending`) makes overload observable: past capacity, mutating
requests fail fast with 503 instead of queueing without bound.
"""

from __future__ import annotations

import asyncio
import base64
import binascii
import secrets
import time
from contextlib import asynccontextmanager
from dataclasses import dataclass
from typing import Any, Optional

from fastapi import Depends, FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import credentials
from .config import ServiceConfig
from .errors import (
    InvalidCertificate,
    MalformedProfile,
    ServiceOverloaded,
    SignInFailed,
    Unauthorized,
    VaxLedgerError,
)
from .store import Store

_STATUS_BY_ERROR = {
    # wrong or missing permissions
    "Unauthorized": 403,
    "WalletBanned": 403,
    "SignInFailed": 401,
    # malformed input
    "InvalidRole": 400,
    "MalformedProfile": 400,
    "InvalidParameters": 400,
    "NonPositiveDelta": 400,
    "QRDecodeError": 400,
    "PayloadTooLarge": 400,
    "InvalidCertificate": 400,
    # unknown entities
    "UnknownActor": 404,
    "UnknownHolder": 404,
    "UnknownVaccine": 404,
    "UnknownDivision": 404,
    # state conflicts
    "DuplicateTransaction": 409,
    "DuplicateRegistration": 409,
    "DuplicateVaccine": 409,
    "NotPending": 409,
    "CredentialMismatch": 409,
    "NoTestOnRecord": 409,
    "NotVaccinated": 409,
    "CampaignInProgress": 409,
    "NoTestedHolders": 409,
    "NoActiveCampaign": 409,
    "PriorityViolation": 409,
    "OutOfStock": 409,
    "DoseLimitReached": 409,
    "VaccineMismatch": 409,
    "HolderNotInCampaign": 409,
    # operational
    "ServiceOverloaded": 503,
    "CorruptStore": 500,
    "CorruptChain": 500,
}


@dataclass
class Session:
    token: str
    actor_id: str
    role_flag: str
    expires_at: float


class SignupBody(BaseModel):
    role: str
    wallet: str
    profile: dict
    password: str
    photo_b64: Optional[str] = None


class SigninBody(BaseModel):
    wallet: str
    sid: str
    password: str


class ApproveBody(BaseModel):
    actor_id: str
    decision: str = Field(pattern="^(approve|reject)$")


class ResultBody(BaseModel):
    holder_id: str
    result: str


class VaccineBody(BaseModel):
    name: str
    storage: int
    dose_limit: int


class StorageBody(BaseModel):
    delta: int


class DoseBody(BaseModel):
    holder_id: str
    vaccine_id: str
    certificate: str


class VerifyBody(BaseModel):
    text: Optional[str] = None
    payload: Optional[dict] = None


def create_app(config: ServiceConfig, store: Store | None = None) -> FastAPI:
    if store is None:
        store, _report = Store.open(config.store_path, config.node)
    node = store.node
    sessions: dict[str, Session] = {}
    write_lock = asyncio.Lock()
    state = {"pending": 0, "mutations": 0}
    snapshot_interval = 32

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        store.close()

    app = FastAPI(title="vaxledger", lifespan=lifespan)

    @app.exception_handler(VaxLedgerError)
    async def domain_error(_request: Request, exc: VaxLedgerError):
        status = _STATUS_BY_ERROR.get(exc.name, 500)
        return JSONResponse(
            status_code=status, content={"error": exc.name, "detail": str(exc)}
        )

    def require_session(request: Request) -> Session:
        header = request.headers.get("authorization", "")
        token = header.removeprefix("Bearer ").strip()
        session = sessions.get(token)
        if session is None or session.expires_at < time.monotonic():
            sessions.pop(token, None)
            raise SignInFailed("missing or expired session")
        return session

    async def run_write(fn, *args: Any):
        """Serialized mutation with overload rejection past capacity."""
        if state["pending"] >= config.max_pending:
            raise ServiceOverloaded(
                f"pending mutation queue is at capacity ({config.max_pending})"
            )
        state["pending"] += 1
        try:
            async with write_lock:
                loop = asyncio.get_running_loop()
                result = await loop.run_in_executor(None, fn, *args)
                state["mutations"] += 1
                if state["mutations"] % snapshot_interval == 0:
                    await loop.run_in_executor(None, store.save_snapshot)
                return result
        finally:
            state["pending"] -= 1

    # ----- onboarding -----

    @app.post("/signup", status_code=201)
    async def signup(body: SignupBody):
        profile = dict(body.profile)
        if body.photo_b64:
            try:
                photo = base64.b64decode(body.photo_b64, validate=True)
            except (binascii.Error, ValueError) as exc:
                raise MalformedProfile(f"photo_b64 is not base64: {exc}")
            profile["photo_digest"] = store.put_object(photo)
        sid = await run_write(
            node.request_signup, body.role, body.wallet, profile, body.password
        )
        return {"actor_id": sid, "status": "Pending"}

    @app.post("/signin")
    async def signin(body: SigninBody):
        loop = asyncio.get_running_loop()
        flag = await loop.run_in_executor(
            None, node.sign_in, body.wallet, body.sid, body.password
        )
        token = secrets.token_urlsafe(24)
        sessions[token] = Session(
            token=token,
            actor_id=body.sid,
            role_flag=flag,
            expires_at=time.monotonic() + config.session_ttl_seconds,
        )
        return {"flag": flag, "token": token, "actor_id": body.sid}

    @app.post("/approve")
    async def approve(body: ApproveBody, session: Session = Depends(require_session)):
        status, reason = await run_write(
            node.approve_signup, session.actor_id, body.actor_id, body.decision
        )
        return {"actor_id": body.actor_id, "status": status.value, "reason": reason}

    @app.get("/pending")
    async def pending_signups(session: Session = Depends(require_session)):
        out = [
            {
                "actor_id": actor.sid,
                "role": actor.role.value,
                "wallet": actor.wallet,
                "profile": actor.profile,
            }
            for actor in node.pending_signups(session.actor_id)
        ]
        return {"pending": out}

    # ----- testing -----

    @app.post("/results", status_code=201)
    async def issue_result(body: ResultBody, session: Session = Depends(require_session)):
        record = await run_write(
            node.issue_result, session.actor_id, body.holder_id, body.result
        )
        return record.state_value()

    @app.get("/stats/{division}")
    async def stats(division: str):
        return node.location_stats(division).state_value()

    @app.get("/ranking")
    async def ranking():
        ranked, untested = node.red_zone_ranking()
        return {
            "ranked": [
                {"division": d, "ratio": float(r)} for d, r in ranked
            ],
            "untested": untested,
        }

    # ----- vaccination -----

    @app.post("/vaccines", status_code=201)
    async def add_vaccine(body: VaccineBody, session: Session = Depends(require_session)):
        vaccine = await run_write(
            node.add_vaccine, session.actor_id, body.name, body.storage, body.dose_limit
        )
        return vaccine.record()

    @app.get("/vaccines")
    async def list_vaccines():
        return {"vaccines": [v.record() for v in node.vaccination.vaccines.values()]}

    @app.patch("/vaccines/{vaccine_id}/storage")
    async def update_storage(
        vaccine_id: str, body: StorageBody, session: Session = Depends(require_session)
    ):
        storage = await run_write(
            node.update_storage, session.actor_id, vaccine_id, body.delta
        )
        return {"vaccine_id": vaccine_id, "storage": storage}

    @app.post("/prioritise", status_code=201)
    async def prioritise(session: Session = Depends(require_session)):
        campaign = await run_write(node.prioritise, session.actor_id)
        return campaign.snapshot()

    @app.get("/campaign")
    async def campaign():
        camp = node.vaccination.campaign
        if camp is None:
            return JSONResponse(
                status_code=404,
                content={"error": "NoActiveCampaign", "detail": "no campaign yet"},
            )
        return camp.snapshot()

    @app.post("/campaign/close")
    async def close_campaign(session: Session = Depends(require_session)):
        campaign = await run_write(node.close_campaign, session.actor_id)
        return campaign.snapshot()

    @app.post("/doses", status_code=201)
    async def push_dose(body: DoseBody, session: Session = Depends(require_session)):
        try:
            payload = credentials.CredentialPayload.from_text(body.certificate)
        except VaxLedgerError as exc:
            raise InvalidCertificate(f"certificate unreadable: {exc}")
        if payload.kind != credentials.KIND_TEST:
            raise InvalidCertificate("a test certificate (QR1) is required")
        report = node.verify_credential(payload)
        if not report.valid:
            raise InvalidCertificate(f"certificate invalid: {report.reason}")
        anchored = node.chain.get_anchor(f"testcert:{body.holder_id}")
        if anchored != payload.anchor:
            raise InvalidCertificate("certificate does not belong to this holder")
        dose = await run_write(
            node.push_vaccine, session.actor_id, body.holder_id, body.vaccine_id
        )
        return dose.to_dict()

    # ----- credentials -----

    @app.put("/holders/{holder_id}/permissions")
    async def set_permissions(
        holder_id: str, mask: dict, session: Session = Depends(require_session)
    ):
        if session.actor_id != holder_id:
            raise Unauthorized("holders may only change their own permissions")
        parsed = await run_write(node.set_permission, session.actor_id, mask)
        return {"holder_id": holder_id, "mask": parsed.to_dict()}

    def _credential_response(payload: credentials.CredentialPayload, fmt: str):
        if fmt == "png":
            return Response(
                content=credentials.encode_qr(payload), media_type="image/png"
            )
        if fmt == "text":
            return Response(content=payload.to_text(), media_type="text/plain")
        return {"payload": payload.to_value(), "text": payload.to_text()}

    @app.get("/certificates/test")
    async def test_certificate(
        fmt: str = Query("json", alias="format", pattern="^(json|png|text)$"),
        session: Session = Depends(require_session),
    ):
        payload = node.issue_test_certificate(session.actor_id)
        return _credential_response(payload, fmt)

    @app.get("/certificates/passport")
    async def vaccine_passport(
        fmt: str = Query("json", alias="format", pattern="^(json|png|text)$"),
        session: Session = Depends(require_session),
    ):
        payload = node.issue_vaccine_passport(session.actor_id)
        return _credential_response(payload, fmt)

    @app.post("/verify")
    async def verify(body: VerifyBody):
        if body.text is not None:
            payload = credentials.CredentialPayload.from_text(body.text)
        elif body.payload is not None:
            payload = credentials.CredentialPayload.from_value(body.payload)
        else:
            raise InvalidCertificate("provide text or payload")
        report = node.verify_credential(payload)
        fields = node.masked_fields(payload) if report.valid else {}
        return {
            "valid": report.valid,
            "reason": report.reason,
            "kind": payload.kind,
            "fields": fields,
        }

    # ----- ledger / events -----

    @app.get("/chain/verify")
    async def chain_verify():
        loop = asyncio.get_running_loop()
        report = await loop.run_in_executor(None, node.verify_chain)
        return report.to_dict()

    @app.get("/events")
    async def events(after: int = Query(0, ge=0)):
        return {"events": [e.to_dict() for e in node.poll_events(after)]}

    @app.get("/healthz")
    async def healthz():
        return {
            "height": node.chain.height,
            "pending": state["pending"],
            "capacity": config.max_pending,
        }

    app.state.node = node
    app.state.store = store
    app.state.sessions = sessions
    return app
