"""HTTP front end: one in-memory election per transcript path.

The service plays every authority role (tellers, printer, scanner, TRA), so
it holds the secrets; clients only ever see what a voter or observer would.
"""
from __future__ import annotations

import random
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Response
from fastapi.responses import JSONResponse

from ..audit import AuditSession, DisputeCase, rla_bb_to_paper, rla_paper_to_bb, resolve_dispute
from ..election import Election, ElectionConfig
from ..errors import ElectryoError
from ..scenario import ScenarioError, parse_fault, run_scenario
from ..verifier import universal_verify
from .schemas import (
    AuditOut,
    AuditRequest,
    BoardOut,
    CoerceOut,
    CoerceRequest,
    DisputeRequest,
    ElectionOut,
    NotificationOut,
    NotifyOut,
    NotifyRequest,
    ReportOut,
    ScenarioRequest,
    SetupRequest,
    TranscriptRef,
    VerdictOut,
    VoteOut,
    VoteRequest,
    WalletOut,
)


class Registry:
    def __init__(self):
        self.lock = threading.Lock()
        self.elections: dict[str, Election] = {}
        self.sessions: dict[str, AuditSession] = {}

    @staticmethod
    def key(path: str) -> str:
        return str(Path(path).resolve())

    def get(self, path: str) -> Election:
        e = self.elections.get(self.key(path))
        if e is None:
            raise HTTPException(404, f"no election is running for transcript {path}")
        return e

    def session(self, path: str) -> AuditSession:
        k = self.key(path)
        if k not in self.sessions:
            self.sessions[k] = AuditSession(self.get(path))
        return self.sessions[k]


def _out(path: str, e: Election) -> dict:
    return {"transcript": path, "election_id": e.eid.hex(), "state": e.state, "entries": len(e.bb),
            "warnings": list(e.warnings)}


def create_app() -> FastAPI:
    app = FastAPI(title="electryo", version="0.1.0")
    reg = Registry()
    app.state.registry = reg

    @app.exception_handler(ElectryoError)
    async def protocol_error(request, exc: ElectryoError):
        return JSONResponse(status_code=409, content={"detail": f"{type(exc).__name__}: {exc}"})

    @app.exception_handler(ValueError)
    async def bad_value(request, exc: ValueError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "elections": len(reg.elections)}

    @app.post("/elections", response_model=ElectionOut)
    def setup(req: SetupRequest):
        config = ElectionConfig.from_dict(req.config.model_dump())
        with reg.lock:
            e = Election(config, req.transcript)
            e.setup()
            reg.elections[reg.key(req.transcript)] = e
            reg.sessions.pop(reg.key(req.transcript), None)
        return _out(req.transcript, e)

    @app.post("/elections/vote", response_model=VoteOut)
    def vote(req: VoteRequest):
        e = reg.get(req.transcript)
        fault = parse_fault(e.config, req.fault, "fault") if req.fault else None
        if not 0 <= req.voter < e.n_voters:
            raise HTTPException(422, f"voter {req.voter} is not on the roll")
        with reg.lock:
            rc = e.cast(req.voter, req.candidate, fault)
        return {"voter": req.voter, "receipt": str(rc)}

    @app.post("/elections/close", response_model=ElectionOut)
    def close(req: TranscriptRef):
        e = reg.get(req.transcript)
        with reg.lock:
            e.close()
        return _out(req.transcript, e)

    @app.post("/elections/mix", response_model=ElectionOut)
    def mix(req: TranscriptRef):
        e = reg.get(req.transcript)
        with reg.lock:
            e.mix()
        return _out(req.transcript, e)

    @app.post("/elections/tally", response_model=BoardOut)
    def tally(req: TranscriptRef):
        e = reg.get(req.transcript)
        with reg.lock:
            board = e.tally()
        return {**_out(req.transcript, e), "board": board}

    @app.post("/elections/coerce", response_model=CoerceOut)
    def coerce(req: CoerceRequest):
        e = reg.get(req.transcript)
        with reg.lock:
            fake = e.coerce(req.voter, req.candidate)
        return {"voter": req.voter, "tracker": e.coerced[req.voter]["tracker"], "alpha": fake.alpha.to_bytes().hex()}

    @app.post("/elections/notify", response_model=NotifyOut)
    def notify(req: NotifyRequest):
        e = reg.get(req.transcript)
        with reg.lock:
            res = e.notify(req.voters, req.claimed)
        return {"notifications": [NotificationOut(voter=i, status=n.status, row=n.pet_row) for i, n in res.items()]}

    @app.get("/elections/wallet", response_model=WalletOut)
    def wallet(transcript: str, voter: int):
        """What the voter's phone holds: their trapdoor key and any delivered alpha."""
        e = reg.get(transcript)
        if not 0 <= voter < e.n_voters or not e.credentials:
            raise HTTPException(404, f"no voter {voter}")
        cred = e.credentials[voter]
        alpha = e.inbox.get(voter)
        return {"election_id": e.eid.hex(), "group": e.group.name, "voter": voter,
                "voter_id": cred.voter_id.decode(), "sk": str(cred.selene.sk),
                "alpha": alpha.alpha.to_bytes().hex() if alpha else None}

    @app.post("/elections/audit", response_model=AuditOut)
    def audit(req: AuditRequest):
        e = reg.get(req.transcript)
        rng = random.Random(req.seed)
        with reg.lock:
            session = reg.session(req.transcript)
            if req.direction == "bb-to-paper":
                rec = rla_bb_to_paper(e, req.sample_size, rng, session)
                return rec.to_wire()
            if req.direction == "paper-to-bb":
                if not 0 <= req.box < len(e.box):
                    raise HTTPException(422, f"no paper ballot {req.box} in the box")
                m = rla_paper_to_bb(e, e.box[req.box], rng, req.method, session)
                return {"direction": "PaperToBB", "sampled": [req.box], "matches": [m.ballot_index],
                        "mismatches": [], "method": req.method, "population": len(session.ballots)}
        raise HTTPException(422, f"unknown audit direction {req.direction!r}")

    @app.post("/elections/dispute", response_model=VerdictOut)
    def dispute(req: DisputeRequest):
        e = reg.get(req.transcript)
        with reg.lock:
            v = resolve_dispute(e, DisputeCase(req.voter, req.claimed), reg.session(req.transcript))
        return v.to_wire()

    @app.get("/elections/transcript")
    def transcript(transcript: str):
        return Response(reg.get(transcript).bb.to_bytes(), media_type="application/octet-stream")

    @app.get("/elections/verify", response_model=ReportOut)
    def verify(transcript: str):
        return universal_verify(reg.get(transcript).bb).to_wire()

    @app.post("/scenarios")
    def scenario(req: ScenarioRequest):
        try:
            res = run_scenario(req.config.model_dump(), req.script, req.transcript)
        except ScenarioError as exc:
            raise HTTPException(422, str(exc))
        if req.transcript:
            with reg.lock:
                reg.elections[reg.key(req.transcript)] = res.election
        return res.summary()

    return app


app = create_app()
