"""Command-line front end.

Election commands are a thin HTTP client for the service.  ``verify``,
``bb verify`` and the ``voter`` commands run locally on a transcript file,
since anyone must be able to check the board without trusting the service.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import httpx

from .bulletin import BulletinBoard, verify_chain
from .crypto.groups import get_group
from .encoding import encode
from .errors import ChainBroken, ElectryoError
from .trackers import AlphaTerm, fake_alpha, retrieve_tracker
from .transcript import TranscriptView
from .verifier import universal_verify

DEFAULT_SERVER = "http://127.0.0.1:8642"


class ServiceError(Exception):
    pass


class Client:
    def __init__(self, http: httpx.Client):
        self.http = http

    def _check(self, r: httpx.Response):
        if r.status_code >= 400:
            try:
                detail = r.json().get("detail")
            except ValueError:
                detail = r.text
            raise ServiceError(f"{r.status_code}: {detail}")
        return r

    def post(self, path: str, body: dict) -> dict:
        return self._check(self.http.post(path, json=body)).json()

    def get(self, path: str, **params) -> dict:
        return self._check(self.http.get(path, params=params)).json()


def _transcript(args) -> str:
    if not args.transcript:
        raise SystemExit("--transcript is required")
    return str(Path(args.transcript).resolve())


def _load_config(args) -> dict:
    cfg = json.loads(Path(args.config).read_text()) if args.config else {}
    if args.seed is not None:
        cfg["seed"] = args.seed
    return cfg


def _print(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


# -- service-backed commands -------------------------------------------------

def cmd_setup(c: Client, args) -> int:
    out = c.post("/elections", {"transcript": _transcript(args), "config": _load_config(args)})
    print(f"election {out['election_id']} ready, {out['entries']} board entries")
    return 0


def cmd_vote(c: Client, args) -> int:
    out = c.post("/elections/vote", {"transcript": _transcript(args), "voter": args.voter,
                                     "candidate": args.candidate, "fault": args.fault})
    print(f"voter {out['voter']} receipt code {out['receipt']}")
    return 0


def _phase(path: str):
    def run(c: Client, args) -> int:
        out = c.post(path, {"transcript": _transcript(args)})
        for w in out.get("warnings", []):
            print(f"warning: {w}", file=sys.stderr)
        if "board" in out:
            for t, v in out["board"]:
                print(f"{t:>6}  {v}")
        print(f"state {out['state']}, {out['entries']} board entries")
        return 0
    return run


def cmd_notify(c: Client, args) -> int:
    claimed = {}
    for item in args.claim or []:
        i, _, code = item.partition("=")
        claimed[int(i)] = code
    out = c.post("/elections/notify", {"transcript": _transcript(args), "voters": args.voter,
                                       "claimed": claimed})
    for n in out["notifications"]:
        print(f"voter {n['voter']}: {n['status']}")
        if args.wallet_dir and n["status"] == "delivered":
            w = c.get("/elections/wallet", transcript=_transcript(args), voter=n["voter"])
            d = Path(args.wallet_dir)
            d.mkdir(parents=True, exist_ok=True)
            (d / f"voter-{n['voter']}.json").write_text(json.dumps(w, indent=2))
    return 0


def cmd_coerce(c: Client, args) -> int:
    out = c.post("/elections/coerce", {"transcript": _transcript(args), "voter": args.voter,
                                       "candidate": args.candidate})
    print(f"voter {out['voter']} will receive a fake alpha opening to tracker {out['tracker']}")
    return 0


def cmd_audit(c: Client, args) -> int:
    body = {"transcript": _transcript(args), "direction": args.direction,
            "sample_size": args.sample_size or 5, "seed": args.seed or 0, "box": args.box,
            "method": args.method}
    out = c.post("/elections/audit", body)
    print(f"{out['direction']}: sampled {out['sampled']} of {out['population']}, "
          f"{len(out['matches'])} matched, {len(out['mismatches'])} mismatched")
    for idx, why in out["mismatches"]:
        print(f"  mismatch at {idx}: {why}")
    return 1 if out["mismatches"] else 0


def cmd_dispute(c: Client, args) -> int:
    out = c.post("/elections/dispute", {"transcript": _transcript(args), "voter": args.voter,
                                        "claimed": args.claimed})
    print(f"{out['verdict']}: {out['reason']}")
    return 0


def cmd_scenario(c: Client, args) -> int:
    script = json.loads(Path(args.script).read_text())
    body = {"config": _load_config(args), "script": script,
            "transcript": _transcript(args) if args.transcript else None}
    out = c.post("/scenarios", body)
    _print({k: out[k] for k in ("state", "entries", "checks", "audits", "disputes", "warnings")})
    print("verification:", "ok" if out["verification"]["ok"] else "FAILED")
    return 0 if out["verification"]["ok"] else 2


# -- local commands ----------------------------------------------------------

def cmd_verify(args) -> int:
    bb = BulletinBoard.load(args.transcript or args.file)
    report = universal_verify(bb)
    print(report.render())
    if args.report:
        Path(args.report).write_bytes(encode(report.to_wire()))
    return 0 if report.ok else 2


def cmd_bb_verify(args) -> int:
    bb = BulletinBoard.load(args.file)
    entries = bb.entries()
    try:
        verify_chain(entries)
    except ChainBroken as exc:
        print(f"chain broken at entry {exc.index}: {exc.reason}")
        return 2
    head = entries[-1].entry_hash.hex() if entries else "-"
    print(f"chain ok: {len(entries)} entries, head {head}")
    return 0


def _wallet(args):
    w = json.loads(Path(args.wallet).read_text())
    view = TranscriptView(BulletinBoard.load(args.transcript))
    if view.eid.hex() != w["election_id"]:
        raise SystemExit("wallet belongs to a different election")
    return w, view, get_group(w["group"])


def cmd_retrieve(args) -> int:
    w, view, group = _wallet(args)
    if not w.get("alpha"):
        raise SystemExit("no alpha has been delivered to this wallet")
    C = view.voter_rows[w["voter"]].commitment
    tracker = retrieve_tracker(int(w["sk"]), group.from_bytes(bytes.fromhex(w["alpha"])), C, max(view.trackers))
    votes = dict(view.tally_board)
    shown = votes.get(tracker)
    label = view.params.candidates[shown] if shown is not None else "not on the board"
    print(f"tracker {tracker}: {label}")
    return 0 if shown is not None else 2


def cmd_fake_alpha(args) -> int:
    w, view, group = _wallet(args)
    if args.target not in dict(view.tally_board):
        raise SystemExit(f"tracker {args.target} is not on the board")
    C = view.voter_rows[w["voter"]].commitment
    fake: AlphaTerm = fake_alpha(int(w["sk"]), C, args.target, w["voter"])
    hexed = fake.alpha.to_bytes().hex()
    if args.out:
        Path(args.out).write_text(json.dumps({**w, "alpha": hexed}, indent=2))
    print(hexed)
    return 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--transcript", help="transcript file (also names the election on the service)")
    common.add_argument("--config", help="election config JSON")
    common.add_argument("--seed", type=int)
    common.add_argument("--sample-size", type=int)
    common.add_argument("--server", default=os.environ.get("ELECTRYO_SERVER", DEFAULT_SERVER))

    p = argparse.ArgumentParser(prog="electryo", description="Electryo polling-station election simulator")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("serve", help="run the HTTP service")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8642)

    sub.add_parser("setup", parents=[common], help="create an election and publish setup rows")
    s = sub.add_parser("vote", parents=[common], help="cast one ballot")
    s.add_argument("--voter", type=int, required=True)
    s.add_argument("--candidate", type=int, required=True)
    s.add_argument("--fault", help="scanner-flip:C, scanner-drop, copy-id:J or forge-signature")
    for name in ("close", "mix", "tally"):
        sub.add_parser(name, parents=[common])
    s = sub.add_parser("notify", parents=[common], help="receipt-gated alpha delivery")
    s.add_argument("--voter", type=int, action="append")
    s.add_argument("--claim", action="append", help="VOTER=CODE, receipt code the voter types in")
    s.add_argument("--wallet-dir", help="write each delivered voter's wallet here")
    s = sub.add_parser("coerce", parents=[common], help="voter asks the TRA to deliver a fake alpha")
    s.add_argument("--voter", type=int, required=True)
    s.add_argument("--candidate", type=int, required=True)
    s = sub.add_parser("audit", parents=[common], help="comparison audit")
    s.add_argument("--direction", choices=["bb-to-paper", "paper-to-bb"], default="bb-to-paper")
    s.add_argument("--box", type=int, default=0)
    s.add_argument("--method", choices=["blind", "pet"], default="blind")
    s = sub.add_parser("dispute", parents=[common], help="resolve a voter complaint")
    s.add_argument("--voter", type=int, required=True)
    s.add_argument("--claimed", type=int, required=True)
    s = sub.add_parser("scenario", parents=[common], help="run a scripted election")
    s.add_argument("script")

    s = sub.add_parser("verify", parents=[common], help="universal verification (local)")
    s.add_argument("file", nargs="?")
    s.add_argument("--report", help="write the report in canonical encoding")

    bb = sub.add_parser("bb", help="bulletin-board tools (local)")
    bsub = bb.add_subparsers(dest="bb_command", required=True)
    s = bsub.add_parser("verify", help="check hash chain and phase order")
    s.add_argument("file")

    v = sub.add_parser("voter", help="voter-side tools (local)")
    vsub = v.add_subparsers(dest="voter_command", required=True)
    s = vsub.add_parser("retrieve-tracker", help="open the tracker from a delivered alpha")
    s.add_argument("--wallet", required=True)
    s.add_argument("--transcript", required=True)
    s = vsub.add_parser("fake-alpha", help="compute an alpha opening to another tracker")
    s.add_argument("--wallet", required=True)
    s.add_argument("--transcript", required=True)
    s.add_argument("--target", type=int, required=True)
    s.add_argument("--out")
    return p


REMOTE = {
    "setup": cmd_setup, "vote": cmd_vote, "close": _phase("/elections/close"),
    "mix": _phase("/elections/mix"), "tally": _phase("/elections/tally"), "notify": cmd_notify,
    "coerce": cmd_coerce, "audit": cmd_audit, "dispute": cmd_dispute, "scenario": cmd_scenario,
}


def main(argv: list[str] | None = None, client: httpx.Client | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "serve":
            import uvicorn
            uvicorn.run("electryo.service.app:app", host=args.host, port=args.port)
            return 0
        if args.command == "verify":
            if not (args.transcript or args.file):
                raise SystemExit("verify needs a transcript file")
            return cmd_verify(args)
        if args.command == "bb":
            return cmd_bb_verify(args)
        if args.command == "voter":
            return cmd_retrieve(args) if args.voter_command == "retrieve-tracker" else cmd_fake_alpha(args)
        http = client or httpx.Client(base_url=args.server, timeout=600)
        return REMOTE[args.command](Client(http), args)
    except ServiceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except httpx.TransportError as exc:
        print(f"error: cannot reach the service at {args.server}: {exc}", file=sys.stderr)
        return 1
    except (ElectryoError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
