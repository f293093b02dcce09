from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from electryo.cli import main
from electryo.service import create_app

CFG = {"name": "cli", "voter_count": 4, "seed": 61}


@pytest.fixture()
def client():
    with TestClient(create_app()) as c:
        yield c


def run(client, capsys, *argv):
    code = main(list(argv), client=client)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_health(client):
    assert client.get("/health").json()["status"] == "ok"


def test_service_round_trip(client, tmp_path):
    t = str(tmp_path / "svc.bb")
    r = client.post("/elections", json={"transcript": t, "config": CFG})
    assert r.status_code == 200 and r.json()["state"] == "voting"
    receipts = {}
    for i in range(3):
        r = client.post("/elections/vote", json={"transcript": t, "voter": i, "candidate": i})
        receipts[i] = r.json()["receipt"]
    again = client.post("/elections/vote", json={"transcript": t, "voter": 0, "candidate": 1})
    assert again.status_code == 409 and "AlreadyVoted" in again.json()["detail"]
    bad = client.post("/elections/vote", json={"transcript": t, "voter": 3, "candidate": 7})
    assert bad.status_code == 422
    for phase in ("close", "mix"):
        assert client.post(f"/elections/{phase}", json={"transcript": t}).status_code == 200
    board = client.post("/elections/tally", json={"transcript": t}).json()["board"]
    assert sorted(v for _, v in board) == [0, 1, 2]
    wrong = "000000" if receipts[1] != "000000" else "111110"
    notes = client.post("/elections/notify", json={"transcript": t, "voters": [0, 1], "claimed": {"1": wrong}})
    status = {n["voter"]: n["status"] for n in notes.json()["notifications"]}
    assert status[0] == "delivered" and status[1] in ("pet-failed",)
    w = client.get("/elections/wallet", params={"transcript": t, "voter": 0}).json()
    assert w["alpha"] and w["voter"] == 0
    rep = client.get("/elections/verify", params={"transcript": t}).json()
    assert rep["ok"] and not rep["failures"]
    raw = client.get("/elections/transcript", params={"transcript": t}).content
    assert raw == (tmp_path / "svc.bb").read_bytes()


def test_unknown_election_is_an_error(client, tmp_path):
    r = client.post("/elections/close", json={"transcript": str(tmp_path / "none.bb")})
    assert r.status_code == 404


def test_scenario_route(client):
    body = {"config": CFG, "script": {"voters": {"0": ["vote:0", "check"], "1": ["vote:1"]}}}
    out = client.post("/scenarios", json=body).json()
    assert out["verification"]["ok"] and out["checks"]["0"]["ok"]


def test_cli_full_flow(client, tmp_path, capsys):
    t = str(tmp_path / "cli.bb")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(CFG))
    assert run(client, capsys, "setup", "--transcript", t, "--config", str(cfg))[0] == 0
    for i, cand in enumerate([0, 1, 1, 2]):
        code, out, _ = run(client, capsys, "vote", "--transcript", t, "--voter", str(i), "--candidate", str(cand))
        assert code == 0 and "receipt code" in out
    code, _, err = run(client, capsys, "vote", "--transcript", t, "--voter", "0", "--candidate", "0")
    assert code == 1 and "AlreadyVoted" in err
    for phase in ("close", "mix", "tally"):
        assert run(client, capsys, phase, "--transcript", t)[0] == 0
    code, out, _ = run(client, capsys, "coerce", "--transcript", t, "--voter", "3", "--candidate", "1")
    assert code == 0 and "fake alpha" in out
    wallets = tmp_path / "wallets"
    code, out, _ = run(client, capsys, "notify", "--transcript", t, "--wallet-dir", str(wallets))
    assert code == 0 and out.count("delivered") == 4

    code, out, _ = run(client, capsys, "voter", "retrieve-tracker", "--wallet", str(wallets / "voter-1.json"),
                       "--transcript", t)
    assert code == 0 and "Bob" in out
    code, out, _ = run(client, capsys, "voter", "retrieve-tracker", "--wallet", str(wallets / "voter-3.json"),
                       "--transcript", t)
    assert code == 0 and "Bob" in out  # coerced voter sees the coercer's choice

    board = json.loads(client.get("/elections/verify", params={"transcript": t}).text)
    assert board["ok"]
    w0 = json.loads((wallets / "voter-0.json").read_text())
    assert w0["voter"] == 0
    code, out, _ = run(client, capsys, "voter", "fake-alpha", "--wallet", str(wallets / "voter-0.json"),
                       "--transcript", t, "--target", "1", "--out", str(tmp_path / "fake.json"))
    assert code == 0
    code, out, _ = run(client, capsys, "voter", "retrieve-tracker", "--wallet", str(tmp_path / "fake.json"),
                       "--transcript", t)
    assert code == 0 and out.startswith("tracker 1:")

    code, out, _ = run(client, capsys, "audit", "--transcript", t, "--sample-size", "4", "--seed", "3")
    assert code == 0 and "0 mismatched" in out
    code, out, _ = run(client, capsys, "audit", "--transcript", t, "--direction", "paper-to-bb", "--box", "2")
    assert code == 0 and "1 matched" in out
    code, out, _ = run(client, capsys, "dispute", "--transcript", t, "--voter", "2", "--claimed", "0")
    assert code == 0 and out.startswith("ComplaintUnsupported")

    report = tmp_path / "report.bin"
    code, out, _ = run(client, capsys, "verify", t, "--report", str(report))
    assert code == 0 and report.exists()
    code, out, _ = run(client, capsys, "bb", "verify", t)
    assert code == 0 and out.startswith("chain ok")


def test_cli_local_verify_detects_damage(tmp_path, capsys, client):
    t = tmp_path / "d.bb"
    client.post("/scenarios", json={"config": CFG, "script": {"voters": {"0": ["vote:0"], "1": ["vote:1"]}},
                                    "transcript": str(t)})
    data = bytearray(t.read_bytes())
    data[-5] ^= 1
    t.write_bytes(bytes(data))
    code, out, _ = run(None, capsys, "bb", "verify", str(t))
    assert code == 2 and "chain broken" in out
    code, out, _ = run(None, capsys, "verify", str(t))
    assert code == 2 and "chain" in out


def test_cli_unreachable_server(capsys):
    code, _, err = run(None, capsys, "close", "--transcript", "x.bb", "--server", "http://127.0.0.1:9")
    assert code == 1 and "cannot reach" in err
