"""Election orchestration: setup, casting, both mix stages, tally and notification."""
from __future__ import annotations

import logging
import random
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Sequence

from .bulletin import BulletinBoard, Phase
from .crypto.elgamal import Ciphertext, exp_decode
from .crypto.groups import Group, GroupElement, get_group
from .crypto.rcca import binding_for, layout_for, unpad
from .crypto.schnorr import Signature, verify_sig
from .encoding import digest, encode
from .errors import ElectryoError, InvalidCiphertext
from .mixnet import EG, RCCA, MixBatch, MixServer, run_cascade
from .roles import (
    ID_LABEL,
    SIG_LABEL,
    TRA,
    BallotCode,
    Clerk,
    PaperBallot,
    Printer,
    ReceiptCode,
    Scanner,
    ScannerFault,
    VoterCredential,
    card_issue,
    release_shares,
    signature_message,
    verify_scanner_tuple,
    voter_id_for,
)
from .tellers import Teller, dkg, threshold_decrypt
from .trackers import (
    AlphaTerm,
    VoterRow,
    assign_trackers,
    construct_commitments,
    fake_alpha,
    retrieve_tracker,
    setup_trackers,
)
from .transcript import (
    BAD_SIGNATURE,
    BALLOT,
    CLOSE,
    COMMITMENT_DECRYPTION,
    COMMITMENT_FACTORS,
    DUPLICATE_ID,
    ELIGIBILITY,
    IDSIG_DECRYPTION,
    JOINED_ROWS,
    MALFORMED,
    MIX_INPUT,
    MIX_SKIPPED,
    MIX_STAGE,
    OK,
    PAUSE,
    PET,
    TALLY_BOARD,
    TALLY_DECRYPTION,
    TALLY_KEY,
    TRACKER_MIX,
    TRACKERS,
    UNKNOWN_ID,
    VOTER_ROWS,
    ElectionParams,
    TranscriptView,
    commitments_ctx,
    idsig_ctx,
    rows_wire,
    shares_wire,
    stage1_ctx,
    stage2_ctx,
    tally_ctx,
    tracker_mix_ctx,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ElectionConfig:
    name: str = "electryo-demo"
    candidates: tuple[str, ...] = ("Alice", "Bob", "Carol")
    voter_count: int = 25
    tellers: tuple[int, int] = (3, 2)
    mix_servers: int = 3
    group: str = "test"
    seed: int = 0
    sign_extra: bool = False
    date: str = ""
    station: str = ""

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        object.__setattr__(self, "tellers", tuple(self.tellers))
        if len(self.candidates) < 2:
            raise ValueError("need at least two candidates")
        if self.voter_count < 2:
            raise ValueError("need at least two voters")
        n, t = self.tellers
        if not 1 <= t <= n:
            raise ValueError("teller threshold must satisfy 1 <= t <= N")
        if self.mix_servers < 1:
            raise ValueError("need at least one mix server")
        get_group(self.group)

    @property
    def election_id(self) -> bytes:
        # stands in for a public randomness beacon; derived from the seed for replayability
        return b"EL-" + digest("electryo/election-id", self.name, self.seed)[:16]

    @property
    def signature_extra(self) -> bytes:
        return encode([self.date, self.station]) if self.sign_extra else b""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["candidates"] = list(self.candidates)
        d["tellers"] = list(self.tellers)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ElectionConfig":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass
class CastFault:
    flip_to: int | None = None
    drop: bool = False
    copy_from: int | None = None
    forge_signature: bool = False


@dataclass
class Notification:
    voter_index: int
    status: str  # "delivered", "pet-failed", "no-row"
    pet_row: int | None = None


def mix_kinds(group: Group) -> tuple[str, ...]:
    code_len = 2 * 2 * 2 * layout_for(group).pairs_per_half
    return (RCCA, RCCA) + (EG,) * code_len + (EG, EG)


def decode_idsig(group: Group, eid: bytes, elems: Sequence[GroupElement]) -> tuple[bytes, bytes]:
    """Recover (id, signature bytes) from the decrypted RCCA blocks of one row."""
    h = layout_for(group).pairs_per_half
    vid = unpad(group, elems[:h], elems[h:2 * h], binding_for(eid, ID_LABEL))
    sig = unpad(group, elems[2 * h:3 * h], elems[3 * h:4 * h], binding_for(eid, SIG_LABEL))
    return vid, sig


def assess_eligibility(group: Group, eid: bytes, extra: bytes, decrypted: Sequence[Sequence[GroupElement]],
                       roll: dict[bytes, GroupElement]) -> list[dict]:
    """One status row per stage-1 output row; nothing is dropped silently."""
    rows = []
    for r, elems in enumerate(decrypted):
        try:
            vid, sig_bytes = decode_idsig(group, eid, elems)
        except InvalidCiphertext:
            rows.append({"row": r, "id": b"", "sig": b"", "status": MALFORMED})
            continue
        status = OK
        if vid not in roll:
            status = UNKNOWN_ID
        else:
            try:
                sig = Signature.from_bytes(group, sig_bytes)
                good = verify_sig(roll[vid], signature_message(vid, eid, extra), sig)
            except ValueError:
                good = False
            if not good:
                status = BAD_SIGNATURE
        rows.append({"row": r, "id": vid, "sig": sig_bytes, "status": status})
    counts: dict[bytes, int] = {}
    for row in rows:
        if row["status"] != MALFORMED:
            counts[row["id"]] = counts.get(row["id"], 0) + 1
    for row in rows:
        if row["status"] != MALFORMED and counts[row["id"]] > 1:
            row["status"] = DUPLICATE_ID
    return rows


def join_rows(eligibility: Sequence[dict], stage1_rows: Sequence[tuple], voter_ids: Sequence[bytes],
              assigned: Sequence[Ciphertext], commitments: Sequence[GroupElement]) -> list[dict]:
    """Attach each accepted ballot to its voter's encrypted tracker and commitment."""
    index = {vid: i for i, vid in enumerate(voter_ids)}
    out = []
    for e in eligibility:
        if e["status"] != OK:
            continue
        i = index[bytes(e["id"])]
        out.append({"row": int(e["row"]), "voter": i, "tracker": assigned[i].to_wire(),
                    "C": commitments[i].to_bytes(), "vote": stage1_rows[int(e["row"])][-2].to_wire()})
    return out


class Election:
    """A single polling-station election driven phase by phase."""

    def __init__(self, config: ElectionConfig, transcript_path=None):
        self.config = config
        self.group = get_group(config.group)
        self.eid = config.election_id
        self.bb = BulletinBoard(transcript_path)
        self.state = "new"
        self._rngs: dict[str, random.Random] = {}
        self.credentials: list[VoterCredential] = []
        self.tellers: list[Teller] = []
        self.key = None
        self.postings: dict = {}
        self.clerk = Clerk([voter_id_for(i) for i in range(config.voter_count)])
        self.box: list[PaperBallot] = []
        self.printed: dict[int, BallotCode] = {}
        self.receipts: dict[int, ReceiptCode] = {}
        self.cast_votes: dict[int, int] = {}
        self.inbox: dict[int, AlphaTerm] = {}
        self.notification_order: list[int] = []
        self.notifications: dict[int, Notification] = {}
        self.coerced: dict[int, dict] = {}
        self.warnings: list[str] = []

    # -- plumbing --------------------------------------------------------------

    def rng(self, label: str) -> random.Random:
        if label not in self._rngs:
            seed = int.from_bytes(digest("electryo/rng", self.config.seed, label)[:16], "big")
            self._rngs[label] = random.Random(seed)
        return self._rngs[label]

    def _require(self, *states: str) -> None:
        if self.state not in states:
            raise ElectryoError(f"operation not allowed in state {self.state!r} (need {', '.join(states)})")

    def view(self) -> TranscriptView:
        return TranscriptView(self.bb)

    def _servers(self, purpose: str) -> list[MixServer]:
        return [MixServer(k, self.rng(f"mix-{k}/{purpose}")) for k in range(1, self.config.mix_servers + 1)]

    @property
    def n_voters(self) -> int:
        return self.config.voter_count

    @property
    def n_candidates(self) -> int:
        return len(self.config.candidates)

    # -- setup -------------------------------------------------------------------

    def setup(self) -> None:
        self._require("new")
        cfg, group, eid = self.config, self.group, self.eid
        n_tellers, t = cfg.tellers
        self.key, shares = dkg(n_tellers, t, group, [self.rng(f"teller-{k}/dkg") for k in range(1, n_tellers + 1)])
        self.tellers = [Teller.create(s, group, eid, self.rng(f"teller-{s.teller_id}/sign")) for s in shares]
        self.credentials = [
            VoterCredential.create(voter_id_for(i), group, self.rng(f"voter-{i}/keys"), f"voter{i}@example.org")
            for i in range(self.n_voters)
        ]
        params = ElectionParams(eid, group, cfg.candidates, self.n_voters, self.n_voters, n_tellers, t,
                                cfg.mix_servers, cfg.signature_extra)
        self.bb.append(Phase.Setup, "authority", params.to_wire())
        self.bb.append(Phase.Setup, "tellers", {
            "kind": TALLY_KEY, "key": self.key.to_wire(),
            "teller_vks": [[tl.teller_id, tl.vk.to_bytes()] for tl in self.tellers],
        })
        trackers = setup_trackers(self.n_voters, group)
        self.bb.append(Phase.Setup, "authority", {"kind": TRACKERS, "trackers": list(trackers.trackers)})
        enc_trackers, stages = assign_trackers(trackers, self.n_voters, self._servers("trackers"),
                                               self.key.pk, tracker_mix_ctx(eid))
        self.bb.append(Phase.Setup, "mixnet", {"kind": TRACKER_MIX, "stages": [s.to_wire() for s in stages]})

        pks = [c.selene.pk for c in self.credentials]
        self.postings, commitments, dec_shares = construct_commitments(
            self.tellers, self.key, pks, enc_trackers, commitments_ctx(eid), self.rng("tellers/commitments"))
        for tid, posts in self.postings.items():
            self.bb.append(Phase.PreVote, f"teller-{tid}", {
                "kind": COMMITMENT_FACTORS, "teller": tid, "postings": [p.to_wire() for p in posts]})
        self.bb.append(Phase.PreVote, "tellers", {
            "kind": COMMITMENT_DECRYPTION,
            "rows": [{"C": c.to_bytes(), "shares": shares_wire(ds)} for c, ds in zip(commitments, dec_shares)],
        })
        rows = [VoterRow(cred.voter_id, cred.signing.vk, cred.selene.pk, enc, c)
                for cred, enc, c in zip(self.credentials, enc_trackers, commitments)]
        self.bb.append(Phase.PreVote, "authority", {"kind": VOTER_ROWS, "rows": [r.to_wire() for r in rows]})

        self.printer = Printer(self.key.pk, eid, self.rng("printer"))
        self.scanner = Scanner(self.key.pk, eid, self.n_candidates, self.rng("scanner"))
        self.tra = TRA(self.key, self.tellers, eid, self.rng("tra"))
        self.state = "voting"

    # -- voting ------------------------------------------------------------------

    def cast(self, voter_index: int, candidate: int, fault: CastFault | None = None) -> ReceiptCode:
        self._require("voting")
        if not 0 <= candidate < self.n_candidates:
            raise ValueError(f"candidate index {candidate} out of range")
        fault = fault or CastFault()
        cred = self.credentials[voter_index]
        self.clerk.register(cred.voter_id)
        card = card_issue(cred, self.eid, self.key.pk, self.rng(f"card-{voter_index}"),
                          self.config.signature_extra, forge=fault.forge_signature)
        ballot = self.printer.print_ballot(card)
        self.printed[voter_index] = ballot.ballot_code
        ballot = ballot.fill(candidate)
        sfault = ScannerFault(
            flip_to=fault.flip_to, drop=fault.drop,
            copy_code=self.printed[fault.copy_from] if fault.copy_from is not None else None,
        )
        tup, rc = self.scanner.scan(ballot, sfault)
        self.box.append(ballot.deposit(len(self.box)))
        if not fault.drop:
            self.bb.append(Phase.CastBallots, "scanner", {"kind": BALLOT, "tuple": tup.to_wire()})
        self.receipts[voter_index] = rc
        self.cast_votes[voter_index] = candidate
        return rc

    def close(self) -> None:
        self._require("voting")
        count = len(self.bb.find(BALLOT, Phase.CastBallots))
        self.bb.append(Phase.CastBallots, "station", {"kind": CLOSE, "count": count})
        self.state = "closed"

    # -- mixing ----------------------------------------------------------------

    def _decrypt(self, c: Ciphertext, ctx, rng):
        return threshold_decrypt(self.tellers, self.key, c, ctx, rng)

    def mix(self) -> None:
        self._require("closed")
        view = self.view()
        group, eid, pk = self.group, self.eid, self.key.pk
        accepted, rejected, rows = [], [], []
        for idx, tup in enumerate(view.ballots):
            ok, reason = verify_scanner_tuple(tup, pk, self.n_candidates, eid)
            if ok:
                accepted.append(idx)
                rows.append(tup.mix_row())
            else:
                rejected.append([idx, reason])
        kinds = mix_kinds(group)
        self.bb.append(Phase.MixIdSig, "station", {
            "kind": MIX_INPUT, "kinds": list(kinds), "rows": rows_wire(rows),
            "accepted": accepted, "rejected": rejected})
        stage1 = self._cascade(rows, kinds, pk, stage1_ctx(eid), "idsig", Phase.MixIdSig)

        rng = self.rng("tellers/idsig")
        dec_rows, decrypted = [], []
        for r, row in enumerate(stage1):
            pairs = (*row[0].pairs, *row[1].pairs)
            elems, shares = [], []
            for p, pair in enumerate(pairs):
                m, ds = self._decrypt(pair, idsig_ctx(eid, r, p), rng)
                elems.append(m)
                shares.append(shares_wire(ds))
            decrypted.append(elems)
            dec_rows.append({"elems": [e.to_bytes() for e in elems], "shares": shares})
        self.bb.append(Phase.MixIdSig, "tellers", {"kind": IDSIG_DECRYPTION, "rows": dec_rows})

        roll = {c.voter_id: c.signing.vk for c in self.credentials}
        elig = assess_eligibility(group, eid, self.config.signature_extra, decrypted, roll)
        for e in elig:
            if e["status"] != OK:
                self.warnings.append(f"stage-1 row {e['row']} excluded: {e['status']}")
        self.bb.append(Phase.EligibleBallots, "authority", {"kind": ELIGIBILITY, "rows": elig})
        joined = join_rows(elig, stage1, [c.voter_id for c in self.credentials],
                           view.assigned_trackers, view.commitments)
        self.bb.append(Phase.EligibleBallots, "authority", {"kind": JOINED_ROWS, "rows": joined})

        rows2 = [(Ciphertext.from_wire(group, j["tracker"]), Ciphertext.from_wire(group, j["vote"])) for j in joined]
        self._cascade(rows2, (EG, EG), pk, stage2_ctx(eid), "tracker-vote", Phase.MixTrackerVote)
        self.state = "mixed"

    def _cascade(self, rows, kinds, pk, ctx, purpose: str, phase: Phase) -> list[tuple]:
        if len(rows) < 2:
            msg = f"{purpose} mix skipped: {len(rows)} row(s), no anonymity set"
            log.warning(msg)
            self.warnings.append(msg)
            self.bb.append(phase, "mixnet", {"kind": MIX_SKIPPED, "rows": len(rows), "reason": msg})
            return list(rows)
        final, stages = run_cascade(MixBatch.of(rows, kinds), self._servers(purpose), pk, ctx)
        for st in stages:
            self.bb.append(phase, f"mix-{st.server_id}", {"kind": MIX_STAGE, "stage": st.to_wire()})
        return list(final.rows)

    # -- tally ---------------------------------------------------------------------

    def tally(self) -> list[tuple[int, int]]:
        self._require("mixed")
        view = self.view()
        rng = self.rng("tellers/tally")
        dec_rows, board = [], []
        for r, row in enumerate(view.stage2_output):
            elems, shares = [], []
            for col, c in enumerate(row):
                m, ds = self._decrypt(c, tally_ctx(self.eid, r, col), rng)
                elems.append(m)
                shares.append(shares_wire(ds))
            dec_rows.append({"elems": [e.to_bytes() for e in elems], "shares": shares})
            board.append((exp_decode(elems[0], self.n_voters), exp_decode(elems[1], self.n_candidates) - 1))
        self.bb.append(Phase.TallyBoard, "tellers", {"kind": TALLY_DECRYPTION, "rows": dec_rows})
        self.bb.append(Phase.TallyBoard, "authority", {"kind": TALLY_BOARD, "rows": [list(b) for b in board]})
        self.bb.append(Phase.TallyBoard, "authority", {"kind": PAUSE})
        self.state = "tallied"
        return board

    # -- coercion and notification --------------------------------------------

    def voter_commitment(self, voter_index: int) -> GroupElement:
        return self.view().voter_rows[voter_index].commitment

    def coerce(self, voter_index: int, coercer_candidate: int) -> AlphaTerm:
        """Voter computes a fake alpha for a board row showing the coercer's choice
        and asks the TRA to deliver it in place of the real one."""
        self._require("tallied")
        board = self.view().tally_board
        options = sorted(t for t, v in board if v == coercer_candidate)
        if not options:
            raise ElectryoError(f"no board row carries candidate {coercer_candidate}")
        target = self.rng(f"voter-{voter_index}/coerce").choice(options)
        cred = self.credentials[voter_index]
        fake = fake_alpha(cred.selene.sk, self.voter_commitment(voter_index), target, voter_index)
        self.tra.suppress(voter_index, fake)
        self.coerced[voter_index] = {"candidate": coercer_candidate, "tracker": target, "alpha": fake}
        return fake

    def notify(self, voters: Iterable[int] | None = None, claimed: dict[int, str] | None = None
               ) -> dict[int, Notification]:
        """Receipt-gated alpha delivery, in a seeded random order kept off the transcript."""
        self._require("tallied", "notified")
        claimed = claimed or {}
        view = self.view()
        targets = sorted(self.receipts if voters is None else voters)
        order = list(targets)
        self.rng("notification-order").shuffle(order)
        self.notification_order.extend(order)
        vks = view.teller_vks
        for i in order:
            cred = self.credentials[i]
            row = view.row_of_id(cred.voter_id)
            if row is None:
                self.notifications[i] = Notification(i, "no-row")
                continue
            enc_rc = view.stage1_output[row][-1]
            code = claimed.get(i, str(self.receipts[i]))
            passed, mine, pet = self.tra.gate(code, enc_rc, row)
            self.bb.append(Phase.PetLog, "tra", {"kind": PET, "row": row, "claimed": mine.to_wire(),
                                                 "result": pet.to_wire()})
            if not passed:
                self.notifications[i] = Notification(i, "pet-failed", row)
                continue
            records = release_shares(self.tellers, i)
            postings = {tid: posts[i] for tid, posts in self.postings.items()}
            self.inbox[i] = self.tra.notify(i, True, records, postings, cred.selene.pk, vks,
                                            commitments_ctx(self.eid))
            self.notifications[i] = Notification(i, "delivered", row)
        self.state = "notified"
        return {i: self.notifications[i] for i in order}

    def voter_tracker(self, voter_index: int) -> int:
        """What the voter's app shows: tracker opened from the delivered alpha."""
        alpha = self.inbox[voter_index].alpha
        return retrieve_tracker(self.credentials[voter_index].selene.sk, alpha,
                                self.voter_commitment(voter_index), self.n_voters)

    def voter_check(self, voter_index: int) -> int | None:
        """Board vote found under the voter's retrieved tracker."""
        tracker = self.voter_tracker(voter_index)
        for t, v in self.view().tally_board:
            if t == tracker:
                return v
        return None

    def voter_key_wire(self, voter_index: int) -> dict:
        cred = self.credentials[voter_index]
        return {"index": voter_index, "id": cred.voter_id, "sk": cred.selene.sk,
                "group": self.group.name, "election_id": self.eid}

    # -- whole run ---------------------------------------------------------------

    def run_all(self, votes: dict[int, int], faults: dict[int, CastFault] | None = None) -> None:
        faults = faults or {}
        self.setup()
        for i in sorted(votes):
            self.cast(i, votes[i], faults.get(i))
        self.close()
        self.mix()
        self.tally()
