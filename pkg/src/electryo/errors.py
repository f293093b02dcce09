"""Exception hierarchy shared by every layer of the package."""


class ElectryoError(Exception):
    """Base class for protocol-level failures."""


# crypto
class NotInRange(ElectryoError):
    pass


class InvalidCiphertext(ElectryoError):
    pass


class VerifyFailed(ElectryoError):
    pass


# threshold / PET
class BadShare(ElectryoError):
    pass


class ShareProofInvalid(ElectryoError):
    pass


class ShareInvalid(ElectryoError):
    pass


class InsufficientShares(ElectryoError):
    pass


# mixing
class BatchMalformed(ElectryoError):
    pass


class StageProofInvalid(ElectryoError):
    def __init__(self, stage: int, reason: str = ""):
        super().__init__(f"mix stage {stage} failed verification: {reason}")
        self.stage = stage
        self.reason = reason


# bulletin board
class PhaseOrderViolation(ElectryoError):
    pass


class ChainBroken(ElectryoError):
    def __init__(self, index: int, reason: str = ""):
        super().__init__(f"hash chain broken at entry {index}: {reason}")
        self.index = index
        self.reason = reason


# polling station
class NotOnRoll(ElectryoError):
    pass


class AlreadyVoted(ElectryoError):
    pass


class InvalidCardOutput(ElectryoError):
    pass


class UnfilledBallot(ElectryoError):
    pass


class InvalidReceiptCode(ElectryoError):
    pass


class PetFailed(ElectryoError):
    pass


class MissingShare(ElectryoError):
    pass


# audits
class NoMatch(ElectryoError):
    pass


class MultiMatch(ElectryoError):
    pass


class PaperBallotMissing(ElectryoError):
    pass
