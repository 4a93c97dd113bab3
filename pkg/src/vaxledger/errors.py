"""Domain errors.

Every error the state machine can raise maps to one class here so the
service layer can translate them to HTTP statuses uniformly.
"""


class VaxLedgerError(Exception):
    """Base class; .name is what goes over the wire."""

    @property
    def name(self) -> str:
        return type(self).__name__


# ledger
class DuplicateTransaction(VaxLedgerError):
    pass


class EmptyPool(VaxLedgerError):
    pass


class CorruptChain(VaxLedgerError):
    pass


# registry
class Unauthorized(VaxLedgerError):
    pass


class WalletBanned(Unauthorized):
    pass


class DuplicateRegistration(VaxLedgerError):
    pass


class InvalidRole(VaxLedgerError):
    pass


class MalformedProfile(VaxLedgerError):
    pass


class NotPending(VaxLedgerError):
    pass


class CredentialMismatch(VaxLedgerError):
    pass


class SignInFailed(VaxLedgerError):
    pass


class UnknownActor(VaxLedgerError):
    pass


# testing
class UnknownHolder(VaxLedgerError):
    pass


class UnknownDivision(VaxLedgerError):
    pass


# vaccination
class DuplicateVaccine(VaxLedgerError):
    pass


class InvalidParameters(VaxLedgerError):
    pass


class NonPositiveDelta(VaxLedgerError):
    pass


class UnknownVaccine(VaxLedgerError):
    pass


class CampaignInProgress(VaxLedgerError):
    pass


class NoTestedHolders(VaxLedgerError):
    pass


class NoActiveCampaign(VaxLedgerError):
    pass


class PriorityViolation(VaxLedgerError):
    pass


class OutOfStock(VaxLedgerError):
    pass


class DoseLimitReached(VaxLedgerError):
    pass


class VaccineMismatch(VaxLedgerError):
    pass


class HolderNotInCampaign(VaxLedgerError):
    pass


# credentials
class NoTestOnRecord(VaxLedgerError):
    pass


class NotVaccinated(VaxLedgerError):
    pass


class PayloadTooLarge(VaxLedgerError):
    pass


class QRDecodeError(VaxLedgerError):
    pass


# service / store
class CorruptStore(VaxLedgerError):
    pass


class InvalidCertificate(VaxLedgerError):
    pass


class ServiceOverloaded(VaxLedgerError):
    pass
