"""vaxledger: a permissioned covid testing and vaccination registry on a
proof-of-work hash-chained ledger, with QR-anchored credentials."""

from .config import ServiceConfig, load_config
from .credentials import CredentialPayload, VerificationReport
from .ledger import Block, Blockchain, ChainConfig, Transaction
from .node import Node, NodeConfig
from .registry import PermissionMask, Role, Status
from .store import Store
from .testing import BANGLADESH_DIVISIONS, TestResult

__version__ = "0.1.0"

__all__ = [
    "BANGLADESH_DIVISIONS",
    "Block",
    "Blockchain",
    "ChainConfig",
    "CredentialPayload",
    "Node",
    "NodeConfig",
    "PermissionMask",
    "Role",
    "ServiceConfig",
    "Status",
    "Store",
    "TestResult",
    "Transaction",
    "VerificationReport",
    "load_config",
    "__version__",
]
