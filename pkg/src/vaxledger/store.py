"""Durable storage: chain log, off-chain state snapshot, photo objects.

The chain log is the authority; the snapshot is the conventional-database
side of the split and doubles as an integrity crosscheck. Recovery
replays the chain, then insists the snapshot agrees with the replayed
state and that every anchored record still matches its on-chain digest;
any divergence refuses startup with the offending records flagged.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from . import canonical
from .errors import CorruptChain, CorruptStore
from .ledger import Blockchain, ChainWriter, load_chain_file
from .node import Node, NodeConfig
from .registry import Role, Status

CHAIN_FILE = "chain.log"
SNAPSHOT_FILE = "state.snapshot"
OBJECTS_DIR = "objects"
AUTHORITY_SID_FILE = "authority.sid"  # how the operator learns their sign-in SID


@dataclass
class RecoveryReport:
    recovered: bool
    state_digest: str = ""
    flagged_records: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "recovered": self.recovered,
            "state_digest": self.state_digest,
            "flagged_records": list(self.flagged_records),
        }


class Store:
    """One directory holding everything the service persists."""

    def __init__(self, root: Path, node: Node):
        self.root = Path(root)
        self.node = node

    @property
    def snapshot_path(self) -> Path:
        return self.root / SNAPSHOT_FILE

    @property
    def chain_path(self) -> Path:
        return self.root / CHAIN_FILE

    @classmethod
    def open(cls, root: Path, config: NodeConfig) -> tuple["Store", RecoveryReport]:
        """Creates a fresh store or recovers an existing one."""
        root = Path(root)
        root.mkdir(parents=True, exist_ok=True)
        (root / OBJECTS_DIR).mkdir(exist_ok=True)
        chain_path = root / CHAIN_FILE
        if chain_path.exists() and chain_path.stat().st_size > 0:
            return cls._recover(root, config)
        chain = Blockchain(config.chain_config())
        writer = ChainWriter(chain_path, chain.config)
        for block in chain.blocks:
            writer.append(block)
        node = Node(config, chain=chain, writer=writer)
        store = cls(root, node)
        store.save_snapshot()
        store._write_authority_sid()
        return store, RecoveryReport(recovered=False, state_digest=node.state_digest())

    @classmethod
    def _recover(cls, root: Path, config: NodeConfig) -> tuple["Store", RecoveryReport]:
        chain_path = root / CHAIN_FILE
        try:
            chain_config, blocks = load_chain_file(chain_path)
        except CorruptChain as exc:
            raise CorruptStore(f"chain log unreadable: {exc}") from exc
        chain = Blockchain(chain_config, blocks=blocks)
        integrity = chain.verify_chain()
        if not integrity.valid:
            raise CorruptStore(
                f"chain invalid at height {integrity.first_bad_height}: "
                f"{integrity.reason}"
            )
        node = Node(config, chain=chain, writer=ChainWriter(chain_path, chain_config))
        store = cls(root, node)

        snapshot_path = root / SNAPSHOT_FILE
        if snapshot_path.exists():
            snapshot = cls._load_snapshot(snapshot_path)
            # the snapshot may lag the chain (crash between periodic saves);
            # it must match the chain state at its own logical time exactly
            prefix_digest = _prefix_digest(
                config, blocks, snapshot["state"].get("last_seq", 0)
            )
            if snapshot["digest"] != prefix_digest:
                flagged = _cross_check(node, snapshot)
                raise CorruptStore(
                    "snapshot diverges from the replayed chain; "
                    f"flagged records: {flagged or ['state digest']}"
                )
        store.save_snapshot()
        store._write_authority_sid()
        return store, RecoveryReport(recovered=True, state_digest=node.state_digest())

    @staticmethod
    def _load_snapshot(path: Path) -> dict:
        raw = path.read_bytes()
        try:
            snapshot = canonical.decode(raw)
        except canonical.DecodeError as exc:
            raise CorruptStore(f"snapshot unreadable: {exc}") from exc
        if (
            not isinstance(snapshot, dict)
            or "state" not in snapshot
            or "digest" not in snapshot
        ):
            raise CorruptStore("snapshot missing state or digest")
        if canonical.digest(snapshot["state"]) != snapshot["digest"]:
            raise CorruptStore("snapshot digest mismatch")
        return snapshot

    def _write_authority_sid(self) -> None:
        sid = self.node.registry.authority_sid
        if sid:
            (self.root / AUTHORITY_SID_FILE).write_text(sid + "\n")

    def save_snapshot(self) -> str:
        state = self.node.state_value()
        digest = canonical.digest(state)
        raw = canonical.encode({"state": state, "digest": digest})
        tmp = self.snapshot_path.with_suffix(".tmp")
        tmp.write_bytes(raw)
        os.replace(tmp, self.snapshot_path)
        return digest

    def close(self) -> None:
        self.save_snapshot()
        if self.node.writer is not None:
            self.node.writer.close()

    # photo blobs are content-addressed; the chain only ever sees digests
    def put_object(self, data: bytes) -> str:
        digest = canonical.digest_bytes(data)
        path = self.root / OBJECTS_DIR / digest
        if not path.exists():
            path.write_bytes(data)
        return digest

    def get_object(self, digest: str) -> bytes | None:
        path = self.root / OBJECTS_DIR / digest
        return path.read_bytes() if path.exists() else None


def _prefix_digest(config: NodeConfig, blocks: list, last_seq: int) -> str:
    """State digest after replaying only transactions up to last_seq."""
    prefix = []
    for block in blocks:
        if any(tx.timestamp > last_seq for tx in block.tx_list):
            break
        prefix.append(block)
    chain = Blockchain(config.chain_config(), blocks=prefix)
    return Node(config, chain=chain, bootstrap=False).state_digest()


def _cross_check(node: Node, snapshot: dict) -> list[str]:
    """Anchored records in the snapshot that no longer match the chain."""
    flagged = []
    actors = snapshot["state"].get("registry", {}).get("actors", {})
    for sid, record in actors.items():
        if record.get("status") != Status.APPROVED.value:
            continue
        identity = {"sid": sid, "role": record["role"], "wallet": record["wallet"],
                    "name": record["profile"].get("name", "")}
        if record["role"] == Role.HOLDER.value:
            identity["nid"] = record["profile"].get("nid", "")
        elif record["role"] in (Role.ISSUER.value, Role.VACCINE_PROVIDER.value):
            identity["licence"] = record["profile"].get("licence", "")
        anchored = node.chain.get_anchor(f"actor:{sid}")
        if anchored != canonical.digest(identity):
            flagged.append(f"actor:{sid}")
    campaign = snapshot["state"].get("vaccination", {}).get("campaign")
    if campaign:
        key = f"priority_list:{campaign['campaign_id']}"
        if node.chain.get_anchor(key) != campaign.get("list_digest"):
            flagged.append(key)
    return flagged
