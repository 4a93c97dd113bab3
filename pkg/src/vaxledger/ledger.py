"""Append-only hash-chained block store with proof-of-work.

Single source of truth for the system: every state mutation is a
transaction mined into a block, and every off-chain record is bound to the
chain through (key, digest) anchors carried on transactions. The chain is
fully replayable: transactions carry their canonical payload bytes, so
`payload_hash` is recomputable and the terminal state is a pure function
of the tx log.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from . import canonical
from .errors import CorruptChain, DuplicateTransaction, EmptyPool

ZERO_HASH = "0" * 64

TX_KINDS = frozenset(
    {
        "signup",
        "approval",
        "issue_result",
        "add_vaccine",
        "update_storage",
        "prioritise",
        "push_vaccine",
        "set_permission",
        "close_campaign",
    }
)


@dataclass(frozen=True)
class ChainConfig:
    difficulty: int = 12  # leading zero bits
    max_txs_per_block: int = 100

    def __post_init__(self) -> None:
        if not 0 <= self.difficulty <= 24:
            raise ValueError("difficulty must be in 0..24")
        if self.max_txs_per_block < 1:
            raise ValueError("max_txs_per_block must be >= 1")


@dataclass(frozen=True)
class Transaction:
    tx_id: str
    kind: str
    payload: bytes  # canonical encoding of the operation record
    payload_hash: str
    submitter: str
    timestamp: int  # logical sequence number, not wall clock
    anchors: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in TX_KINDS:
            raise ValueError(f"unknown tx kind {self.kind!r}")

    @classmethod
    def build(
        cls,
        kind: str,
        payload_value: canonical.Value,
        submitter: str,
        timestamp: int,
        anchors: Iterable[tuple[str, str]] = (),
    ) -> "Transaction":
        payload = canonical.encode(payload_value)
        payload_hash = canonical.digest_bytes(payload)
        tx_id = canonical.digest(
            ["tx", kind, payload_hash, submitter, timestamp]
        )[:32]
        return cls(
            tx_id=tx_id,
            kind=kind,
            payload=payload,
            payload_hash=payload_hash,
            submitter=submitter,
            timestamp=timestamp,
            anchors=tuple(anchors),
        )

    def digest(self) -> str:
        return canonical.digest(
            {
                "tx_id": self.tx_id,
                "kind": self.kind,
                "payload_hash": self.payload_hash,
                "submitter": self.submitter,
                "timestamp": self.timestamp,
                "anchors": [list(pair) for pair in self.anchors],
            }
        )

    def payload_value(self) -> canonical.Value:
        return canonical.decode(self.payload)

    def to_record(self) -> dict:
        return {
            "tx_id": self.tx_id,
            "kind": self.kind,
            "payload": self.payload,
            "payload_hash": self.payload_hash,
            "submitter": self.submitter,
            "timestamp": self.timestamp,
            "anchors": [list(pair) for pair in self.anchors],
        }

    @classmethod
    def from_record(cls, record: dict) -> "Transaction":
        return cls(
            tx_id=record["tx_id"],
            kind=record["kind"],
            payload=record["payload"],
            payload_hash=record["payload_hash"],
            submitter=record["submitter"],
            timestamp=record["timestamp"],
            anchors=tuple((k, d) for k, d in record["anchors"]),
        )


@dataclass(frozen=True)
class Block:
    height: int
    prev_hash: str
    tx_list: tuple[Transaction, ...]
    nonce: int
    block_hash: str

    @staticmethod
    def compute_hash(
        height: int, prev_hash: str, tx_digests: list[str], nonce: int
    ) -> str:
        return canonical.digest([height, prev_hash, tx_digests, nonce])

    def recompute_hash(self) -> str:
        return self.compute_hash(
            self.height,
            self.prev_hash,
            [tx.digest() for tx in self.tx_list],
            self.nonce,
        )

    def to_record(self) -> dict:
        return {
            "height": self.height,
            "prev_hash": self.prev_hash,
            "nonce": self.nonce,
            "block_hash": self.block_hash,
            "txs": [tx.to_record() for tx in self.tx_list],
        }

    @classmethod
    def from_record(cls, record: dict) -> "Block":
        return cls(
            height=record["height"],
            prev_hash=record["prev_hash"],
            tx_list=tuple(Transaction.from_record(r) for r in record["txs"]),
            nonce=record["nonce"],
            block_hash=record["block_hash"],
        )


@dataclass(frozen=True)
class Receipt:
    tx_id: str
    position: int  # position in the pending pool


@dataclass
class IntegrityReport:
    valid: bool
    first_bad_height: Optional[int] = None
    reason: Optional[str] = None
    height: int = 0  # chain tip height at verification time

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "first_bad_height": self.first_bad_height,
            "reason": self.reason,
            "height": self.height,
        }


def mine(
    height: int, prev_hash: str, txs: tuple[Transaction, ...], difficulty: int
) -> Block:
    """Deterministic nonce search from 0 upward over a 64-bit space."""
    tx_digests = [tx.digest() for tx in txs]
    for nonce in range(1 << 64):
        block_hash = Block.compute_hash(height, prev_hash, tx_digests, nonce)
        if canonical.leading_zero_bits(block_hash) >= difficulty:
            return Block(
                height=height,
                prev_hash=prev_hash,
                tx_list=txs,
                nonce=nonce,
                block_hash=block_hash,
            )
    raise RuntimeError("nonce space exhausted")  # unreachable at difficulty <= 24


@dataclass
class Blockchain:
    """Chain plus mempool. All mutations go through one writer."""

    config: ChainConfig = field(default_factory=ChainConfig)
    blocks: list[Block] = field(default_factory=list)
    pool: list[Transaction] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._tx_ids: set[str] = set()
        self._anchor_index: dict[str, list[tuple[int, str]]] = {}
        if not self.blocks:
            self.blocks.append(mine(0, ZERO_HASH, (), self.config.difficulty))
        for block in self.blocks:
            self._index_block(block)

    def _index_block(self, block: Block) -> None:
        for tx in block.tx_list:
            self._tx_ids.add(tx.tx_id)
            for key, digest in tx.anchors:
                self._anchor_index.setdefault(key, []).append(
                    (block.height, digest)
                )

    @property
    def height(self) -> int:
        return self.blocks[-1].height

    @property
    def tip(self) -> Block:
        return self.blocks[-1]

    def append_transaction(self, tx: Transaction) -> Receipt:
        if tx.tx_id in self._tx_ids or any(p.tx_id == tx.tx_id for p in self.pool):
            raise DuplicateTransaction(tx.tx_id)
        self.pool.append(tx)
        return Receipt(tx_id=tx.tx_id, position=len(self.pool) - 1)

    def mine_block(self, config: ChainConfig | None = None) -> Block:
        if not self.pool:
            raise EmptyPool("nothing to mine")
        cfg = config or self.config
        batch = tuple(self.pool[: cfg.max_txs_per_block])
        block = mine(self.height + 1, self.tip.block_hash, batch, cfg.difficulty)
        del self.pool[: len(batch)]
        self.blocks.append(block)
        self._index_block(block)
        return block

    def verify_chain(self, upto_height: int | None = None) -> IntegrityReport:
        limit = self.height if upto_height is None else upto_height
        if limit > self.height:
            return IntegrityReport(
                valid=False,
                first_bad_height=limit,
                reason="height beyond chain tip",
                height=self.height,
            )
        prev_hash = ZERO_HASH
        for expected_height, block in enumerate(self.blocks[: limit + 1]):
            bad = self._check_block(block, expected_height, prev_hash)
            if bad is not None:
                return IntegrityReport(
                    valid=False,
                    first_bad_height=block.height,
                    reason=bad,
                    height=self.height,
                )
            prev_hash = block.block_hash
        return IntegrityReport(valid=True, height=self.height)

    def _check_block(
        self, block: Block, expected_height: int, expected_prev: str
    ) -> str | None:
        if block.height != expected_height:
            return "heights not consecutive"
        if block.prev_hash != expected_prev:
            return "previous-hash link broken"
        if block.height > 0 and not block.tx_list:
            return "empty tx list in non-genesis block"
        for tx in block.tx_list:
            if canonical.digest_bytes(tx.payload) != tx.payload_hash:
                return f"payload hash mismatch in tx {tx.tx_id}"
        if block.recompute_hash() != block.block_hash:
            return "block hash does not recompute"
        if canonical.leading_zero_bits(block.block_hash) < self.config.difficulty:
            return "difficulty target not met"
        return None

    def get_anchor(self, key: str) -> str | None:
        entry = self.get_anchor_entry(key)
        return entry[1] if entry else None

    def get_anchor_entry(self, key: str) -> tuple[int, str] | None:
        """(height, digest) of the most recent anchor write for key."""
        entries = self._anchor_index.get(key)
        return entries[-1] if entries else None

    def anchors_at(self, height: int) -> set[str]:
        """All anchor digests recorded in the block at `height`."""
        if height < 0 or height > self.height:
            return set()
        return {
            digest
            for tx in self.blocks[height].tx_list
            for _, digest in tx.anchors
        }

    def iter_transactions(self) -> Iterable[tuple[int, Transaction]]:
        for block in self.blocks:
            for tx in block.tx_list:
                yield block.height, tx


# --- chain file: length-prefixed canonical records, append-only ---

_HEADER_MAGIC = "vaxledger-chain"
_FORMAT = 1


def _write_record(fh, value: canonical.Value) -> None:
    raw = canonical.encode(value)
    fh.write(len(raw).to_bytes(4, "big"))
    fh.write(raw)


def _read_record(fh) -> canonical.Value | None:
    head = fh.read(4)
    if not head:
        return None
    if len(head) != 4:
        raise CorruptChain("truncated record length")
    length = int.from_bytes(head, "big")
    raw = fh.read(length)
    if len(raw) != length:
        raise CorruptChain("truncated record body")
    try:
        return canonical.decode(raw)
    except canonical.DecodeError as exc:
        raise CorruptChain(f"undecodable record: {exc}") from exc


class ChainWriter:
    """Appends block records to the chain file as they are mined."""

    def __init__(self, path: Path, config: ChainConfig):
        self.path = Path(path)
        fresh = not self.path.exists() or self.path.stat().st_size == 0
        self._fh = open(self.path, "ab")
        if fresh:
            _write_record(
                self._fh,
                {
                    "magic": _HEADER_MAGIC,
                    "format": _FORMAT,
                    "difficulty": config.difficulty,
                    "max_txs_per_block": config.max_txs_per_block,
                },
            )
            self._fh.flush()

    def append(self, block: Block) -> None:
        _write_record(self._fh, block.to_record())
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


def load_chain_file(path: Path) -> tuple[ChainConfig, list[Block]]:
    path = Path(path)
    with open(path, "rb") as fh:
        header = _read_record(fh)
        if (
            not isinstance(header, dict)
            or header.get("magic") != _HEADER_MAGIC
            or header.get("format") != _FORMAT
        ):
            raise CorruptChain("bad chain file header")
        config = ChainConfig(
            difficulty=header["difficulty"],
            max_txs_per_block=header["max_txs_per_block"],
        )
        blocks: list[Block] = []
        while True:
            record = _read_record(fh)
            if record is None:
                break
            blocks.append(Block.from_record(record))
    if not blocks:
        raise CorruptChain("chain file has no blocks")
    return config, blocks
