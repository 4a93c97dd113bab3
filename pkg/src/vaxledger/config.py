"""Service configuration: INI file plus VAXLEDGER_* environment overrides.

Example:

    [vaxledger]
    port = 8640
    difficulty = 12
    divisions = Barisal, Chattogram, Dhaka, Khulna, Mymensingh, Rajshahi, Rangpur, Sylhet
    nid_allowlist = ./nids.txt
    licence_allowlist = ./licences.txt
    store_path = ./store
    authority_wallet = 0xA0FFEE
    authority_password = secret
    max_pending = 256

Allow-list files are newline-delimited NID / licence values. Every key can
be overridden by an environment variable with the VAXLEDGER_ prefix
(VAXLEDGER_PORT, VAXLEDGER_STORE_PATH, ...).
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass
from pathlib import Path

from .node import NodeConfig
from .testing import BANGLADESH_DIVISIONS

ENV_PREFIX = "VAXLEDGER_"
SECTION = "vaxledger"

_DEFAULTS = {
    "host": "127.0.0.1",
    "port": "8640",
    "difficulty": "12",
    "max_txs_per_block": "100",
    "divisions": ", ".join(BANGLADESH_DIVISIONS),
    "nid_allowlist": "",
    "licence_allowlist": "",
    "store_path": "./store",
    "authority_wallet": "0xA000000000000000",
    "authority_password": "change-me",
    "authority_name": "Central Health Authority",
    "kdf_log2_n": "14",
    "session_ttl_seconds": "3600",
    "max_pending": "256",
}


@dataclass(frozen=True)
class ServiceConfig:
    node: NodeConfig
    host: str = "127.0.0.1"
    port: int = 8640
    store_path: Path = Path("./store")
    session_ttl_seconds: int = 3600
    max_pending: int = 256


class ConfigError(ValueError):
    pass


def load_config(path: str | Path | None = None) -> ServiceConfig:
    values = dict(_DEFAULTS)
    base_dir = Path.cwd()
    if path is not None:
        path = Path(path)
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"config file not found: {path}")
        if SECTION not in parser:
            raise ConfigError(f"config file lacks a [{SECTION}] section")
        unknown = set(parser[SECTION]) - set(_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(parser[SECTION])
        base_dir = path.resolve().parent
    for key in _DEFAULTS:
        env = os.environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            values[key] = env

    def as_int(key: str, lo: int, hi: int) -> int:
        try:
            parsed = int(values[key])
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {values[key]!r}")
        if not lo <= parsed <= hi:
            raise ConfigError(f"{key} must be in {lo}..{hi}")
        return parsed

    divisions = tuple(
        d.strip() for d in values["divisions"].split(",") if d.strip()
    )
    if len(divisions) < 1 or len(set(divisions)) != len(divisions):
        raise ConfigError("divisions must be a non-empty unique list")

    node = NodeConfig(
        authority_wallet=values["authority_wallet"],
        authority_password=values["authority_password"],
        authority_name=values["authority_name"],
        divisions=divisions,
        difficulty=as_int("difficulty", 0, 24),
        max_txs_per_block=as_int("max_txs_per_block", 1, 10_000),
        nid_allowlist=_load_allowlist(values["nid_allowlist"], base_dir),
        licence_allowlist=_load_allowlist(values["licence_allowlist"], base_dir),
        kdf_log2_n=as_int("kdf_log2_n", 2, 20),
    )
    return ServiceConfig(
        node=node,
        host=values["host"],
        port=as_int("port", 1, 65535),
        store_path=_resolve(values["store_path"], base_dir),
        session_ttl_seconds=as_int("session_ttl_seconds", 1, 86_400 * 30),
        max_pending=as_int("max_pending", 1, 1_000_000),
    )


def _resolve(value: str, base_dir: Path) -> Path:
    p = Path(value)
    return p if p.is_absolute() else base_dir / p


def _load_allowlist(value: str, base_dir: Path) -> frozenset:
    if not value.strip():
        return frozenset()
    path = _resolve(value.strip(), base_dir)
    if not path.exists():
        raise ConfigError(f"allow-list file not found: {path}")
    entries = (line.strip() for line in path.read_text().splitlines())
    return frozenset(e for e in entries if e and not e.startswith("#"))
