"""Spawns a real service subprocess for load and frontend tests."""

from __future__ import annotations

import socket
import subprocess
import sys
import time
from pathlib import Path

import httpx


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def write_server_config(
    root: Path,
    *,
    port: int,
    difficulty: int = 0,
    max_pending: int = 256,
    kdf_log2_n: int = 4,
    nids: int = 64,
) -> Path:
    (root / "nids.txt").write_text("".join(f"NID{i:03d}\n" for i in range(nids)))
    (root / "lic.txt").write_text(
        "".join(f"LAB{i:02d}\n" for i in range(8))
        + "".join(f"HOSP{i:02d}\n" for i in range(8))
    )
    path = root / "vaxledger.ini"
    path.write_text(
        f"""[vaxledger]
port = {port}
difficulty = {difficulty}
kdf_log2_n = {kdf_log2_n}
nid_allowlist = nids.txt
licence_allowlist = lic.txt
store_path = store
authority_wallet = 0xA0
authority_password = boot-secret
max_pending = {max_pending}
"""
    )
    return path


class ServerProcess:
    def __init__(self, root: Path, **config_kwargs):
        self.port = free_port()
        self.config_path = write_server_config(root, port=self.port, **config_kwargs)
        self.url = f"http://127.0.0.1:{self.port}"
        self.proc = subprocess.Popen(
            [sys.executable, "-m", "vaxledger", "serve", "--config", str(self.config_path)],
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
        )
        self._wait_ready()

    def _wait_ready(self, timeout_s: float = 30.0) -> None:
        deadline = time.monotonic() + timeout_s
        while time.monotonic() < deadline:
            if self.proc.poll() is not None:
                out = self.proc.stdout.read().decode(errors="replace")
                raise RuntimeError(f"server died at startup:\n{out}")
            try:
                if httpx.get(f"{self.url}/healthz", timeout=1.0).status_code == 200:
                    return
            except httpx.HTTPError:
                time.sleep(0.05)
        self.stop()
        raise RuntimeError("server did not come up in time")

    def stop(self) -> None:
        if self.proc.poll() is None:
            self.proc.terminate()
            try:
                self.proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait(timeout=10)

    def __enter__(self) -> "ServerProcess":
        return self

    def __exit__(self, *exc) -> None:
        self.stop()
