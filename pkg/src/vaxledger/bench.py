"""Load benchmark harness: concurrent simulated users against the service.

Each simulated user submits one transaction per iteration (holder signup
by default), and the harness records response time (full round trip),
latency (time to first byte), throughput (committed tx/s) and failure
rate. Results aggregate across iterations per load level. Absolute
numbers are machine-local; the methodology and trend shapes are the
point.
"""

from __future__ import annotations

import asyncio
import csv
import io
import json
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from .errors import VaxLedgerError
from .testing import BANGLADESH_DIVISIONS


class TargetUnreachable(VaxLedgerError):
    pass


class IoFailure(VaxLedgerError):
    pass


@dataclass(frozen=True)
class LoadProfile:
    base_url: str
    n_users: int
    iterations: int = 5
    op_mix: tuple[tuple[str, float], ...] = (("signup", 1.0),)
    total_transactions: int | None = None  # default: one per simulated user
    timeout_s: float = 120.0

    def __post_init__(self) -> None:
        if self.n_users < 1:
            raise ValueError("n_users must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.total_transactions is not None and self.total_transactions < 1:
            raise ValueError("total_transactions must be >= 1")
        total = sum(w for _, w in self.op_mix)
        if abs(total - 1.0) > 1e-9:
            raise ValueError("op mix weights must sum to 1")
        if any(op != "signup" for op, _ in self.op_mix):
            raise ValueError("only the signup mix is implemented")

    @property
    def tx_count(self) -> int:
        return self.total_transactions or self.n_users


@dataclass(frozen=True)
class Sample:
    ok: bool
    latency_s: float
    response_s: float


@dataclass
class RunMetrics:
    n_users: int
    iteration: int
    submitted: int
    committed: int
    failed: int
    wall_s: float
    response_ms_mean: float
    response_ms_p50: float
    response_ms_p90: float
    response_ms_p99: float
    latency_ms_mean: float
    throughput_tps: float
    failure_pct: float

    def row(self) -> dict:
        return {
            "n_users": self.n_users,
            "response_ms_mean": round(self.response_ms_mean, 3),
            "latency_ms_mean": round(self.latency_ms_mean, 3),
            "throughput_tps": round(self.throughput_tps, 3),
            "failure_pct": round(self.failure_pct, 3),
        }


@dataclass
class MetricsReport:
    runs: list[RunMetrics] = field(default_factory=list)

    def levels(self) -> list[int]:
        seen: list[int] = []
        for run in self.runs:
            if run.n_users not in seen:
                seen.append(run.n_users)
        return seen

    def aggregate(self, n_users: int) -> dict:
        """Across-iteration means for one load level."""
        runs = [r for r in self.runs if r.n_users == n_users]
        if not runs:
            raise ValueError(f"no runs at level {n_users}")
        mean = lambda xs: sum(xs) / len(xs)
        return {
            "n_users": n_users,
            "iterations": len(runs),
            "response_ms_mean": mean([r.response_ms_mean for r in runs]),
            "latency_ms_mean": mean([r.latency_ms_mean for r in runs]),
            "throughput_tps": mean([r.throughput_tps for r in runs]),
            "failure_pct": mean([r.failure_pct for r in runs]),
        }

    def rows(self) -> list[dict]:
        return [run.row() for run in self.runs]


def _percentile(sorted_values: list[float], pct: float) -> float:
    if not sorted_values:
        return 0.0
    idx = min(len(sorted_values) - 1, int(len(sorted_values) * pct))
    return sorted_values[idx]


async def _one_signup(
    client: httpx.AsyncClient,
    base_url: str,
    start: asyncio.Event,
    gate: asyncio.Semaphore,
    index: int,
) -> Sample:
    await start.wait()
    async with gate:
        return await _submit_signup(client, base_url, index)


async def _submit_signup(
    client: httpx.AsyncClient, base_url: str, index: int
) -> Sample:
    wallet = f"0xBENCH{uuid.uuid4().hex}"
    body = {
        "role": "Holder",
        "wallet": wallet,
        "profile": {
            "name": f"Load User {index}",
            "age": 20 + index % 60,
            "division": BANGLADESH_DIVISIONS[index % len(BANGLADESH_DIVISIONS)],
            "nid": f"BENCH-{uuid.uuid4().hex[:12]}",
        },
        "password": "bench-pass",
    }
    t0 = time.perf_counter()
    try:
        async with client.stream("POST", f"{base_url}/signup", json=body) as response:
            latency = time.perf_counter() - t0  # headers in = first byte
            await response.aread()
            ok = response.status_code < 300
    except httpx.HTTPError:
        now = time.perf_counter() - t0
        return Sample(ok=False, latency_s=now, response_s=now)
    return Sample(ok=ok, latency_s=latency, response_s=time.perf_counter() - t0)


async def _run_once(profile: LoadProfile, iteration: int) -> RunMetrics:
    limits = httpx.Limits(
        max_connections=profile.n_users, max_keepalive_connections=profile.n_users
    )
    start = asyncio.Event()
    gate = asyncio.Semaphore(profile.n_users)  # concurrency = simulated users
    async with httpx.AsyncClient(limits=limits, timeout=profile.timeout_s) as client:
        tasks = [
            asyncio.create_task(_one_signup(client, profile.base_url, start, gate, i))
            for i in range(profile.tx_count)
        ]
        await asyncio.sleep(0)  # let every client reach the barrier
        wall_start = time.perf_counter()
        start.set()
        samples = await asyncio.gather(*tasks)
        wall = time.perf_counter() - wall_start

    responses = sorted(s.response_s for s in samples)
    committed = sum(1 for s in samples if s.ok)
    failed = len(samples) - committed
    mean = lambda xs: (sum(xs) / len(xs)) if xs else 0.0
    return RunMetrics(
        n_users=profile.n_users,
        iteration=iteration,
        submitted=len(samples),
        committed=committed,
        failed=failed,
        wall_s=wall,
        response_ms_mean=mean([s.response_s for s in samples]) * 1000,
        response_ms_p50=_percentile(responses, 0.50) * 1000,
        response_ms_p90=_percentile(responses, 0.90) * 1000,
        response_ms_p99=_percentile(responses, 0.99) * 1000,
        latency_ms_mean=mean([s.latency_s for s in samples]) * 1000,
        throughput_tps=committed / wall if wall > 0 else 0.0,
        failure_pct=failed / len(samples) * 100,
    )


def check_reachable(base_url: str, timeout_s: float = 5.0) -> None:
    try:
        response = httpx.get(f"{base_url}/healthz", timeout=timeout_s)
        response.raise_for_status()
    except httpx.HTTPError as exc:
        raise TargetUnreachable(f"{base_url} is not serving: {exc}") from exc


def run_load(profile: LoadProfile) -> MetricsReport:
    """All iterations of one load level."""
    check_reachable(profile.base_url)
    report = MetricsReport()
    for iteration in range(1, profile.iterations + 1):
        report.runs.append(asyncio.run(_run_once(profile, iteration)))
    return report


def run_sweep(
    base_url: str, levels: list[int], iterations: int = 5, timeout_s: float = 120.0
) -> MetricsReport:
    report = MetricsReport()
    for n_users in levels:
        profile = LoadProfile(
            base_url=base_url,
            n_users=n_users,
            iterations=iterations,
            timeout_s=timeout_s,
        )
        level_report = run_load(profile)
        report.runs.extend(level_report.runs)
    return report


def export_report(report: MetricsReport, fmt: str, path: str | Path) -> Path:
    """One row per load level per iteration; deterministic formatting."""
    path = Path(path)
    rows = report.rows()
    columns = ["n_users", "response_ms_mean", "latency_ms_mean", "throughput_tps", "failure_pct"]
    try:
        if fmt == "csv":
            buf = io.StringIO()
            writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _fmt(row[k]) for k in columns})
            path.write_text(buf.getvalue())
        elif fmt == "json":
            path.write_text(json.dumps({"rows": rows}, indent=2, sort_keys=True) + "\n")
        else:
            raise ValueError(f"unknown export format {fmt!r}")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return path


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)
