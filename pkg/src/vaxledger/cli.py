"""Command line entry points: serve, ledger verify, export campaign, qr decode, bench run."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench, credentials, qr
from .config import ConfigError, load_config
from .errors import VaxLedgerError
from .ledger import Blockchain, load_chain_file


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="vaxledger")
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the registry service")
    p_serve.add_argument("--config", help="INI config file", default=None)

    p_ledger = sub.add_parser("ledger", help="ledger maintenance")
    ledger_sub = p_ledger.add_subparsers(dest="ledger_command", required=True)
    p_verify = ledger_sub.add_parser("verify", help="verify a chain file")
    p_verify.add_argument("chain", help="path to chain.log")

    p_export = sub.add_parser("export", help="export registry data")
    export_sub = p_export.add_subparsers(dest="export_command", required=True)
    p_campaign = export_sub.add_parser("campaign", help="dump the campaign snapshot")
    p_campaign.add_argument("--config", required=True, help="INI config file")
    p_campaign.add_argument("--out", default=None, help="write JSON here instead of stdout")

    p_qr = sub.add_parser("qr", help="QR payload tools")
    qr_sub = p_qr.add_subparsers(dest="qr_command", required=True)
    p_decode = qr_sub.add_parser("decode", help="decode a QR PNG or base64url text file")
    p_decode.add_argument("file", help="PNG image or text file")

    p_bench = sub.add_parser("bench", help="load benchmark")
    bench_sub = p_bench.add_subparsers(dest="bench_command", required=True)
    p_run = bench_sub.add_parser("run", help="run a load sweep")
    p_run.add_argument("--url", default="http://127.0.0.1:8640")
    p_run.add_argument("--users", default="25", help="load level or comma list, e.g. 25,100,500")
    p_run.add_argument("--iterations", type=int, default=5)
    p_run.add_argument("--mix", default="signup", choices=["signup"])
    p_run.add_argument("--out", required=True, help="report file (.csv or .json)")

    args = parser.parse_args(argv)
    try:
        if args.command == "serve":
            return _serve(args)
        if args.command == "ledger":
            return _ledger_verify(args)
        if args.command == "export":
            return _export_campaign(args)
        if args.command == "qr":
            return _qr_decode(args)
        if args.command == "bench":
            return _bench_run(args)
    except (VaxLedgerError, ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def _serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = load_config(args.config)
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


def _ledger_verify(args) -> int:
    chain_config, blocks = load_chain_file(Path(args.chain))
    chain = Blockchain(chain_config, blocks=blocks)
    report = chain.verify_chain()
    print(json.dumps(report.to_dict(), indent=2))
    return 0 if report.valid else 1


def _export_campaign(args) -> int:
    from .store import Store

    config = load_config(args.config)
    store, _report = Store.open(config.store_path, config.node)
    try:
        campaign = store.node.vaccination.campaign
        if campaign is None:
            print("error: no campaign has been prioritised yet", file=sys.stderr)
            return 1
        payload = campaign.snapshot()
        payload["anchor"] = store.node.get_anchor(
            f"priority_list:{campaign.campaign_id}"
        )
        text = json.dumps(payload, indent=2, sort_keys=True)
        if args.out:
            Path(args.out).write_text(text + "\n")
        else:
            print(text)
        return 0
    finally:
        store.close()


def _qr_decode(args) -> int:
    raw = Path(args.file).read_bytes()
    if raw.startswith(b"\x89PNG"):
        text = qr.decode_png(raw).decode("ascii")
    else:
        text = raw.decode("ascii").strip()
    payload = credentials.CredentialPayload.from_text(text)
    print(json.dumps({**payload.to_value(), "text": text}, indent=2, sort_keys=True))
    return 0


def _bench_run(args) -> int:
    levels = [int(part) for part in str(args.users).split(",") if part.strip()]
    report = bench.run_sweep(args.url, levels, iterations=args.iterations)
    out = Path(args.out)
    fmt = "json" if out.suffix == ".json" else "csv"
    bench.export_report(report, fmt, out)
    for level in report.levels():
        agg = report.aggregate(level)
        print(
            f"users={level:>6}  response={agg['response_ms_mean']:.1f}ms  "
            f"latency={agg['latency_ms_mean']:.1f}ms  "
            f"throughput={agg['throughput_tps']:.2f}tx/s  "
            f"failures={agg['failure_pct']:.2f}%"
        )
    print(f"report written to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
