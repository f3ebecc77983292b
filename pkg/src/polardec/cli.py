"""Command-line front end; a thin client of the HTTP service.

Without ``--server`` the service app runs in-process through the ASGI test
transport, so no network or running server is needed; with ``--server URL``
the same requests go to a remote polardec service.

Exit codes: 0 success, 1 runtime error, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

DEFAULT_SEED = 123456789


class ConfigError(Exception):
    """Bad user input: maps to exit code 2."""


def _parse_snr(text: str) -> list[float]:
    """Accept '2:0.5:4.5' sweeps or '2,3,4' lists."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"bad sweep {text!r}, expected start:step:stop")
        start, step, stop = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ConfigError(f"bad sweep {text!r}")
        count = int(round((stop - start) / step)) + 1
        return [round(start + i * step, 10) for i in range(count)]
    return [float(p) for p in text.split(",") if p]


def _parse_int_list(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p]


class Client:
    """POSTs to a remote service or to the in-process app."""

    def __init__(self, server: str | None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=None)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import app

            self._client = TestClient(app)

    def post(self, path: str, payload: dict) -> dict:
        resp = self._client.post(path, json=payload)
        if resp.status_code in (400, 422):
            raise ConfigError(json.dumps(resp.json().get("detail"), default=str))
        if resp.status_code != 200:
            raise RuntimeError(f"service error {resp.status_code}: {resp.text}")
        return resp.json()


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _code_payload(args) -> dict:
    if args.code_n is None or not args.min_info:
        raise ConfigError("need -n and --min-info to define the code")
    return {"n": args.code_n, "min_info_set": _parse_int_list(args.min_info)}


def cmd_code(args, client: Client) -> int:
    info = client.post("/code", _code_payload(args))
    _emit(json.dumps(info, indent=2) + "\n", args.output)
    return 0


def cmd_perms(args, client: Client) -> int:
    payload = {
        "code": _code_payload(args),
        "count": args.count,
        "seed": args.seed,
        "relax_perm_classes": args.relax_classes,
    }
    out = client.post("/perms", payload)
    _emit(json.dumps(out, indent=2) + "\n", args.output)
    return 0


def _decoder_payload(args) -> dict:
    dec = {
        "algorithm": args.decoder,
        "list_size": args.list_size,
        "inner_list_size": args.inner_list_size,
        "quantize": args.quantize,
        "fast_nodes": args.fast_nodes,
    }
    if args.spc_split_limit is not None:
        dec["spc_split_limit"] = args.spc_split_limit
    if args.spc_size_param is not None:
        dec["spc_size_param"] = args.spc_size_param
    return dec


def cmd_decode(args, client: Client) -> int:
    try:
        lines = Path(args.llrs).read_text(encoding="utf-8").split()
        llrs = [float(v) for v in lines]
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read LLR file {args.llrs!r}: {exc}")
    payload = {
        "code": _code_payload(args),
        "decoder": _decoder_payload(args),
        "llrs": llrs,
        "seed": args.seed,
    }
    if args.perms:
        try:
            payload["perms"] = json.loads(Path(args.perms).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read permutation file: {exc}")
    out = client.post("/decode", payload)
    _emit(json.dumps(out, indent=2) + "\n", args.output)
    return 0


def _sim_payload(args) -> dict:
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}")
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
    if args.code_n is not None or args.min_info:
        cfg["code"] = _code_payload(args)
    if "code" not in cfg:
        raise ConfigError("no code given (config file or -n/--min-info)")
    dec = dict(cfg.get("decoder", {}))
    flag_defaults = {"decoder": "scl", "list_size": 1, "inner_list_size": 1,
                     "quantize": False, "fast_nodes": True}
    for flag, key in (("decoder", "algorithm"), ("list_size", "list_size"),
                      ("inner_list_size", "inner_list_size"),
                      ("quantize", "quantize"), ("fast_nodes", "fast_nodes")):
        value = getattr(args, flag)
        if key not in dec or value != flag_defaults[flag]:
            dec[key] = value
    if args.spc_split_limit is not None:
        dec["spc_split_limit"] = args.spc_split_limit
    if args.spc_size_param is not None:
        dec["spc_size_param"] = args.spc_size_param
    cfg["decoder"] = dec
    if args.snr:
        cfg["snr_points"] = _parse_snr(args.snr)
    for flag in ("max_blocks", "max_errors", "batch_size"):
        value = getattr(args, flag)
        if value is not None:
            cfg[flag] = value
    for flag in ("all_zero", "track_ml", "relax_classes"):
        if getattr(args, flag):
            cfg["relax_perm_classes" if flag == "relax_classes" else flag] = True
    cfg["seed"] = args.seed
    cfg["workers"] = args.workers
    cfg.setdefault("snr_points", [3.0])
    return cfg


def cmd_simulate(args, client: Client) -> int:
    payload = _sim_payload(args)
    payload["emit_timing"] = args.emit_timing
    out = client.post("/simulate", payload)
    if args.format == "json":
        _emit(json.dumps(out["rows"], indent=2) + "\n", args.output)
    else:
        _emit(out["csv"], args.output)
    return 0


def cmd_analyze(args, client: Client) -> int:
    payload = _sim_payload(args)
    out = client.post("/analyze", payload)
    outdir = Path(args.output) if args.output else Path(".")
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "perm_evolution.csv").write_text(out["perm_evolution_csv"],
                                               encoding="utf-8")
    (outdir / "final_list.csv").write_text(out["final_list_csv"], encoding="utf-8")
    print(f"wrote {outdir / 'perm_evolution.csv'} and {outdir / 'final_list.csv'}")
    return 0


def _add_code_args(sub):
    sub.add_argument("-n", dest="code_n", type=int, default=None,
                     help="log2 of the block length")
    sub.add_argument("--min-info", default="",
                     help="comma-separated minimal information set, e.g. 27")


def _add_decoder_args(sub):
    sub.add_argument("--decoder", choices=["sc", "scl", "scal", "aed"],
                     default="scl")
    sub.add_argument("-L", "--list-size", type=int, default=1,
                     help="list size (scl/scal) or ensemble size (aed)")
    sub.add_argument("--inner-list-size", type=int, default=1,
                     help="constituent list size for aed")
    sub.add_argument("--quantize", action="store_true",
                     help="6-bit LLR / 8-bit PM fixed-point mode")
    sub.add_argument("--fast-nodes", action=argparse.BooleanOptionalAction,
                     default=True, help="use rate-0/rate-1/REP/SPC shortcuts")
    sub.add_argument("--spc-split-limit", type=int, default=None)
    sub.add_argument("--spc-size-param", type=int, default=None)
    sub.add_argument("--relax-classes", action="store_true",
                     help="only require distinct permutations, not distinct classes")


def _add_global_args(parser, suppress=False):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int,
                        default=d if suppress else DEFAULT_SEED,
                        help=f"master seed (default {DEFAULT_SEED})")
    parser.add_argument("--workers", type=int, default=d if suppress else 1)
    parser.add_argument("--output",
                        default=d,
                        help="output file (simulate/decode/...) or directory (analyze)")
    parser.add_argument("--format", choices=["csv", "json"],
                        default=d if suppress else "csv")
    parser.add_argument("--server", default=d,
                        help="URL of a running polardec service (default: in-process)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polardec",
        description="Polar code toolkit: construction, decoding, simulation.")
    _add_global_args(parser)
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("code", help="construct a code and report K and block profile")
    _add_global_args(s, suppress=True)
    _add_code_args(s)
    s.set_defaults(func=cmd_code)

    s = subs.add_parser("perms", help="sample an automorphism permutation set")
    _add_global_args(s, suppress=True)
    _add_code_args(s)
    s.add_argument("-L", "--count", type=int, required=True)
    s.add_argument("--relax-classes", action="store_true")
    s.set_defaults(func=cmd_perms)

    s = subs.add_parser("decode", help="decode one LLR vector from a file")
    _add_global_args(s, suppress=True)
    _add_code_args(s)
    _add_decoder_args(s)
    s.add_argument("--llrs", required=True, help="text file, one LLR per line")
    s.add_argument("--perms", default=None, help="JSON permutation-set file")
    s.set_defaults(func=cmd_decode)

    s = subs.add_parser("simulate", help="run a Monte-Carlo FER sweep")
    _add_global_args(s, suppress=True)
    _add_code_args(s)
    _add_decoder_args(s)
    s.add_argument("--config", default=None, help="JSON simulation config")
    s.add_argument("--snr", default=None, help="sweep start:step:stop or list a,b,c")
    s.add_argument("--max-blocks", type=int, default=None)
    s.add_argument("--max-errors", type=int, default=None)
    s.add_argument("--batch-size", type=int, default=None)
    s.add_argument("--all-zero", action="store_true",
                   help="transmit the all-zero codeword instead of random data")
    s.add_argument("--track-ml", action="store_true",
                   help="count ML-bound events against the transmitted codeword")
    s.add_argument("--emit-timing", action="store_true",
                   help="write measured wall time into the CSV "
                        "(breaks byte-for-byte reproducibility)")
    s.set_defaults(func=cmd_simulate)

    s = subs.add_parser("analyze",
                        help="permutation-evolution and final-list statistics (scal)")
    _add_global_args(s, suppress=True)
    _add_code_args(s)
    _add_decoder_args(s)
    s.add_argument("--config", default=None)
    s.add_argument("--snr", default=None)
    s.add_argument("--max-blocks", type=int, default=None)
    s.add_argument("--max-errors", type=int, default=None)
    s.add_argument("--batch-size", type=int, default=None)
    s.add_argument("--all-zero", action="store_true")
    s.add_argument("--track-ml", action="store_true")
    s.set_defaults(func=cmd_analyze)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        client = Client(args.server)
        return args.func(args, client)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 1
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
