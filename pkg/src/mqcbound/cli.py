"""``mqcbound`` command line: bound sweeps, transition analysis, figure data
and the dense-oracle verification suite.

Exit codes: 0 success, 1 usage or validation error, 2 numeric failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

from mqcbound import __version__
from mqcbound.bounds import (
    bound,
    closed_form_qN,
    closed_form_qNm1,
    convolution_profile,
    model_transition_width,
    observable_cluster_limit,
    snr_requirement,
    transition_report,
    upper_log,
)
from mqcbound.combinatorics import max_rank

EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_VERIFY = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ----------------------------------------------------------------- parsing


def _int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}")
    if not values:
        raise UsageError("empty list")
    return values


def _float_list(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}")
    if not values:
        raise UsageError("empty list")
    return values


def _range(text: str, kind=float) -> list:
    """Inclusive start:stop:step range."""
    try:
        start, stop, step = (kind(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"expected start:stop:step, got {text!r}")
    if step <= 0:
        raise UsageError(f"range step must be positive, got {text!r}")
    if stop < start:
        raise UsageError(f"range is empty: {text!r}")
    if kind is int:
        return list(range(start, stop + 1, step))
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def _ps(args) -> list[float]:
    if args.p_range:
        ps = _range(args.p_range)
    elif args.p:
        ps = _float_list(args.p)
    else:
        raise UsageError("give --p or --p-range")
    bad = [p for p in ps if not 0.0 <= p <= 1.0]
    if bad:
        raise UsageError(f"polarisations must lie in [0, 1], got {bad}")
    return ps


def _ns(text: str) -> list[int]:
    ns = _range(text, int) if ":" in text else _int_list(text)
    bad = [n for n in ns if n < 1]
    if bad:
        raise UsageError(f"spin counts must be >= 1, got {bad}")
    return ns


def _qs(args, N: int) -> list[int]:
    if args.q_range:
        qs = _range(args.q_range, int)
    elif args.q:
        qs = _int_list(args.q)
    else:
        qs = list(range(1, N + 1))
    bad = [q for q in qs if not 1 <= q <= N]
    if bad:
        raise UsageError(f"coherence orders must satisfy 1 <= q <= N={N}, got {bad[:5]}")
    return qs


# ------------------------------------------------------------------ output


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return _fmt(value)
    if isinstance(value, int) and not isinstance(value, bool) and value.bit_length() > 53:
        return str(value)  # exact, even where JSON readers use doubles
    return value


def _emit(args, columns: list[str], rows: list[dict], meta: dict | None = None) -> None:
    if args.format == "json":
        doc = {
            "meta": {"tool": "mqcbound", "version": __version__, "command": args.argv, "seed": args.seed,
                     **(meta or {})},
            "rows": [{c: _json_value(row[c]) for c in columns} for row in rows],
        }
        text = json.dumps(doc, indent=1) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _map(fn, cells, threads: int):
    """Evaluate independent cells, serially or in worker processes, keeping order."""
    if threads <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, cells))


# ---------------------------------------------------------------- commands


def _bounds_cell(cell):
    N, p, qs = cell
    rows = []
    for q in qs:
        b = bound(N, q, p)
        rows.append({"N": N, "q": q, "p": p, "rank": b.rank, "lower": b.lower, "upper": b.upper,
                     "log_lower": b.log_lower, "log_upper": b.log_upper})
    return rows


def cmd_bounds(args) -> int:
    cells = []
    for N in sorted(set(_ns(args.n))):
        qs = sorted(set(_qs(args, N)))
        for p in sorted(set(_ps(args))):
            cells.append((N, p, qs))
    rows = [row for chunk in _map(_bounds_cell, cells, args.threads) for row in chunk]
    _emit(args, ["N", "q", "p", "rank", "lower", "upper", "log_lower", "log_upper"], rows)
    return 0


def _transition_cell(cell):
    N, p = cell
    if not 0.0 < p < 1.0:
        return {"N": N, "p": p, "q_half_lower": None, "q_half_upper": None, "width": None,
                "q_c_model": p * N, "Q_c_cap": 2 * p / (1 + p * p) * N}
    t = transition_report(N, p)
    return {"N": N, "p": p, "q_half_lower": t.q_half_lower, "q_half_upper": t.q_half_upper, "width": t.width,
            "q_c_model": t.q_c_model, "Q_c_cap": t.Q_c_cap}


def cmd_transition(args) -> int:
    cells = [(N, p) for N in sorted(set(_ns(args.n))) for p in sorted(set(_ps(args)))]
    rows = _map(_transition_cell, cells, args.threads)
    _emit(args, ["N", "p", "q_half_lower", "q_half_upper", "width", "q_c_model", "Q_c_cap"], rows)
    return 0


def _figure2_row(cell):
    N, p = cell
    row = {"N": N}
    bN = closed_form_qN(N, p)
    row["b_qN"], row["log_b_qN"] = float(bN), bN.log()
    row["log_B_qN"] = upper_log(N, N, p)
    row["B_qN"] = math.exp(row["log_B_qN"]) if row["log_B_qN"] > -745 else 0.0
    if N >= 2:
        bNm1 = closed_form_qNm1(N, p)
        row["b_qNm1"], row["log_b_qNm1"] = float(bNm1), bNm1.log()
        row["log_B_qNm1"] = upper_log(N, N - 1, p)
        row["B_qNm1"] = math.exp(row["log_B_qNm1"]) if row["log_B_qNm1"] > -745 else 0.0
    else:
        row.update(b_qNm1=None, log_b_qNm1=None, B_qNm1=None, log_B_qNm1=None)
    return row


def cmd_figure2(args) -> int:
    p = args.p_value
    if not 0.0 < p < 1.0:
        raise UsageError(f"figure2 needs 0 < p < 1, got {p}")
    ns = _ns(args.n_range)
    rows = _map(_figure2_row, [(N, p) for N in ns], args.threads)
    _emit(args, ["N", "b_qN", "B_qN", "b_qNm1", "B_qNm1", "log_b_qN", "log_B_qN", "log_b_qNm1", "log_B_qNm1"],
          rows, {"p": p})
    return 0


def cmd_profile(args) -> int:
    rows = []
    for N in sorted(set(_ns(args.n))):
        for p in sorted(set(_ps(args))):
            qs = _range(args.q_range, int) if args.q_range else list(range(-N, N + 1))
            peak = convolution_profile(N, p, 0)
            width = model_transition_width(N, p)
            k_obs = observable_cluster_limit(N, p)
            for q in qs:
                value = convolution_profile(N, p, q)
                rows.append({"N": N, "p": p, "q": q, "profile": value,
                             "relative": value / peak if peak > 0 else None,
                             "model_width": width, "K_obs": k_obs})
    _emit(args, ["N", "p", "q", "profile", "relative", "model_width", "K_obs"], rows)
    return 0


def cmd_rank(args) -> int:
    rows = []
    for N in sorted(set(_ns(args.n))):
        for q in sorted(set(_qs(args, N))):
            R = max_rank(N, q)
            rows.append({"N": N, "q": q, "rank": R, "half_rank": R // 2})
    _emit(args, ["N", "q", "rank", "half_rank"], rows)
    return 0


def cmd_snr(args) -> int:
    rows = []
    for N in sorted(set(_ns(args.n))):
        for p in sorted(set(_ps(args))):
            for q in sorted(set(_qs(args, N))):
                s = snr_requirement(N, q, p)
                rows.append({"N": N, "q": q, "p": p, "observable": s.observable, "eta": s.eta,
                             "log_eta": s.log_eta})
    _emit(args, ["N", "q", "p", "observable", "eta", "log_eta"], rows)
    return 0


def cmd_verify(args) -> int:
    from mqcbound.verification import run_verification

    if not 1 <= args.max_n <= 8:
        raise UsageError(f"--max-n must lie in [1, 8], got {args.max_n}")
    report = run_verification(args.max_n, args.seed)
    if args.format == "csv":
        rows = [{"check": r.check, "params": json.dumps(r.params, sort_keys=True),
                 "status": "pass" if r.passed else "fail", "residual": r.residual, "detail": r.detail}
                for r in report.records]
        _emit(args, ["check", "params", "status", "residual", "detail"], rows)
    else:
        doc = report.to_dict()
        doc["meta"] = {"tool": "mqcbound", "version": __version__, "command": args.argv, "seed": args.seed}
        text = json.dumps(doc, indent=1) + "\n"
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    for r in report.failures():
        print(f"FAIL {r.check} {r.params} residual={r.residual:.3e} {r.detail}", file=sys.stderr)
    return 0 if report.passed else EXIT_VERIFY


# --------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), help="default csv (json for verify)")
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1, help="worker processes across (N, p) cells")

    parser = _Parser(prog="mqcbound", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def sweep(p, q=True):
        p.add_argument("--n", required=True, help="spin counts, e.g. 500 or 5000,10000 or 10:100:10")
        p.add_argument("--p", help="comma-separated polarisations")
        p.add_argument("--p-range", help="inclusive start:stop:step")
        if q:
            p.add_argument("--q", help="comma-separated coherence orders")
            p.add_argument("--q-range", help="inclusive start:stop:step")

    sweep(sub.add_parser("bounds", parents=[common], help="lower/upper bounds per (N, q, p)"))
    sweep(sub.add_parser("transition", parents=[common], help="half-decay orders and strip width"), q=False)

    fig2 = sub.add_parser("figure2", parents=[common], help="q = N and q = N-1 bounds against N")
    fig2.add_argument("--p", dest="p_value", type=float, required=True)
    fig2.add_argument("--n-range", required=True, help="inclusive start:stop:step")

    prof = sub.add_parser("profile", parents=[common], help="Gaussian * uniform model profile")
    prof.add_argument("--n", required=True)
    prof.add_argument("--p")
    prof.add_argument("--p-range")
    prof.add_argument("--q-range", help="inclusive start:stop:step (default -N:N:1)")

    rank = sub.add_parser("rank", parents=[common], help="maximal ranks R^N_q")
    rank.add_argument("--n", required=True)
    rank.add_argument("--q")
    rank.add_argument("--q-range")

    sweep(sub.add_parser("snr", parents=[common], help="SNR needed beyond the transition"))

    ver = sub.add_parser("verify", parents=[common], help="dense-oracle invariant suite")
    ver.add_argument("--max-n", type=int, default=4)
    return parser


_COMMANDS = {
    "bounds": cmd_bounds,
    "transition": cmd_transition,
    "figure2": cmd_figure2,
    "profile": cmd_profile,
    "rank": cmd_rank,
    "snr": cmd_snr,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = ["mqcbound", *argv]
    if args.format is None:
        args.format = "json" if args.command == "verify" else "csv"
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, ValueError) as exc:
        print(f"mqcbound {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"mqcbound {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
