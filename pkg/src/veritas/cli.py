"""Command-line front door.

Every verb delegates to a library call and prints its result; the CLI
itself performs no arithmetic.  Output is JSON on stdout by default
(full precision, stable keys); ``--format table`` renders aligned text
with ``--digits`` decimal places instead.  Errors go to stderr as a
one-object JSON document.

Exit codes: 0 success, 2 usage, 3 validation, 4 impossible evidence,
5 numeric failure.

No color is ever emitted, so NO_COLOR is honored by construction.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import evidence, scenarios, testimony
from .errors import (
    DomainError,
    ImpossibleFindingsError,
    NetworkValidationError,
    StateSpaceTooLargeError,
    UndefinedEvidenceError,
    VeritasError,
)
from .network import (
    BUILTIN_EXAMPLES,
    builtin_network,
    findings_from_json,
    infer_marginals,
    network_from_json,
    network_to_dict,
)

__all__ = ["run", "main"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_IMPOSSIBLE = 4
EXIT_NUMERIC = 5


def _number(text: str) -> int | float | Fraction:
    """Parse a CLI number: '5/6' exact, '13' exact, '0.25' as float."""
    text = text.strip()
    if "/" in text:
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise argparse.ArgumentTypeError(f"bad fraction {text!r}: {exc}")
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _uncertain(text: str) -> evidence.UncertainJL:
    """Parse 'mean:sd' or 'lo..hi' (uniform) into an uncertain term."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return evidence.UncertainJL.from_uniform(float(lo), float(hi))
    if ":" in text:
        mean, sd = text.split(":", 1)
        return evidence.UncertainJL(float(mean), float(sd))
    return evidence.UncertainJL(float(text), 0.0)


def _finding(text: str) -> tuple[str, str]:
    node, sep, state = text.partition("=")
    if not sep or not node or not state:
        raise argparse.ArgumentTypeError(
            f"finding must look like Node=State, got {text!r}"
        )
    return node, state


def _jsonable(value):
    if isinstance(value, Fraction):
        return float(value)
    if isinstance(value, float):
        if math.isinf(value) or math.isnan(value):
            return None
        return value
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _exactable(value) -> str | None:
    return str(value) if isinstance(value, Fraction) else None


def _emit(payload: dict, args) -> int:
    if getattr(args, "format", "json") == "table":
        print(_render_table(payload, args.digits))
    else:
        print(json.dumps(_jsonable(payload), indent=2))
    return EXIT_OK


def _fmt(value, digits: int) -> str:
    if value is None:
        return "-"
    if isinstance(value, Fraction):
        value = float(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.{digits}g}"
    return str(value)


def _render_table(payload: dict, digits: int) -> str:
    """Render a payload as aligned text: a grid when 'rows' is present,
    key/value lines otherwise."""
    if "rows" in payload and isinstance(payload["rows"], list) and payload["rows"]:
        rows = payload["rows"]
        headers = list(rows[0].keys())
        cells = [[_fmt(r.get(h), digits) for h in headers] for r in rows]
        widths = [
            max(len(h), *(len(c[i]) for c in cells)) for i, h in enumerate(headers)
        ]
        lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
        for c in cells:
            lines.append("  ".join(v.rjust(w) for v, w in zip(c, widths)))
        return "\n".join(lines)
    lines = []
    for key, value in payload.items():
        if isinstance(value, dict):
            lines.append(f"{key}:")
            for k2, v2 in value.items():
                lines.append(f"  {k2}: {_fmt(v2, digits)}")
        elif isinstance(value, list):
            lines.append(f"{key}: {', '.join(_fmt(v, digits) for v in value)}")
        else:
            lines.append(f"{key}: {_fmt(value, digits)}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Verb handlers


def _cmd_update(args) -> int:
    provided = [
        v for v in (args.prior_odds, args.prior_prob, args.prior_jl) if v is not None
    ]
    if len(provided) != 1:
        raise DomainError(
            "give exactly one of --prior-odds, --prior-prob, --prior-jl"
        )
    if args.prior_odds is not None:
        prior = args.prior_odds
    elif args.prior_prob is not None:
        prior = evidence.odds_from_prob(args.prior_prob)
    else:
        prior = evidence.odds_from_jl(args.prior_jl)
    bf = evidence.combine_bayes_factors(args.bf)
    posterior = evidence.update_odds(prior, bf)
    prob = evidence.posterior_prob(prior, bf)
    payload = {
        "prior_odds": prior,
        "bayes_factor": bf,
        "posterior_odds": posterior,
        "posterior_probability": prob,
        "posterior_jl": evidence.jl_from_odds(posterior),
        "falsified": posterior == 0,
    }
    for key in ("posterior_odds", "posterior_probability"):
        exact = _exactable(payload[key])
        if exact:
            payload[f"{key}_exact"] = exact
    return _emit(payload, args)


def _cmd_jl_table(args) -> int:
    rows = [
        {
            "jl": r.jl,
            "odds": r.odds,
            "percent": r.percent,
            "odds_display": r.odds_display,
            "percent_display": r.percent_display,
        }
        for r in evidence.jl_reference_table()
    ]
    return _emit({"rows": rows}, args)


def _cmd_combine(args) -> int:
    chosen = [
        name
        for name, vals in (
            ("bf", args.bf),
            ("jl", args.jl),
            ("uncertain", args.uncertain),
        )
        if vals
    ]
    if len(chosen) != 1:
        raise DomainError("give terms of exactly one kind: --bf, --jl, or --uncertain")
    if args.bf:
        combined = evidence.combine_bayes_factors(args.bf)
        payload = {
            "bayes_factors": args.bf,
            "combined_bf": combined,
            "combined_jl": evidence.jl_from_odds(combined),
        }
        exact = _exactable(combined)
        if exact:
            payload["combined_bf_exact"] = exact
    elif args.jl:
        total = evidence.accumulate_jl(0.0, args.jl)
        payload = {"jl_terms": args.jl, "combined_jl": total}
    else:
        total = evidence.combine_uncertain_jl(args.uncertain)
        payload = {
            "terms": [{"mean": t.mean, "sd": t.sd} for t in args.uncertain],
            "combined_jl": total.mean,
            "combined_sd": total.sd,
            "half_width_95": total.half_width_95,
        }
    return _emit(payload, args)


def _cmd_testimony_bf(args) -> int:
    channel = testimony.TestimonyChannel(args.p_report_true, args.p_report_false)
    likelihoods = testimony.HypothesisLikelihoods(args.p_e_h, args.p_e_hbar)
    bf = testimony.effective_bayes_factor(channel, likelihoods)
    payload = {
        "lie_factor": channel.lie_factor,
        "j_lambda": channel.j_lambda,
        "ideal_bf": likelihoods.ideal_bf,
        "effective_bf": bf,
        "effective_jl": evidence.jl_from_odds(bf),
    }
    for key in ("lie_factor", "ideal_bf", "effective_bf"):
        exact = _exactable(payload[key])
        if exact:
            payload[f"{key}_exact"] = exact
    return _emit(payload, args)


def _cmd_testimony_table(args) -> int:
    table = testimony.testimony_weight_table(args.djl)
    rows = []
    for j_lambda, weight_row in zip(table.j_lambda_rows, table.weights):
        # -inf labels the perfectly faithful channel; keep it as text so
        # the row survives JSON, where bare infinities have no place
        row = {"j_lambda": "-inf" if math.isinf(j_lambda) else j_lambda}
        for col, cell in zip(table.jl_e_given_h_columns, weight_row):
            row[f"jl_e={col:g}"] = cell
        rows.append(row)
    return _emit({"delta_jl": args.djl, "rows": rows}, args)


def _load_network(args):
    if args.builtin and args.network:
        raise DomainError("give --network or --builtin, not both")
    if args.builtin:
        return builtin_network(args.builtin)
    if not args.network:
        raise DomainError("give --network FILE or --builtin NAME")
    return network_from_json(Path(args.network).read_text())


def _gather_findings(args) -> dict[str, str]:
    findings: dict[str, str] = {}
    if getattr(args, "findings", None):
        findings.update(findings_from_json(Path(args.findings).read_text()))
    for node, state in getattr(args, "finding", None) or []:
        findings[node] = state
    return findings


def _cmd_net_validate(args) -> int:
    net = _load_network(args)
    payload = {
        "valid": True,
        "nodes": len(net.nodes),
        "node_ids": list(net.node_ids),
    }
    return _emit(payload, args)


def _cmd_net_infer(args) -> int:
    net = _load_network(args)
    findings = _gather_findings(args)
    posterior = infer_marginals(net, findings)
    payload = {
        "findings": findings,
        "posteriors": posterior.as_dict(),
    }
    if args.format == "table":
        rows = []
        for node, dist in posterior.as_dict().items():
            row = {"node": node}
            for state, p in dist.items():
                row[state] = p
            rows.append(row)
        return _emit({"rows": rows}, args)
    return _emit(payload, args)


def _cmd_net_builtin(args) -> int:
    if args.list or not args.name:
        return _emit(
            {
                "pattern": "box-testimony-N (N draw/witness pairs, 1..50)",
                "examples": list(BUILTIN_EXAMPLES),
            },
            args,
        )
    net = builtin_network(args.name)
    print(json.dumps(network_to_dict(net), indent=2))
    return EXIT_OK


def _cmd_scenario(args) -> int:
    if args.name == "aids":
        return _emit(scenarios.aids_report().as_dict(), args)
    if args.name == "columbo":
        return _emit(scenarios.columbo_report(bayes_factor=args.bf).as_dict(), args)
    report = scenarios.box_report(
        n_whites=args.whites, prior_odds=args.prior_odds
    )
    return _emit(report.as_dict(), args)


def _cmd_simulate_walks(args) -> int:
    result = scenarios.simulate_walks(
        truth=args.truth, n_draws=args.draws, n_traj=args.traj, seed=args.seed
    )
    if args.format == "csv":
        sys.stdout.write(scenarios.walks_to_csv(result))
        return EXIT_OK
    finals = result.final_jls
    payload = result.as_dict()
    payload["final_jl_mean"] = sum(finals) / len(finals)
    return _emit(payload, args)


def _cmd_simulate_stats(args) -> int:
    stats = scenarios.walk_statistics()
    payload = {}
    for name, step in (("H1", stats.h1), ("H2", stats.h2)):
        scaled = step.scaled(args.draws) if args.draws > 1 else step
        payload[name] = {
            "per_draw_mean": step.mean,
            "per_draw_sd": step.sd,
            "n_draws": args.draws,
            "mean": scaled.mean,
            "sd": scaled.sd,
            "half_width_95": scaled.half_width_95,
            "relative_uncertainty": scaled.relative_uncertainty,
        }
    return _emit(payload, args)


def _cmd_propagate(args) -> int:
    stats = scenarios.propagate_z(
        n_samples=args.samples, seed=args.seed, interval_width=args.width
    )
    if args.format == "csv":
        sys.stdout.write(scenarios.histogram_to_csv(stats))
        return EXIT_OK
    return _emit(stats.as_dict(include_histogram=args.histogram), args)


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _add_format_flags(parser: argparse.ArgumentParser, extra=()) -> None:
    parser.add_argument(
        "--format", choices=("json", "table") + tuple(extra), default="json"
    )
    parser.add_argument("--digits", type=int, default=4, help="table precision")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="veritas",
        description="Evidence arithmetic, belief networks, and simulation studies.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("update", help="apply Bayes factors to a prior")
    p.add_argument("--prior-odds", type=_number)
    p.add_argument("--prior-prob", type=_number)
    p.add_argument("--prior-jl", type=float)
    p.add_argument("--bf", type=_number, action="append", required=True)
    _add_format_flags(p)
    p.set_defaults(func=_cmd_update)

    p = sub.add_parser("jl-table", help="reference table, leanings -2..2")
    _add_format_flags(p)
    p.set_defaults(func=_cmd_jl_table)

    p = sub.add_parser("combine", help="combine evidence terms of one kind")
    p.add_argument("--bf", type=_number, action="append", default=[])
    p.add_argument("--jl", type=float, action="append", default=[])
    p.add_argument("--uncertain", type=_uncertain, action="append", default=[],
                   metavar="MEAN:SD|LO..HI")
    _add_format_flags(p)
    p.set_defaults(func=_cmd_combine)

    p = sub.add_parser("testimony", help="fallible-witness arithmetic")
    tsub = p.add_subparsers(dest="subverb", required=True)
    pb = tsub.add_parser("bf", help="effective Bayes factor of a report")
    pb.add_argument("--p-report-true", type=_number, required=True,
                    help="P(report | evidence true)")
    pb.add_argument("--p-report-false", type=_number, required=True,
                    help="P(report | evidence false)")
    pb.add_argument("--p-e-h", type=_number, required=True,
                    help="P(evidence | hypothesis)")
    pb.add_argument("--p-e-hbar", type=_number, required=True,
                    help="P(evidence | alternative)")
    _add_format_flags(pb)
    pb.set_defaults(func=_cmd_testimony_bf)
    pt = tsub.add_parser("table", help="report weight vs witness reliability")
    pt.add_argument("--djl", type=float, required=True,
                    help="weight the evidence would carry if seen directly")
    _add_format_flags(pt)
    pt.set_defaults(func=_cmd_testimony_table)

    p = sub.add_parser("net", help="belief-network operations")
    nsub = p.add_subparsers(dest="subverb", required=True)
    for name, fn in (("validate", _cmd_net_validate), ("infer", _cmd_net_infer)):
        pn = nsub.add_parser(name)
        pn.add_argument("--network", help="network JSON file")
        pn.add_argument("--builtin", help="builtin name, e.g. box-testimony-5")
        if name == "infer":
            pn.add_argument("--findings", help="findings JSON file")
            pn.add_argument("--finding", type=_finding, action="append",
                            metavar="NODE=STATE")
        _add_format_flags(pn)
        pn.set_defaults(func=fn)
    pn = nsub.add_parser("builtin", help="emit a builtin network as JSON")
    pn.add_argument("name", nargs="?")
    pn.add_argument("--list", action="store_true")
    _add_format_flags(pn)
    pn.set_defaults(func=_cmd_net_builtin)

    p = sub.add_parser("scenario", help="worked scenario reports")
    p.add_argument("name", choices=("aids", "box", "columbo"))
    p.add_argument("--whites", type=int, default=2, help="box: white draws")
    p.add_argument("--prior-odds", type=_number, default=1, help="box prior")
    p.add_argument("--bf", type=float, default=13.0, help="columbo: clue factor")
    _add_format_flags(p)
    p.set_defaults(func=_cmd_scenario)

    p = sub.add_parser("simulate", help="generator-discrimination study")
    ssub = p.add_subparsers(dest="subverb", required=True)
    pw = ssub.add_parser("walks", help="cumulative evidence walks")
    pw.add_argument("--truth", choices=("H1", "H2"), default="H1")
    pw.add_argument("--draws", type=int, default=50)
    pw.add_argument("--traj", type=int, default=100)
    pw.add_argument("--seed", type=int, default=0)
    _add_format_flags(pw, extra=("csv",))
    pw.set_defaults(func=_cmd_simulate_walks)
    ps = ssub.add_parser("stats", help="per-draw and n-draw walk moments")
    ps.add_argument("--draws", type=int, default=1)
    _add_format_flags(ps)
    ps.set_defaults(func=_cmd_simulate_stats)

    p = sub.add_parser("propagate", help="Monte Carlo propagation study")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--width", type=float, default=0.02,
                   help="modal interval width")
    p.add_argument("--histogram", action="store_true",
                   help="include histogram in JSON output")
    _add_format_flags(p, extra=("csv",))
    p.set_defaults(func=_cmd_propagate)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8712)
    p.set_defaults(func=_cmd_serve)

    return parser


def _error_payload(kind: str, exc: Exception) -> dict:
    payload = {"error": {"kind": kind, "message": str(exc)}}
    if isinstance(exc, NetworkValidationError):
        payload["error"]["problems"] = exc.problems
    if isinstance(exc, ImpossibleFindingsError):
        payload["error"]["findings"] = exc.findings
    return payload


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits itself on usage errors and --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ImpossibleFindingsError as exc:
        print(json.dumps(_error_payload("impossible-evidence", exc)), file=sys.stderr)
        return EXIT_IMPOSSIBLE
    except (NetworkValidationError, DomainError) as exc:
        print(json.dumps(_error_payload("validation", exc)), file=sys.stderr)
        return EXIT_VALIDATION
    except (UndefinedEvidenceError, StateSpaceTooLargeError, ArithmeticError) as exc:
        print(json.dumps(_error_payload("numeric", exc)), file=sys.stderr)
        return EXIT_NUMERIC
    except FileNotFoundError as exc:
        print(json.dumps(_error_payload("validation", exc)), file=sys.stderr)
        return EXIT_VALIDATION
    except VeritasError as exc:
        print(json.dumps(_error_payload("error", exc)), file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
