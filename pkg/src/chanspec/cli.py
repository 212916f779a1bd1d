"""Command-line interface: spectrum checks, synthesis, analysis, series tools.

Exit codes: 0 affirmative/success, 1 usage error, 2 numerical failure,
3 decision negative (not realizable / not primitive).  Machine-readable JSON
goes to stdout with fixed float formatting; one-line human summaries go to
stderr.
"""

from __future__ import annotations

import argparse
import re
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .channel import (
    Channel,
    is_irreducible,
    is_primitive,
    moments,
    stochastic_submatrix,
    verify,
)
from .classical import lift_to_channel, moment_report
from .cycles import peripheral_spectrum, synth_cycles
from .errors import (
    InfeasibleError,
    NotCompletelyPositive,
    NumericalError,
    SynthesisError,
)
from .linalg import SPECTRUM_MATCH_TOL, multiset_match
from .qubit import (
    check_and_synth_positive_qubit,
    check_qubit_cp_spectrum,
    synth_qubit_channel,
)
from .series import FIT_TOL, MAX_ORDER, generate_series, qubit_series_verdict
from .serialize import (
    channel_to_dict,
    cycle_spec_from_dict,
    dumps_canonical,
    load_channel,
    load_json,
    load_series_csv,
    load_stochastic,
    save_channel,
    save_json,
    save_series_csv,
    series_to_csv,
)
from .synthesis import (
    SynthesisResult,
    synth_full_kraus_rank,
    synth_nonzero_spectrum,
    synth_spectral_set,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_NEGATIVE = 3

_NUM_RE = re.compile(r"(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")


def parse_complex_multiset(text: str) -> tuple[complex, ...]:
    """Parse `a`, `bi`, `a+bi`, `a-bi` tokens separated by commas.

    Whitespace is ignored; failures report the 1-based column where parsing
    stopped.
    """
    values: list[complex] = []
    i, n = 0, len(text)

    def fail(pos: int):
        raise ValueError(f"malformed complex value at column {pos + 1}")

    def ws():
        nonlocal i
        while i < n and text[i].isspace():
            i += 1

    def sign() -> float:
        nonlocal i
        if i < n and text[i] in "+-":
            s = -1.0 if text[i] == "-" else 1.0
            i += 1
            return s
        return 1.0

    def number():
        nonlocal i
        m = _NUM_RE.match(text, i)
        if m is None:
            return None
        i = m.end()
        return float(m.group(0))

    while True:
        ws()
        if i >= n:
            fail(i)
        s1 = sign()
        num = number()
        if num is None:
            if i < n and text[i] in "ij":
                i += 1
                val = complex(0.0, s1)
            else:
                fail(i)
        elif i < n and text[i] in "ij":
            i += 1
            val = complex(0.0, s1 * num)
        else:
            val = complex(s1 * num, 0.0)
        save = i
        ws()
        if i < n and text[i] in "+-" and val.imag == 0.0:
            s2 = -1.0 if text[i] == "-" else 1.0
            i += 1
            ws()
            num2 = number()
            if num2 is None:
                num2 = 1.0
            if i < n and text[i] in "ij":
                i += 1
                val = complex(val.real, s2 * num2)
            else:
                fail(i)
        else:
            i = save
        values.append(val)
        ws()
        if i >= n:
            break
        if text[i] != ",":
            fail(i)
        i += 1
    return tuple(values)


def _emit(doc) -> None:
    sys.stdout.write(dumps_canonical(doc))
    sys.stdout.write("\n")


def _say(msg: str) -> None:
    sys.stderr.write(msg + "\n")


def _values_arg(args) -> tuple[complex, ...]:
    if not args.values:
        raise ValueError("--values is required for this mode")
    return parse_complex_multiset(args.values)


def _cmd_check_spectrum(args) -> int:
    tol = args.tol if args.tol is not None else SPECTRUM_MATCH_TOL
    vals = _values_arg(args)
    doc: dict = {"command": "check-spectrum", "mode": args.mode, "values": list(vals)}

    if args.mode == "qubit-cp":
        verdict = check_qubit_cp_spectrum(vals, tol)
        doc["realizable"] = verdict.realizable
        doc["reasons"] = list(verdict.reasons)
        doc["s"] = list(verdict.s) if verdict.s is not None else None
        doc["facet_margins"] = list(verdict.tetra.margins) if verdict.tetra else None
        ok = verdict.realizable
        summary = "qubit channel spectrum" if ok else f"rejected: {', '.join(verdict.reasons)}"
    elif args.mode == "qubit-pos":
        result = check_and_synth_positive_qubit(vals, tol)
        doc["realizable"] = result.feasible
        doc["reasons"] = list(result.reasons)
        ok = result.feasible
        summary = (
            "positive unital qubit map spectrum" if ok else f"rejected: {', '.join(result.reasons)}"
        )
    elif args.mode == "set":
        try:
            result = synth_spectral_set(vals)
            doc["realizable"] = True
            doc["reason"] = None
            doc["d"] = result.d
            ok = True
            summary = f"spectral set realizable on dimension {result.d}"
        except InfeasibleError as exc:
            doc["realizable"] = False
            doc["reason"] = str(exc)
            doc["d"] = None
            ok = False
            summary = f"rejected: {exc}"
    else:  # moments
        dims = tuple(int(t) for t in args.dims.split(",")) if args.dims else ()
        report = moment_report(vals, args.horizon, d_list=dims)
        doc["mu"] = list(report.mu)
        doc["horizon"] = report.horizon
        doc["mucond1_ok"] = report.mucond1_ok
        doc["mucond2_ok"] = report.mucond2_ok
        doc["first_violation"] = report.first_violation
        doc["mucond2_violation"] = (
            list(report.mucond2_violation) if report.mucond2_violation else None
        )
        doc["jll"] = {
            str(d): {
                "ok": report.jll_ok[d],
                "violation": list(report.jll_violations[d]) if d in report.jll_violations else None,
            }
            for d in dims
        }
        ok = report.mucond1_ok
        summary = (
            f"moment screening passed at horizon {report.horizon} (necessary conditions only)"
            if ok
            else f"moment screening failed (first violation: mu_{report.first_violation})"
        )

    _emit(doc)
    _say(summary)
    return EXIT_OK if ok else EXIT_NEGATIVE


def _synth_report(result: SynthesisResult, mode: str) -> dict:
    rep = verify(result.channel)
    if mode in ("nonzero", "full-rank"):
        achieved_cmp = result.achieved.nonzero().values
    elif mode == "set":
        achieved_cmp = None
    else:
        achieved_cmp = result.achieved.values
    residuals = {
        "trace_preserving_error": rep.trace_preserving_error,
        "unital_error": rep.unital_error,
        "cp_margin": rep.cp_margin,
    }
    if achieved_cmp is not None:
        residuals["spectrum_match"] = multiset_match(
            achieved_cmp, result.target, float("inf")
        ).max_cost
    return {
        "command": "synth",
        "mode": mode,
        "route": result.route,
        "d": result.d,
        "target": list(result.target),
        "achieved": list(result.achieved.sorted_values()),
        "kernel_added": result.kernel_added,
        "residuals": residuals,
    }


def _cmd_synth(args) -> int:
    if args.mode == "cycles":
        if not args.cycles:
            raise ValueError("--cycles FILE is required for --mode cycles")
        spec = cycle_spec_from_dict(load_json(args.cycles))
        channel = synth_cycles(spec)
        predicted = spec.predicted_peripheral()
        achieved = channel.spectrum()
        result = SynthesisResult(
            channel=channel,
            d=channel.d,
            route="cycles",
            target=predicted.values,
            achieved=achieved,
            kernel_added=sum(1 for v in achieved if abs(v) <= 1e-8),
        )
        report = _synth_report(result, "cycles")
        report["residuals"]["spectrum_match"] = multiset_match(
            achieved.nonzero().values, predicted.values, float("inf")
        ).max_cost
    elif args.mode == "qubit":
        vals = _values_arg(args)
        tol = args.tol if args.tol is not None else SPECTRUM_MATCH_TOL
        channel = synth_qubit_channel(vals, tol)
        result = SynthesisResult(
            channel=channel,
            d=2,
            route="qubit-direct",
            target=vals,
            achieved=channel.spectrum(),
            kernel_added=0,
        )
        report = _synth_report(result, "qubit")
    else:
        vals = _values_arg(args)
        if args.mode == "set":
            result = synth_spectral_set(vals)
        elif args.mode == "nonzero":
            result = synth_nonzero_spectrum(vals, restarts=args.restarts, seed=args.seed)
        else:
            result = synth_full_kraus_rank(vals, restarts=args.restarts, seed=args.seed)
        report = _synth_report(result, args.mode)

    if args.out:
        save_channel(result.channel, args.out, args.repr)
        report["out"] = args.out
        _emit(report)
    else:
        report["out"] = None
        _emit({"report": report, "channel": channel_to_dict(result.channel, args.repr)})
    _say(
        f"synthesized d={result.d} channel via {result.route} "
        f"(kernel_added={result.kernel_added})"
    )
    return EXIT_OK


def _cmd_analyze(args) -> int:
    channel = load_channel(args.channel)
    rep = verify(channel)
    spectrum = channel.spectrum()
    mu = moments(channel, args.moments)
    tol = args.tol if args.tol is not None else SPECTRUM_MATCH_TOL
    peripheral = peripheral_spectrum(channel, tol)
    prim = is_primitive(channel)
    irr = is_irreducible(channel)
    try:
        sub = stochastic_submatrix(channel)
        sub_doc = {"n": channel.d, "data": [float(v) for v in sub.reshape(-1)]}
    except ValueError:
        sub_doc = None
    doc = {
        "command": "analyze",
        "d": channel.d,
        "repr": channel.native_repr,
        "cptp": rep.is_cptp(),
        "verification": {
            "trace_preserving_error": rep.trace_preserving_error,
            "unital_error": rep.unital_error,
            "hermiticity_error": rep.hermiticity_error,
            "cp_margin": rep.cp_margin,
            "contains_one_error": rep.contains_one_error,
            "spectral_radius": rep.spectral_radius,
        },
        "spectrum": list(spectrum.sorted_values()),
        "moments": [complex(m) for m in mu],
        "peripheral": {
            "phases": list(peripheral.phases.values),
            "moduli": list(peripheral.moduli),
        },
        "irreducible": irr,
        "primitivity": {
            "primitive": prim.primitive,
            "spectral_certificate": prim.spectral_primitive,
            "span_certificate": prim.span_primitive,
            "span_saturation_step": prim.span_saturation_step,
            "peripheral_count": prim.peripheral_count,
            "fixed_point_min_eig": prim.fixed_point_min_eig,
        },
        "stochastic_submatrix": sub_doc,
    }
    _emit(doc)
    ok = rep.is_cptp() and prim.primitive
    _say(
        f"d={channel.d} map: cptp={rep.is_cptp()}, primitive={prim.primitive}, "
        f"irreducible={irr}"
    )
    return EXIT_OK if ok else EXIT_NEGATIVE


def _cmd_lift(args) -> int:
    s = load_stochastic(args.stochastic)
    channel = lift_to_channel(s)
    rep = verify(channel)
    report = {
        "command": "lift",
        "n": s.shape[0],
        "d": channel.d,
        "cp_margin": rep.cp_margin,
        "spectrum": list(channel.spectrum().sorted_values()),
    }
    if args.out:
        save_channel(channel, args.out)
        report["out"] = args.out
        _emit(report)
    else:
        report["out"] = None
        _emit({"report": report, "channel": channel_to_dict(channel)})
    _say(f"lifted {s.shape[0]}x{s.shape[0]} stochastic matrix to a d={channel.d} channel")
    return EXIT_OK


def _load_complex_array(path: str, name: str) -> np.ndarray:
    data = load_json(path)
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{name}: expected nested [re, im] arrays in {path}") from exc
    if arr.ndim < 2 or arr.shape[-1] != 2:
        raise ValueError(f"{name}: expected [re, im] innermost entries in {path}")
    return arr[..., 0] + 1j * arr[..., 1]


def _cmd_series_gen(args) -> int:
    if (args.channel is None) == (args.superop is None):
        raise ValueError("exactly one of --channel and --superop is required")
    observable = _load_complex_array(args.observable, "observable")
    state = _load_complex_array(args.state, "state")
    if args.channel:
        op = load_channel(args.channel)
    else:
        op = _load_complex_array(args.superop, "superop")
    series = generate_series(op, observable, state, args.steps)
    if args.out:
        save_series_csv(series, args.out)
        _say(f"wrote {len(series)} values to {args.out}")
    else:
        sys.stdout.write(series_to_csv(series))
        _say(f"generated {len(series)} values")
    return EXIT_OK


def _fit_one(path: str, tol: float, rmax: int) -> dict:
    series = load_series_csv(path)
    try:
        verdict = qubit_series_verdict(series, fit_tol=tol, max_order=rmax)
    except NumericalError as exc:
        return {"path": path, "error": "numerical", "message": str(exc)}
    model = verdict.model
    doc = {
        "path": path,
        "order": model.order,
        "coefficients": list(model.coefficients),
        "relative_residual": model.relative_residual,
        "poles": list(model.poles.sorted_values()),
        "realizable": verdict.realizable,
        "reasons": list(verdict.reasons),
        "padded_spectrum": list(verdict.padded_spectrum) if verdict.padded_spectrum else None,
        "note": verdict.note,
    }
    if verdict.padded_spectrum is not None:
        check = check_qubit_cp_spectrum(verdict.padded_spectrum)
        doc["facet_margins"] = list(check.tetra.margins) if check.tetra else None
    else:
        doc["facet_margins"] = None
    return doc


def _cmd_series_fit(args) -> int:
    tol = args.tol if args.tol is not None else FIT_TOL
    paths = args.csv
    if args.jobs > 1 and len(paths) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            docs = list(pool.map(lambda p: _fit_one(p, tol, args.rmax), paths))
    else:
        docs = [_fit_one(p, tol, args.rmax) for p in paths]

    if args.plot_data:
        if len(paths) != 1:
            raise ValueError("--plot-data expects a single input series")
        series = load_series_csv(paths[0])
        real = series.is_real()
        lines = []
        for t, v in enumerate(series.values):
            if real:
                lines.append(f"{t},{format(v.real, '.17g')}")
            else:
                lines.append(f"{t},{format(v.real, '.17g')},{format(v.imag, '.17g')}")
        with open(args.plot_data + ".points.csv", "w") as fh:
            fh.write("\n".join(lines) + "\n")
        save_json(
            {
                "poles": docs[0].get("poles"),
                "facet_margins": docs[0].get("facet_margins"),
                "realizable": docs[0].get("realizable"),
            },
            args.plot_data + ".poles.json",
        )

    _emit(docs[0] if len(docs) == 1 else docs)
    failures = [d for d in docs if "error" in d]
    negatives = [d for d in docs if not d.get("realizable", True)]
    if failures:
        _say(f"{len(failures)} series failed to fit")
        return EXIT_NUMERICAL
    if negatives:
        _say(f"{len(negatives)} of {len(docs)} series not realizable by a qubit channel")
        return EXIT_NEGATIVE
    _say(f"all {len(docs)} series realizable by a qubit channel")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chanspec",
        description="Inverse eigenvalue tools for quantum channels.",
        exit_on_error=False,
    )
    sub = parser.add_subparsers(dest="verb")

    p = sub.add_parser("check-spectrum", help="decide realizability of a spectrum", exit_on_error=False)
    p.add_argument("--values", required=True, help="comma-separated complex values, e.g. '1,-0.5,0.2+0.3i,0.2-0.3i'")
    p.add_argument("--mode", choices=["qubit-cp", "qubit-pos", "set", "moments"], default="qubit-cp")
    p.add_argument("--tol", type=float, default=None, help="decision tolerance override")
    p.add_argument("--horizon", type=int, default=64, help="moment horizon (moments mode)")
    p.add_argument("--dims", default="", help="comma-separated dimensions for power-sum inequality checks")
    p.set_defaults(func=_cmd_check_spectrum)

    p = sub.add_parser("synth", help="construct a channel with a target spectrum", exit_on_error=False)
    p.add_argument("--mode", choices=["qubit", "set", "nonzero", "full-rank", "cycles"], required=True)
    p.add_argument("--values", default=None, help="target values (all modes except cycles)")
    p.add_argument("--cycles", default=None, help="cycle description JSON file (cycles mode)")
    p.add_argument("--out", default=None, help="write the channel JSON here")
    p.add_argument("--repr", choices=["kraus", "superop", "choi"], default=None, help="channel serialization")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("analyze", help="spectrum, moments, primitivity of a channel file", exit_on_error=False)
    p.add_argument("channel", help="channel JSON file")
    p.add_argument("--moments", type=int, default=8, help="number of power sums to report")
    p.add_argument("--tol", type=float, default=None, help="peripheral modulus tolerance")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("lift", help="lift a stochastic matrix to a channel", exit_on_error=False)
    p.add_argument("stochastic", help="stochastic matrix JSON file")
    p.add_argument("--out", default=None, help="write the channel JSON here")
    p.set_defaults(func=_cmd_lift)

    p = sub.add_parser("series-gen", help="generate a_t = <A, T^t(rho)> as CSV", exit_on_error=False)
    p.add_argument("--channel", default=None, help="channel JSON file")
    p.add_argument("--superop", default=None, help="raw superoperator JSON file (nested [re, im] rows)")
    p.add_argument("--observable", required=True, help="observable JSON file")
    p.add_argument("--state", required=True, help="state JSON file")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", default=None, help="write CSV here (default stdout)")
    p.set_defaults(func=_cmd_series_gen)

    p = sub.add_parser("series-fit", help="fit a recurrence and issue the qubit verdict", exit_on_error=False)
    p.add_argument("csv", nargs="+", help="series CSV files")
    p.add_argument("--tol", type=float, default=None, help="fit tolerance")
    p.add_argument("--rmax", type=int, default=MAX_ORDER, help="maximum recurrence order")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for batch fitting")
    p.add_argument("--plot-data", default=None, help="prefix for (t, a_t) CSV and pole JSON emission")
    p.set_defaults(func=_cmd_series_fit)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except argparse.ArgumentError as exc:
        _say(f"usage error: {exc}")
        return EXIT_USAGE
    except SystemExit as exc:  # argparse --help or subparser-level exits
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except InfeasibleError as exc:
        _emit({"realizable": False, "error": "infeasible", "message": str(exc)})
        _say(f"infeasible: {exc}")
        return EXIT_NEGATIVE
    except (SynthesisError, NumericalError, NotCompletelyPositive) as exc:
        _emit({"error": type(exc).__name__, "message": str(exc)})
        _say(f"numerical failure: {exc}")
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        _say(f"usage error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
