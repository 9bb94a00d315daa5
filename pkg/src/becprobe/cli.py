"""Command-line runner: single probe runs, parameter sweeps, acceptance checks.

Exit codes: 0 success, 1 acceptance failure (verify), 2 config parse error,
3 config validation error, 4 simulation error.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import RunConfig, parse_config
from .errors import BecProbeError, ConfigError, ValidationError
from .protocol import ProbeConfig, ProbeResult, mixture_probe, run_probe

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_SIMULATION = 4


def _execute(probe: ProbeConfig) -> ProbeResult:
    if probe.osc.kind == "mixture":
        return mixture_probe(probe)
    return run_probe(probe)


def _header_lines(run: RunConfig, result: ProbeResult) -> list[str]:
    return [
        f"# config_hash={run.config_hash}",
        f"# units={run.units}",
        f"# cutoff={result.metadata['cutoff']}",
        f"# method={result.metadata['method']}",
        f"# t_probe={result.t_probe!r}",
    ]


def _write_probe_csv(path: Path, run: RunConfig, result: ProbeResult) -> None:
    lines = _header_lines(run, result)
    lines.append("delta,p_e")
    for delta, pe in result.pe_samples:
        lines.append(f"{delta:.12g},{pe:.12g}")
    path.write_text("\n".join(lines) + "\n")


def _rel_error(measured: float, analytic: float) -> float:
    diff = abs(measured - analytic)
    return diff / abs(analytic) if analytic != 0.0 else diff


def _summary_row(axis_value: float, result: ProbeResult) -> str:
    rel = _rel_error(result.gamma_bar_measured, result.gamma_bar_analytic)
    return (f"{axis_value:.12g},{result.visibility:.12g},"
            f"{result.gamma_bar_measured:.12g},{result.gamma_bar_analytic:.12g},"
            f"{rel:.12g},{result.disentanglement_fidelity:.12g}")


def _write_summary_csv(path: Path, run: RunConfig,
                       rows: list[tuple[float, ProbeResult]]) -> None:
    cutoffs = ",".join(str(r.metadata["cutoff"]) for _, r in rows)
    lines = [f"# config_hash={run.config_hash}", f"# units={run.units}",
             f"# cutoff={cutoffs}",
             "axis_value,visibility,gamma_bar_measured,gamma_bar_analytic,"
             "rel_error,disentanglement_fidelity"]
    lines.extend(_summary_row(v, r) for v, r in rows)
    path.write_text("\n".join(lines) + "\n")


def _print_result(result: ProbeResult) -> None:
    rel = _rel_error(result.gamma_bar_measured, result.gamma_bar_analytic)
    print(f"gamma_bar measured={result.gamma_bar_measured:.6f} "
          f"analytic={result.gamma_bar_analytic:.6f} rel_error={rel:.3e} "
          f"visibility={result.visibility:.6f}")


def cmd_run(config_path: str, out_dir: str, want_sweep: bool) -> int:
    try:
        run = parse_config(config_path)
    except ConfigError as exc:
        print(f"config parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValidationError, FileNotFoundError, OSError) as exc:
        if isinstance(exc, (FileNotFoundError, OSError)):
            print(f"config parse error: {exc}", file=sys.stderr)
            return EXIT_PARSE
        print(f"config validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    if want_sweep and run.sweep_axis is None:
        print("config validation error: sweep requires a [sweep] block",
              file=sys.stderr)
        return EXIT_VALIDATION

    out = Path(out_dir)
    try:
        if run.sweep_axis is not None:
            points = run.sweep_points()
            with ProcessPoolExecutor(max_workers=min(4, len(points))) as pool:
                results = list(pool.map(_execute, [p for _, p in points]))
            rows = list(zip([v for v, _ in points], results))
            out.mkdir(parents=True, exist_ok=True)
            for i, (_, result) in enumerate(rows):
                _write_probe_csv(out / f"run_{i:03d}.csv", run, result)
            _write_summary_csv(out / "summary.csv", run, rows)
            for _, result in rows:
                _print_result(result)
        else:
            result = _execute(run.probe)
            out.mkdir(parents=True, exist_ok=True)
            _write_probe_csv(out / "probe.csv", run, result)
            _write_summary_csv(out / "summary.csv", run, [(0.0, result)])
            _print_result(result)
    except BecProbeError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    return EXIT_OK


def cmd_verify() -> int:
    from .acceptance import format_report, run_all
    criteria = run_all()
    print(format_report(criteria))
    return EXIT_OK if all(c.passed for c in criteria) else EXIT_VERIFY_FAIL


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="becprobe",
        description="single-atom probe of condensate decoherence")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", required=True)
    sub.add_parser("verify")
    args = parser.parse_args(argv)

    if args.command == "verify":
        return cmd_verify()
    return cmd_run(args.config, args.out, want_sweep=args.command == "sweep")


if __name__ == "__main__":
    sys.exit(main())
