"""Command line interface.

Subcommands:
  simulate     run the gate network and write the 4-qubit state to JSON
  analyze      stabilizer correlations, fidelity, witness and Bell value
               from an exact state file or from a directory of count CSVs
  persistency  projection / loss / pair-reduction study of a state file
  synth        synthesize per-setting coincidence-count CSV files

Report paths also render PNG figures next to the delimited output unless
--no-figures is given. Exit codes: 0 success, 2 usage error, 3 data or
planning error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import persistency_report
from .counts import (
    EfficiencyTable,
    ExperimentConfig,
    NoDataError,
    PlanningError,
    efficiency_correct,
    exact_state_analysis,
    read_count_csv,
    record_state_analysis,
    synthesize_records,
    write_count_csv,
    outcome_string,
)
from .photonics import NoiseParams, run_cluster_experiment
from .qstate import (
    DensityMatrix,
    PureState,
    state_from_json_dict,
)
from .stabilizer import settings_plan, witness_c4, full_group
from . import plots

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_IO = 4

OUTDIR_ENV = "CLUSTER4_OUT"


class DataError(ValueError):
    """Malformed input data (bad JSON, bad state file, bad CSV)."""


def _overlap(text: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"overlap {value} outside [0, 1]")
    return value


def _positive(text: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"{value} must be positive")
    return value


def _manifest(command: str, config_paths, output, seed=None) -> dict:
    return {
        "command": command,
        "config_paths": [str(p) for p in config_paths],
        "output": str(output) if output else None,
        "seed": seed,
        "version": __version__,
    }


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: {exc}") from None


def _load_density(path) -> DensityMatrix:
    try:
        state = state_from_json_dict(_load_json(path))
    except (ValueError, KeyError, TypeError) as exc:
        raise DataError(f"{path}: {exc}") from None
    if isinstance(state, PureState):
        return state.density()
    return state


def _write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(args) -> int:
    overlap = args.overlap
    if args.config is not None:
        cfg = _load_json(args.config)
        if "overlap" not in cfg:
            raise DataError(f"{args.config}: missing 'overlap'")
        overlap = float(cfg["overlap"])
        if not 0.0 <= overlap <= 1.0:
            raise DataError(f"{args.config}: overlap {overlap} outside [0, 1]")
    rho, prob = run_cluster_experiment(NoiseParams(overlap))
    payload = rho.to_json_dict()
    payload["manifest"] = _manifest(
        "simulate", [args.config] if args.config else [], args.out
    )
    payload["manifest"]["overlap"] = overlap
    _write_json(args.out, payload)
    print(f"success probability: {prob:.12f}")
    return EXIT_OK


def _results_payload(analysis: dict) -> list:
    rows = []
    for elem, res, used in analysis["correlations"]:
        rows.append(
            {
                "quantity": f"correlation {elem}",
                "operator": str(elem),
                "value": res.value,
                "sigma": res.sigma,
                "settings_used": used,
            }
        )
    for name, key in (("fidelity", "fidelity"), ("witness_c4", "witness"), ("bell_S", "bell")):
        res = analysis[key]
        rows.append(
            {
                "quantity": name,
                "value": res.value,
                "sigma": res.sigma,
                "settings_used": analysis["settings"],
            }
        )
    return rows


def _pretty_table(analysis: dict) -> str:
    lines = ["  #  operator   value ± sigma"]
    for i, (elem, res, _) in enumerate(analysis["correlations"], start=1):
        lines.append(f"({i:2d})  {str(elem):>6s}   {res.value:+.4f} ± {res.sigma:.4f}")
    for label, key in (("fidelity", "fidelity"), ("witness", "witness"), ("Bell S", "bell")):
        res = analysis[key]
        lines.append(f"{label:>14s}: {res.value:+.4f} ± {res.sigma:.4f}")
    return "\n".join(lines)


def cmd_analyze(args) -> int:
    config_paths = []
    if args.state:
        rho = _load_density(args.state)
        analysis = exact_state_analysis(rho)
        config_paths.append(args.state)
        mode = "exact"
    else:
        counts_dir = Path(args.counts)
        files = sorted(counts_dir.glob("*.csv"))
        if not files:
            raise DataError(f"no count CSV files in {counts_dir}")
        try:
            records = [read_count_csv(p) for p in files]
        except ValueError as exc:
            raise DataError(str(exc)) from None
        eff = (
            EfficiencyTable.from_json_dict(_load_json(args.eff))
            if args.eff
            else EfficiencyTable.unit()
        )
        corrected = [efficiency_correct(r, eff) for r in records]
        analysis = record_state_analysis(corrected)
        config_paths.extend([args.counts] + ([args.eff] if args.eff else []))
        mode = "counts"

    payload = {
        "mode": mode,
        "results": _results_payload(analysis),
        "manifest": _manifest("analyze", config_paths, args.report),
    }
    if args.pretty:
        print(_pretty_table(analysis))
    if args.report:
        _write_json(args.report, payload)
        if not args.no_figures:
            labels = [str(e) for e, _, _ in analysis["correlations"]]
            values = [r.value for _, r, _ in analysis["correlations"]]
            sigmas = [r.sigma for _, r, _ in analysis["correlations"]]
            fig_path = Path(args.report).with_suffix("").as_posix() + "_correlations.png"
            plots.save_value_bars(
                fig_path,
                labels,
                values,
                sigmas,
                "stabilizer correlations",
                "expectation value",
                ylim=(-1.1, 1.1),
                hline=0.0,
                manifest=payload["manifest"],
            )
    else:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        print()
    return EXIT_OK


def cmd_persistency(args) -> int:
    rho = _load_density(args.state)
    report = persistency_report(rho)
    payload = report.to_json_dict()
    payload["manifest"] = _manifest("persistency", [args.state], args.report)
    _write_json(args.report, payload)
    if not args.no_figures:
        labels, values = [], []
        for mode in report.modes:
            for branch in mode.branches:
                labels.append(f"{mode.mode}:{'+' if branch.outcome > 0 else '-'}")
                values.append(branch.witness)
            labels.append(f"{mode.mode}:loss")
            values.append(mode.loss_witness)
        fig_path = Path(args.report).with_suffix("").as_posix() + "_witnesses.png"
        plots.save_value_bars(
            fig_path,
            labels,
            values,
            [0.0] * len(values),
            "persistency witnesses (negative = entangled)",
            "witness value",
            hline=0.0,
            manifest=payload["manifest"],
        )
    return EXIT_OK


def cmd_synth(args) -> int:
    rho = _load_density(args.state)
    eff = (
        EfficiencyTable.from_json_dict(_load_json(args.eff)) if args.eff else None
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = ExperimentConfig(args.rate, args.hours, args.seed)

    group_plan = settings_plan(list(full_group().elements))
    witness_plan = settings_plan([p for _, p in witness_c4().terms])
    jobs = [("stabilizer", s) for s, _ in group_plan]
    jobs += [("witness", s) for s, _ in witness_plan]
    settings = [s for _, s in jobs]
    records = synthesize_records(rho, settings, config, eff=eff)

    manifest = _manifest(
        "synth",
        [args.state] + ([args.eff] if args.eff else []),
        out_dir,
        seed=args.seed,
    )
    manifest.update({"rate_per_hour": args.rate, "duration_hours": args.hours})
    for (kind, setting), record in zip(jobs, records):
        csv_path = out_dir / f"{kind}_{setting.axes}.csv"
        write_count_csv(csv_path, record, manifest=manifest)
        if not args.no_figures:
            n = setting.num_qubits
            labels = [outcome_string(i, n) for i in range(2**n)]
            plots.save_count_histogram(
                csv_path.with_suffix(".png"),
                labels,
                record.counts,
                f"setting {setting.axes} ({kind} plan)",
                manifest=manifest,
            )
    _write_json(out_dir / "manifest.json", manifest)
    print(f"wrote {len(records)} count files to {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser and entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cluster4",
        description="Simulate and analyze the four-photon cluster-state experiment.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run the gate and write the state JSON")
    p_sim.add_argument("--overlap", type=_overlap, default=1.0,
                       help="photon indistinguishability in [0, 1] (default 1)")
    p_sim.add_argument("--config", default=None,
                       help="JSON file {\"overlap\": V} overriding --overlap")
    p_sim.add_argument("--out", required=True, help="output state JSON path")
    p_sim.set_defaults(func=cmd_simulate)

    p_ana = sub.add_parser("analyze", help="correlations, fidelity, witness, Bell")
    src = p_ana.add_mutually_exclusive_group(required=True)
    src.add_argument("--state", default=None, help="state JSON (exact mode)")
    src.add_argument("--counts", default=None, help="directory of count CSV files")
    p_ana.add_argument("--eff", default=None, help="detector efficiency JSON")
    p_ana.add_argument("--report", default=None, help="report JSON path")
    p_ana.add_argument("--pretty", action="store_true",
                       help="print an aligned text table")
    p_ana.add_argument("--no-figures", action="store_true",
                       help="skip PNG rendering next to the report")
    p_ana.set_defaults(func=cmd_analyze)

    p_per = sub.add_parser("persistency", help="projection / loss / pair study")
    p_per.add_argument("--state", required=True, help="4-qubit state JSON")
    p_per.add_argument("--report", required=True, help="report JSON path")
    p_per.add_argument("--no-figures", action="store_true",
                       help="skip PNG rendering next to the report")
    p_per.set_defaults(func=cmd_persistency)

    p_syn = sub.add_parser("synth", help="synthesize coincidence-count CSV files")
    p_syn.add_argument("--state", required=True, help="state JSON to sample from")
    p_syn.add_argument("--rate", type=_positive, default=150.0,
                       help="fourfold coincidence rate per hour (default 150)")
    p_syn.add_argument("--hours", type=_positive, default=2.0,
                       help="measurement duration in hours (default 2)")
    p_syn.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p_syn.add_argument("--eff", default=None,
                       help="detector efficiency JSON applied while sampling")
    p_syn.add_argument("--out", default=os.environ.get(OUTDIR_ENV, "cluster4-out"),
                       help=f"output directory (default ${OUTDIR_ENV} or cluster4-out)")
    p_syn.add_argument("--no-figures", action="store_true",
                       help="skip PNG rendering next to the CSV files")
    p_syn.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (PlanningError, NoDataError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
