# MIT License
#
# Copyright (c) 2026 Jonas Waldeck
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND.

# qeccal:cli.py

"""
Command-line surface. Each subcommand reads its inputs, runs one stage and
writes its outputs plus manifest.json under --out.

Exit codes: 0 ok, 1 malformed input or arguments, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from . import diagnostics as diag
from . import export_csv
from .catalog import catalog_for, generate_c_class, schedule_signatures, translate_signatures
from .cli_paths import apply_path_overrides
from .code_model import KIND_X, KIND_Z, KINDS, CircuitSchedule, build_layout, build_schedule
from .config import (
    C_NBR_SEP_DEFAULT,
    C_TIME_SPAN_DEFAULT,
    DM_MAX_DEFAULT,
    GAMMA_DEFAULT,
    N_BOOT_DEFAULT,
    P_1Q_DEFAULT,
    P_2Q_DEFAULT,
    P_RO_DEFAULT,
    Config,
    load_run_config,
)
from .correlation_inference import (
    annotate_model,
    build_support,
    covariance_matrix,
    covariance_panel,
    cycle_average,
    estimate_support_moments,
    infer_probabilities,
)
from .dataset_io import FormatError, read_dataset, write_dataset
from .decoder import (
    CorrelatedConfig,
    CorrelatedDecoder,
    CyclePoint,
    MatchingDecoder,
    decode_dataset,
    evaluate_fidelity,
    fidelity_vs_cycles,
    gamma_scan,
)
from .logging_utils import setup_logger
from .manifest import MANIFEST_NAME, write_manifest
from .matching_graph import build_aux_graph, compute_weights, uniform_model
from .model_io import catalog_to_dict, read_model, schedule_to_dict, write_graph, write_json, write_model
from .noise_sim import (
    MODE_HETEROGENEOUS,
    MODE_UNIFORM,
    NoiseParams,
    SignatureChannel,
    SyndromeDataset,
    sample_signature_channels,
    simulate_circuit,
)

REPO_ROOT = Path(__file__).resolve().parents[1]
DATASET_NAME = "syndromes.qsyn"

logger = logging.getLogger("qeccal.cli")


class NumericalFailure(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _floats(arg: str) -> list[float]:
    vals = [float(p) for p in (arg or "").split(",") if p.strip()]
    if not vals:
        raise argparse.ArgumentTypeError("expected a comma-separated list of numbers")
    return vals


def _ints(arg: str) -> list[int]:
    vals = [int(p) for p in (arg or "").split(",") if p.strip()]
    if not vals:
        raise argparse.ArgumentTypeError("expected a comma-separated list of integers")
    return vals


def _common(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--out", default=None, help="Output directory (default: $QECCAL_OUT_DIR or data/out).")
    ap.add_argument("--logs-dir", default=None, help="Override log directory.")
    ap.add_argument("--config", default=None, help="JSON run-config file supplying flag defaults.")
    ap.add_argument("--level", default="INFO", help="Log level.")
    ap.add_argument("--seed", type=int, default=0, help="Seed for every random stream of the stage.")
    ap.add_argument("--threads", type=int, default=1, help="Worker threads/processes.")


def _code(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--d", type=int, default=3, help="Code distance (odd).")
    ap.add_argument("--cycles", type=int, default=16, help="Number of QEC cycles N.")
    ap.add_argument("--basis", choices=KINDS, default=KIND_Z, help="Prepared and measured logical basis.")


def _noise(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--noise", choices=(MODE_UNIFORM, MODE_HETEROGENEOUS), default=MODE_UNIFORM)
    ap.add_argument("--delta", type=float, default=0.0, help="Heterogeneity spread.")
    ap.add_argument("--p1q", type=float, default=P_1Q_DEFAULT)
    ap.add_argument("--p2q", type=float, default=P_2Q_DEFAULT)
    ap.add_argument("--pro", type=float, default=P_RO_DEFAULT)
    ap.add_argument("--pmc", type=float, default=0.0, help="Measurement misclassification probability.")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qeccal", description="Decoder calibration from syndrome statistics.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Circuit-level simulation of a memory experiment.")
    _common(p); _code(p); _noise(p)
    p.add_argument("--shots", type=int, default=10000)

    p = sub.add_parser("sample", help="Sample independent signature channels from a model file.")
    _common(p); _code(p)
    p.add_argument("--model", required=True)
    p.add_argument("--shots", type=int, default=10000)

    p = sub.add_parser("correlate", help="Covariance panels of a dataset.")
    _common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--dm", type=_floats, default=[0.0, 0.5, 1.0], help="Cycle offsets (multiples of 1/2).")

    p = sub.add_parser("infer", help="Infer signature probabilities from a dataset.")
    _common(p); _code(p)
    p.add_argument("--data", required=True)
    p.add_argument("--with-c", action="store_true", help="Include the highly-correlated class in the support.")
    p.add_argument("--nboot", type=int, default=N_BOOT_DEFAULT)
    p.add_argument("--c-time-span", type=int, default=C_TIME_SPAN_DEFAULT)
    p.add_argument("--c-nbr-sep", type=int, default=C_NBR_SEP_DEFAULT)

    p = sub.add_parser("graph", help="Build decoding graphs and weights from a model.")
    _common(p); _code(p)
    p.add_argument("--model", required=True)
    p.add_argument("--dm-max", type=int, default=DM_MAX_DEFAULT)

    p = sub.add_parser("decode", help="Decode a dataset with standard or correlated matching.")
    _common(p); _code(p)
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--dm-max", type=int, default=DM_MAX_DEFAULT)
    p.add_argument("--gamma", type=float, default=0.0,
                   help=f"Correlated-decoding interpolation, 0 for standard matching (tuned value {GAMMA_DEFAULT}).")
    p.add_argument("--first-kind", choices=KINDS, default=KIND_X)
    p.add_argument("--iterations", type=int, default=1)
    p.add_argument("--uniform-p", type=float, default=None, help="Decode with every edge at this probability.")
    p.add_argument("--gammas", type=_floats, default=None, help="Comma-separated gamma grid to scan.")

    p = sub.add_parser("diagnose", help="Analysis products of a dataset and its model.")
    _common(p); _code(p); _noise(p)
    p.add_argument("--data", required=True)
    p.add_argument("--model", default=None, help="Cycle-averaged model (class totals, p vs nu, X/Y symmetry).")
    p.add_argument("--expected", action="store_true", help="Add class totals of the injected noise.")
    p.add_argument("--tprime", action="store_true", help="Run T' inference without and with the C class.")
    p.add_argument("--nboot", type=int, default=N_BOOT_DEFAULT)
    p.add_argument("--fidelity-cycles", type=_ints, default=None, help="Simulate and decode these N values.")
    p.add_argument("--shots", type=int, default=10000, help="Shots per simulated run (--fidelity-cycles, --deltas).")
    p.add_argument("--uniform-p", type=float, default=None, help="Also decode --fidelity-cycles runs with uniform weights.")
    p.add_argument("--deltas", type=_floats, default=None, help="Heterogeneity spreads for a gamma scan per delta.")
    p.add_argument("--gammas", type=_floats, default=[0.0, 0.1, 0.3, 0.5, 0.8], help="Gamma grid for --deltas.")

    p = sub.add_parser("demo-bias", help="Three-process bias example with exact moments.")
    _common(p)
    p.add_argument("--p1", type=float, default=0.03)
    p.add_argument("--p12", type=float, default=0.025)
    p.add_argument("--p123", type=float, default=0.01)

    p = sub.add_parser("demo-drift", help="Apparent correlation from a two-regime drift.")
    _common(p)
    p.add_argument("--p", type=_floats, default=[0.05], help="Base probabilities.")
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--shots", type=int, default=1_000_000)
    p.add_argument("--nboot", type=int, default=0)

    p = sub.add_parser("validate", help="Random-channel validation of the inference.")
    _common(p)
    p.add_argument("--channels", type=int, default=83)
    p.add_argument("--max-weight", type=int, default=12)
    p.add_argument("--nodes", type=int, default=60)
    p.add_argument("--shots", type=int, default=100_000)
    p.add_argument("--nboot", type=int, default=N_BOOT_DEFAULT)

    return ap


def _subcommand_parser(ap: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in ap._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def parse_args(argv: list[str]) -> argparse.Namespace:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        try:
            defaults = load_run_config(Path(args.config))
        except (OSError, ValueError) as e:
            raise FormatError(str(e), 0, 0, args.config) from None
        sub = _subcommand_parser(ap, args.command)
        known = {a.dest for a in sub._actions}
        sub.set_defaults(**{k: v for k, v in defaults.items() if k in known})
        args = ap.parse_args(argv)
    return args


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _noise_params(args: argparse.Namespace) -> NoiseParams:
    return NoiseParams(
        mode=args.noise,
        p_1q=args.p1q,
        p_2q=args.p2q,
        p_ro=args.pro,
        p_mc=args.pmc,
        delta=args.delta,
        seed=args.seed,
    )


def _schedule(args: argparse.Namespace) -> CircuitSchedule:
    return build_schedule(build_layout(args.d), args.cycles, args.basis)


def _catalog(schedule: CircuitSchedule):
    catalog = catalog_for(schedule)
    cache = Config(repo_root=REPO_ROOT).cache_dir
    path = Path(cache) / f"catalog_d{schedule.layout.distance}_{schedule.prepared_basis}.json"
    if not path.exists():
        write_json(path, catalog_to_dict(catalog))
        logger.info("catalog export: %s (%d signatures)", path, len(catalog))
    return catalog


def _checked_dataset(path: str, schedule: Optional[CircuitSchedule] = None) -> SyndromeDataset:
    ds = read_dataset(Path(path))
    if schedule is None:
        return ds
    if tuple(ds.detector_list) != tuple(schedule.detector_list):
        raise FormatError(
            f"detector list ({ds.n_detectors}) does not match d={schedule.layout.distance} "
            f"N={schedule.cycles} basis={schedule.prepared_basis} ({len(schedule.detector_list)})",
            0, 0, path,
        )
    return replace(ds, provenance={**ds.provenance, "basis": schedule.prepared_basis})


# ---------------------------------------------------------------------------
# Subcommands: each returns (outputs, inputs)
# ---------------------------------------------------------------------------

def cmd_simulate(args, out: Path):
    schedule = _schedule(args)
    noise = _noise_params(args)
    data = simulate_circuit(schedule, noise, args.shots, args.seed, threads=args.threads)
    path = out / DATASET_NAME
    write_dataset(path, data)
    sched_path = out / "schedule.json"
    write_json(sched_path, schedule_to_dict(schedule))
    noise_path = out / "noise.json"
    write_json(noise_path, noise.snapshot())
    return [path, sched_path, noise_path], []


def cmd_sample(args, out: Path):
    schedule = _schedule(args)
    model = read_model(Path(args.model))
    channels = []
    for e in model:
        if not e.ok or e.p <= 0:
            continue
        sigs = translate_signatures([e.signature], schedule) if model.cycle_averaged else [e.signature]
        channels += [SignatureChannel(sig, min(e.p, 0.5 - 1e-9)) for sig in sigs]
    data = sample_signature_channels(channels, schedule.detector_list, args.shots, args.seed, threads=args.threads)
    path = out / DATASET_NAME
    write_dataset(path, data)
    return [path], [Path(args.model)]


def cmd_correlate(args, out: Path):
    data = _checked_dataset(args.data)
    cov = covariance_matrix(data)
    panels = [(dm, *covariance_panel(data, dm, cov=cov)) for dm in args.dm]
    return [export_csv.export_covariance_panels(out / export_csv.COVARIANCE_CSV, panels)], [Path(args.data)]


def cmd_infer(args, out: Path):
    schedule = _schedule(args)
    data = _checked_dataset(args.data, schedule)
    catalog = _catalog(schedule)
    sigs = schedule_signatures(schedule)
    if args.with_c:
        c_class = generate_c_class(schedule.layout, schedule, args.c_time_span, args.c_nbr_sep, catalog=catalog)
        sigs = sigs + translate_signatures(c_class, schedule)
    support = build_support(sigs)
    moments = estimate_support_moments(data, support, n_boot=args.nboot, seed=args.seed)
    model = infer_probabilities(moments, support)
    averaged = annotate_model(cycle_average(model, schedule), schedule, catalog)

    raw_path = out / "model_absolute.json"
    avg_path = out / "model.json"
    write_model(raw_path, model)
    write_model(avg_path, averaged)
    failures = model.failures()
    if failures:
        raise NumericalFailure(f"{len(failures)} signatures failed inference (see {raw_path.name})")
    return [raw_path, avg_path], [Path(args.data)]


def cmd_graph(args, out: Path):
    schedule = _schedule(args)
    model = read_model(Path(args.model))
    catalog = _catalog(schedule)
    outputs: list[Path] = []
    for kind in KINDS:
        graph = build_aux_graph(model, kind, args.dm_max, catalog, schedule)
        try:
            weights = compute_weights(graph)
        except ValueError as e:
            raise NumericalFailure(str(e)) from None
        outputs += write_graph(out, graph, weights)
    return outputs, [Path(args.model)]


def cmd_decode(args, out: Path):
    schedule = _schedule(args)
    data = _checked_dataset(args.data, schedule)
    model = read_model(Path(args.model))
    if args.uniform_p is not None:
        model = uniform_model(model, args.uniform_p)
    try:
        base = MatchingDecoder.from_model(model, schedule, args.dm_max)
    except ValueError as e:
        raise NumericalFailure(str(e)) from None

    decoder = base
    if args.gamma > 0:
        decoder = CorrelatedDecoder(base, model, CorrelatedConfig(args.gamma, args.first_kind, args.iterations))

    outputs: list[Path] = []
    decoded = decode_dataset(data, decoder, args.threads)
    outputs.append(export_csv.export_decoded(out / "decoded.csv", decoded, data.truth))

    if data.truth is not None:
        res = evaluate_fidelity(data, decoder, args.threads)
        logger.info("fidelity %.5f +- %.5f over %d shots", res.fidelity, res.stderr, res.n_shots)
        outputs.append(export_csv.export_fidelity(out / "fidelity.csv", [CyclePoint(schedule.cycles, res.fidelity, res.stderr)]))
        if args.gammas:
            points = gamma_scan(data, model, schedule, args.gammas, dm_max=args.dm_max,
                                first_kind=args.first_kind, workers=args.threads)
            outputs.append(export_csv.export_gamma_scan(out / "gamma_scan.csv", points))
    elif args.gammas:
        logger.warning("dataset has no truth labels; gamma scan skipped")
    return outputs, [Path(args.data), Path(args.model)]


def cmd_diagnose(args, out: Path):
    schedule = _schedule(args)
    data = _checked_dataset(args.data, schedule)
    catalog = _catalog(schedule)
    noise = _noise_params(args)
    outputs: list[Path] = []
    inputs = [Path(args.data)]

    outputs.append(export_csv.export_mean_syndrome(out / export_csv.MEAN_SYNDROME_CSV, diag.mean_syndrome_vs_cycle(data)))
    outputs.append(export_csv.export_time_decay(out / export_csv.TIME_DECAY_CSV, diag.time_decay_fit(data)))
    outputs.append(export_csv.export_covariance_panels(out / export_csv.COVARIANCE_CSV, [(1.0, *covariance_panel(data, 1.0))]))

    if args.model:
        model = read_model(Path(args.model))
        inputs.append(Path(args.model))
        expected = diag.expected_class_totals(schedule, noise, catalog) if args.expected else None
        outputs.append(export_csv.export_class_totals(out / export_csv.CLASS_TOTALS_CSV, diag.class_totals(model, catalog), expected))
        outputs.append(export_csv.export_p_vs_nu(out / export_csv.P_VS_NU_CSV, diag.p_vs_nu(model, catalog)))
        outputs.append(export_csv.export_xy_symmetry(out / export_csv.XY_SYMMETRY_CSV, diag.xy_symmetry(model, catalog)))

    if args.tprime:
        reports = diag.tprime_analysis(data, schedule, noise=noise, catalog=catalog, n_boot=args.nboot, seed=args.seed)
        outputs += export_csv.export_tprime(out, list(reports.values()))

    if args.fidelity_cycles:
        points = fidelity_vs_cycles(args.d, args.fidelity_cycles, noise, args.shots, args.seed,
                                    basis=args.basis, uniform_p=args.uniform_p, threads=args.threads, workers=args.threads)
        outputs.append(export_csv.export_fidelity(out / "fidelity.csv", points))

    if args.deltas:
        rows = diag.delta_gamma_sweep(args.d, args.cycles, args.deltas, args.gammas, args.shots, args.seed,
                                      basis=args.basis, base_noise=noise, threads=args.threads, workers=args.threads)
        outputs.append(export_csv.export_gamma_scan(out / "gamma_scan.csv", [], rows))
    return outputs, inputs


def cmd_demo_bias(args, out: Path):
    demo = diag.bias_demo(args.p1, args.p12, args.p123)
    rows = []
    for sig in sorted(demo.full.entries, key=lambda k: (len(k), k)):
        full = demo.full.entries[sig]
        pair = demo.pairwise.get(sig)
        rows.append([" ".join(map(str, sig)), full.p, pair.p if pair is not None else None])
    print("true p   :", ", ".join(f"{c.p:g}" for c in demo.channels))
    print("full     :", ", ".join(f"{r[1]:.6f}" for r in rows))
    print("pairwise :", ", ".join(f"{r[2]:.6f}" for r in rows if r[2] is not None))
    path = export_csv.write_rows(out / "bias.csv", ["detectors", "p_full", "p_pairwise"], rows)
    return [path], []


def cmd_demo_drift(args, out: Path):
    reports = []
    for p in args.p:
        r = diag.drift_demo(p, args.epsilon, n_shots=args.shots, seed=args.seed, n_boot=args.nboot, threads=args.threads)
        print(f"p={p:g} eps={args.epsilon:g}: closed-form p12={r.p12:.6f} simulated p12={r.sim_p12}")
        reports.append(r)
    return [export_csv.export_drift(out / export_csv.DRIFT_CSV, reports)], []


def cmd_validate(args, out: Path):
    rows = diag.validate_random_channels(
        args.channels, args.max_weight, args.shots, args.seed,
        n_nodes=args.nodes, n_boot=args.nboot, threads=args.threads,
    )
    zs = np.array([abs(r.z) for r in rows])
    finite = zs[np.isfinite(zs)]
    if finite.size:
        print(f"{finite.size} channels: {np.mean(finite <= 2):.1%} within 2 SE, max |z| {finite.max():.2f}")
    return [export_csv.export_validation(out / "validate.csv", rows)], []


COMMANDS: dict[str, Callable[[argparse.Namespace, Path], tuple[list[Path], list[Path]]]] = {
    "simulate": cmd_simulate,
    "sample": cmd_sample,
    "correlate": cmd_correlate,
    "infer": cmd_infer,
    "graph": cmd_graph,
    "decode": cmd_decode,
    "diagnose": cmd_diagnose,
    "demo-bias": cmd_demo_bias,
    "demo-drift": cmd_demo_drift,
    "validate": cmd_validate,
}


def cli_main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except FormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except SystemExit as e:
        return 0 if e.code in (0, None) else 1

    try:
        apply_path_overrides(out_dir=args.out, logs_dir=args.logs_dir)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    cfg = Config(repo_root=REPO_ROOT)
    try:
        log = setup_logger("qeccal", cfg.logs_dir, level=args.level, stage=args.command, seed=args.seed)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    snapshot: dict[str, Any] = dict(vars(args))
    log.info("qeccal %s: out=%s seed=%s", args.command, out, args.seed)
    code = 0
    error: Optional[str] = None
    outputs: list[Path] = []
    inputs: list[Path] = [Path(v) for v in (getattr(args, k, None) for k in ("data", "model", "config")) if v]
    try:
        outputs, inputs = COMMANDS[args.command](args, out)
    except NumericalFailure as e:
        log.error("numerical failure: %s", e)
        code, error = 2, str(e)
        outputs = sorted(p for p in out.glob("*") if p.is_file() and p.name != MANIFEST_NAME)
    except (ValueError, OSError) as e:
        # FormatError is a ValueError
        log.error("%s", e)
        code, error = 1, str(e)

    try:
        write_manifest(out, args.command, argv, seed=args.seed, config={**cfg.snapshot(), "args": snapshot},
                       inputs=inputs, outputs=outputs, exit_code=code, error=error)
    except OSError as e:
        log.error("manifest not written: %s", e)
        return code or 1
    if code == 0:
        log.info("qeccal %s done (%d outputs)", args.command, len(outputs))
    return code
