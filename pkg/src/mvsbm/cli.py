"""Command line front end.

Exit status: 0 on success, 1 on validation errors (one ``ERROR <code>: <message>``
line on stderr), 2 on I/O failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from mvsbm.bounds import (
    estimate_lemma2_lhs,
    lemma2_rhs,
    lemma2_threshold,
    ml_union_bound,
    psi_diagnostics,
)
from mvsbm.divergence import geometric_tilt, threshold_stat
from mvsbm.errors import MvsbmError
from mvsbm.estimators import MAX_EXACT_N, ml_exact, ml_heuristic, recovery_metrics
from mvsbm.harness import ExperimentConfig, config_from_json, emit_csv, run_sweep
from mvsbm.model import check_assumptions, params_from_json
from mvsbm.sampler import AdjacencyTensor, Labeling, SeedSpec, sample_labeling, sample_tensor

log = logging.getLogger("mvsbm")


class UsageError(MvsbmError):
    code = "UsageError"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _emit(obj, out):
    text = _dumps(obj)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _read_json(path):
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from exc


def _load_model(path):
    return params_from_json(_read_json(path))


def _labeling_json(lab: Labeling) -> dict:
    return {"version": 1, "n": lab.n, "signs": lab.signs.tolist()}


def _read_labeling(path) -> Labeling:
    spec = _read_json(path)
    try:
        return Labeling(np.asarray(spec["signs"]))
    except (KeyError, TypeError) as exc:
        raise UsageError(f"{path}: expected an object with 'signs'") from exc


def cmd_divergence(args):
    params = _load_model(args.model)
    rep = threshold_stat(params)
    a = check_assumptions(params)
    _emit(
        {
            "version": 1,
            "renyi_half": rep.renyi_half,
            "threshold_stat": rep.threshold_stat,
            "rho": a.rho,
            "p_bar": a.p_bar,
            "separation": a.separation,
            "a1_holds": a.a1_holds,
            "a2_value_positive": a.a2_value_positive,
            "kl_p_tilt_p": rep.kl_p_tilt_p,
            "kl_q_tilt_q": rep.kl_q_tilt_q,
            "kl_ratio": rep.kl_ratio,
        },
        args.out,
    )


def cmd_generate(args):
    params = _load_model(args.model)
    seed = SeedSpec(args.seed, args.trial)
    truth = sample_labeling(params.n, seed)
    tensor = sample_tensor(params, truth, seed)
    tensor.save(args.out)
    if args.edges:
        tensor.write_edge_list(args.edges)
    if args.truth_out:
        _emit(_labeling_json(truth), args.truth_out)
    log.info("wrote %s (n=%d, D=%d)", args.out, params.n, params.num_views)


def cmd_estimate(args):
    params = _load_model(args.model)
    tensor = AdjacencyTensor.load(args.tensor)
    t0 = time.perf_counter()
    if args.method == "exact":
        est = ml_exact(params, tensor)
    else:
        est = ml_heuristic(params, tensor, args.restarts, SeedSpec(args.seed, 0))
    wall = time.perf_counter() - t0
    out = {
        "version": 1,
        "method": args.method,
        "labeling": est.labeling.signs.tolist(),
        "score": est.score,
        "tie": est.tie,
        "num_candidates_scanned": est.num_candidates_scanned,
        "wall_time": wall,
    }
    if args.truth:
        m = recovery_metrics(est.labeling, _read_labeling(args.truth))
        out["mis_count"] = m.mis_count
        out["exact"] = m.exact
    _emit(out, args.out)


def cmd_bound(args):
    params = _load_model(args.model)
    _emit(ml_union_bound(params).to_json(), args.out)


def cmd_psi_check(args):
    params = _load_model(args.model)
    tilt = geometric_tilt(params.within, params.across)
    if args.expected_mis is not None:
        expected = args.expected_mis
        source = "given"
    else:
        method = args.method or ("exact" if params.n <= MAX_EXACT_N else "heuristic")
        cfg = ExperimentConfig((params,), args.mis_trials, method, args.restarts, args.seed)
        expected = run_sweep(cfg, threads=args.threads).points[0].mean_mis
        source = f"monte_carlo_{method}"
    f_n = lemma2_threshold(params.n, expected)
    diag = psi_diagnostics(params, tilt, expected)
    # separate trial range from any mis-estimation trials above
    lhs, se = estimate_lemma2_lhs(params, tilt, f_n, args.trials, SeedSpec(args.seed, 2**32))
    rhs = lemma2_rhs(f_n, expected, params.n)
    _emit(
        {
            "version": 1,
            "trials": args.trials,
            "expected_mis": expected,
            "expected_mis_source": source,
            "f_n": f_n,
            "lhs": lhs,
            "lhs_stderr": se,
            "rhs": rhs,
            "holds_within_3se": lhs <= rhs + 3 * se,
            "e_psi_r_lower": diag.e_psi_r_lower,
            "e_psi_r_upper": diag.e_psi_r_upper,
            "var_upper": diag.var_upper,
            "necessary_rhs": diag.necessary_rhs,
        },
        args.out,
    )


def cmd_sweep(args):
    spec = _read_json(args.config)
    if args.seed_given:
        spec = dict(spec, master_seed=args.seed)
    cfg = config_from_json(spec)
    out = args.out or cfg.output_path
    if not out:
        raise UsageError("no output path: pass --out or set output_path in the config")
    result = run_sweep(cfg, threads=args.threads)
    emit_csv(result, out)
    if not args.no_figure:
        from mvsbm.plotting import plot_phase_diagram

        fig = args.figure or str(Path(out).with_suffix(".png"))
        plot_phase_diagram(result, fig, title=f"{cfg.method} ML, {cfg.trials_per_point} trials/point")
        log.info("wrote %s", fig)
    log.info("wrote %s (%d points)", out, len(result.points))


def _u64(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("must be an unsigned 64-bit integer")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=_u64, default=None, help="master seed (u64, default 0)")
    common.add_argument("--threads", type=_positive, default=1, help="worker thread cap")
    common.add_argument("--quiet", action="store_true", help="only log warnings")

    parser = _Parser(prog="mvsbm", description="Multi-view SBM simulation and recovery toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("divergence", parents=[common], help="divergence and assumption report")
    p.add_argument("--model", required=True, help="model spec JSON")
    p.add_argument("--out", help="output JSON (default stdout)")
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("generate", parents=[common], help="sample a labeling and tensor")
    p.add_argument("--model", required=True)
    p.add_argument("--trial", type=_u64, default=0, help="trial index within the seed")
    p.add_argument("--out", required=True, help="binary tensor file")
    p.add_argument("--edges", help="also write a 'view i j' edge list")
    p.add_argument("--truth-out", help="write the sampled labeling as JSON")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("estimate", parents=[common], help="recover communities from a tensor")
    p.add_argument("--model", required=True)
    p.add_argument("--tensor", required=True)
    p.add_argument("--method", choices=("exact", "heuristic"), default="exact")
    p.add_argument("--restarts", type=_positive, default=1)
    p.add_argument("--truth", help="labeling JSON; adds mis_count/exact to the output")
    p.add_argument("--out", help="output JSON (default stdout)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("bound", parents=[common], help="ML union bound report")
    p.add_argument("--model", required=True)
    p.add_argument("--out", help="output JSON (default stdout)")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("psi-check", parents=[common], help="Monte Carlo check of the change-of-measure inequality")
    p.add_argument("--model", required=True)
    p.add_argument("--trials", type=_positive, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--expected-mis", type=float, help="E[misclassified nodes] to plug in")
    g.add_argument(
        "--mis-trials", type=_positive, default=300, help="ML trials used to estimate E[misclassified] (default 300)"
    )
    p.add_argument("--method", choices=("exact", "heuristic"), default=None, help="default: exact when n <= 32")
    p.add_argument("--restarts", type=_positive, default=1)
    p.add_argument("--out", help="output JSON (default stdout)")
    p.set_defaults(func=cmd_psi_check)

    p = sub.add_parser("sweep", parents=[common], help="run a threshold sweep to CSV")
    p.add_argument("--config", required=True, help="sweep config JSON")
    p.add_argument("--out", help="results CSV (default: config output_path)")
    p.add_argument("--figure", help="phase-diagram PNG (default: CSV path with .png)")
    p.add_argument("--no-figure", action="store_true", help="skip the figure")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"ERROR {exc.code}: {exc.message}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = 0
    try:
        args.func(args)
    except MvsbmError as exc:
        print(f"ERROR {exc.code}: {exc.message}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"ERROR IoError: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
