"""Command-line front end.

Subcommands::

    dgpvote verify-model   single-sensor output histogram, eps estimate
    dgpvote curves         analytic detection curves over an eps grid
    dgpvote reproduce FIG  figure pipelines (fig3 .. fig7)
    dgpvote oracle-check   closed forms against exact enumeration

Values come from built-in defaults, then an INI file (``--config``,
section ``[dgpvote]``), then flags; later sources win.  The seed defaults
to ``$DGPVOTE_SEED`` when set.

Exit status: 0 success, 1 usage error, 2 oracle or acceptance failure.
"""
from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import analysis, harness, oracle
from .sigmodel import ModelConfig

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2

FLAG_KEYS = ["n", "m_rows", "t", "j", "i", "l", "smnr_db", "trials", "seed",
             "workers", "engine", "eps", "out"]
INT_KEYS = {"n", "m_rows", "t", "j", "i", "l", "trials", "seed", "workers", "max_n"}
FLOAT_KEYS = {"smnr_db", "eps_step"}

# built-in defaults per command; "None" means "not applicable / derived"
VERIFY_DEFAULTS = dict(n=50, m_rows=7, t=2, smnr_db=20.0, trials=100_000, engine="sp")
VOTING_DEFAULTS = dict(n=1000, t=20, m_rows=96, smnr_db=20.0, engine="sp")
MIXED_DEFAULTS = dict(n=1000, t=20, j=15, i=5, m_rows=96, smnr_db=20.0, engine="sp")
CURVE_DEFAULTS = dict(n=1000, t=20, eps_step=0.01)
PAPER_TOTAL_TRIALS = 1_000_000
MIN_CELL_TRIALS = 100_000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model and run")
    g.add_argument("--n", type=int, help="signal length N")
    g.add_argument("--m-rows", type=int, help="measurements per sensor M")
    g.add_argument("--t", type=int, help="sparsity T")
    g.add_argument("--j", type=int, help="joint support size J")
    g.add_argument("--i", type=int, help="individual support size I")
    g.add_argument("--l", type=int, help="number of sensors L")
    g.add_argument("--smnr-db", type=float, help="signal to measurement noise ratio in dB")
    g.add_argument("--trials", type=int, help="trials (per cell for sweeps)")
    g.add_argument("--seed", type=int, help="master seed (default $DGPVOTE_SEED or 0)")
    g.add_argument("--workers", type=int, help="worker processes, 0 for all cores")
    g.add_argument("--engine", choices=["sp", "ideal"], help="subspace pursuit or ideal channel")
    g.add_argument("--eps", help="channel eps; comma list for sweeps with the ideal engine")
    g.add_argument("--out", help="output file or directory")
    g.add_argument("--config", help="INI file with a [dgpvote] section")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="dgpvote",
        description="Support-set voting experiments and analytic curves.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser(
        "verify-model",
        help="output histogram and eps estimate of one sensor",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        description=(
            "Run one sensor repeatedly and count how often each index is reported.\n"
            "Defaults: N=50, T=2, M=7, SMNR=20 dB, 100000 trials, subspace pursuit.\n"
            "Random supports give the uniformity check (figure 3); --fixed-truth\n"
            "uses the support {13, 25} (0-based) and gives the eps estimate (figure 4)."
        ),
    )
    _add_common(p)
    p.add_argument("--fixed-truth", action="store_true", help="hold the support at {13, 25}")

    p = sub.add_parser(
        "curves",
        help="tabulate analytic curves over an eps grid",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        description=(
            "Majority curves use the common model (J = T); hit and miss curves use\n"
            "the mixed model.  Defaults: N=1000, T=20 (J=15, I=5 for mixed), eps step\n"
            "0.01 plus the largest valid eps (N-T)/N as a final row.\n"
            "Events are given as branch:h:m, e.g. majority:2:1 hit:1:0 miss:2:0."
        ),
    )
    _add_common(p)
    p.add_argument("--events", nargs="+", default=["majority:1:0", "majority:2:1", "majority:3:7"],
                   help="curves to tabulate")
    p.add_argument("--eps-step", type=float, help="grid step")

    p = sub.add_parser(
        "reproduce",
        help="run a figure pipeline with its default parameters",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        description=(
            "fig3  uniformity of single-sensor output (random supports)\n"
            "fig4  per-index frequencies and eps estimate for a fixed support\n"
            "fig5  analytic consensus curves, N=1000, T=20, J=15, I=5\n"
            "fig6  majority accuracy; (h,m)=(2,1) at M=96,85,76,64,50,41,34,28,\n"
            "      SMNR=20,20,20,10,10,10,10,0 and (h,m)=(3,7) at\n"
            "      M=101,96,92,88,50,41,34,28, SMNR=20,20,20,20,10,10,10,0\n"
            "fig7  consensus accuracy, N=1000, T=20, J=15, I=5 at\n"
            "      M=96,90,85,76,64,50,41,34,28, SMNR=20,20,20,20,10,10,10,10,0\n"
            "Trials per cell default to max(100000, 1000000 / cells).\n"
            "With --engine ideal, --eps gives the channel eps sweep."
        ),
    )
    p.add_argument("fig", choices=["fig3", "fig4", "fig5", "fig6", "fig7"])
    _add_common(p)

    p = sub.add_parser(
        "oracle-check",
        help="compare closed forms with exhaustive enumeration",
        description="Exit status 2 when any difference exceeds the tolerance.",
    )
    _add_common(p)
    p.add_argument("--max-n", type=int, help="largest N in the instance set (up to 12)")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--perturb", type=float, default=0.0, help=argparse.SUPPRESS)
    return parser


def _read_config(path) -> dict:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise UsageError(f"cannot read config file {path}")
    if "dgpvote" not in cp:
        raise UsageError(f"config file {path} has no [dgpvote] section")
    out = {}
    for key, val in cp["dgpvote"].items():
        key = key.replace("-", "_")
        if key in INT_KEYS:
            out[key] = int(val)
        elif key in FLOAT_KEYS:
            out[key] = float(val)
        else:
            out[key] = val
    return out


def resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """Merge defaults, config file and flags; flags win."""
    vals = dict(defaults)
    if os.environ.get("DGPVOTE_SEED"):
        vals["seed"] = int(os.environ["DGPVOTE_SEED"])
    vals.setdefault("seed", 0)
    vals.setdefault("workers", 1)
    if getattr(args, "config", None):
        vals.update(_read_config(args.config))
    for key in FLAG_KEYS + ["eps_step", "max_n"]:
        v = getattr(args, key, None)
        if v is not None:
            vals[key] = v
    return vals


def _eps_list(raw) -> list[float]:
    if raw is None:
        return []
    if isinstance(raw, (int, float)):
        return [float(raw)]
    return [float(x) for x in str(raw).split(",") if x.strip()]


def _meta(vals: dict, **extra) -> dict:
    keep = {k: vals[k] for k in ("seed", "trials", "engine", "n", "t", "j", "i", "l", "eps")
            if vals.get(k) is not None}
    keep.update(extra)
    return keep


def _out_path(vals: dict, default_name: str) -> Path | None:
    out = vals.get("out")
    if out is None:
        return None
    path = Path(out)
    if path.is_dir() or str(out).endswith(os.sep):
        path.mkdir(parents=True, exist_ok=True)
        return path / default_name
    return path


def _write_text(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# -- verify-model ------------------------------------------------------------


def _histogram_csv(res: harness.VerificationResult, meta: dict) -> str:
    lines = [f"# {k}={v}" for k, v in meta.items()]
    lines.append(f"# eps_hat={res.eps_hat!r}")
    lines.append(f"# chi2={res.chi2!r}")
    lines.append(f"# p_value={res.p_value!r}")
    lines.append("index,count,in_truth")
    truth = set(res.truth or ())
    for i, c in enumerate(res.histogram):
        lines.append(f"{i},{int(c)},{int(i in truth)}")
    return "\n".join(lines) + "\n"


def _verify(vals: dict, fixed: bool, name: str) -> int:
    engine = vals.get("engine", "sp")
    eps = _eps_list(vals.get("eps"))
    if engine == "ideal" and len(eps) != 1:
        raise UsageError("the ideal engine needs a single --eps value")
    model = ModelConfig(n=vals["n"], m_rows=vals["m_rows"], t=vals["t"],
                        smnr_db=vals["smnr_db"])
    truth = harness.FIXED_TRUTH if fixed else None
    if fixed and model.t != len(truth):
        truth = tuple(range(model.t))
    res = harness.run_model_verification(
        model, vals["trials"], vals["seed"], engine, eps[0] if eps else None, truth,
        vals["workers"])
    meta = _meta(vals, m_rows=model.m_rows, smnr_db=model.smnr_db,
                 truth=" ".join(map(str, truth)) if truth else "random")
    _write_text(_out_path(vals, name), _histogram_csv(res, meta))
    print(f"eps_hat={res.eps_hat:.6f} chi2={res.chi2:.3f} p_value={res.p_value:.4f}",
          file=sys.stderr)
    return EXIT_OK


def cmd_verify_model(args) -> int:
    vals = resolve(args, VERIFY_DEFAULTS)
    return _verify(vals, args.fixed_truth, "fig4.csv" if args.fixed_truth else "fig3.csv")


# -- curves ------------------------------------------------------------------


def _parse_event(spec: str) -> tuple[str, int, int]:
    try:
        branch, h, m = spec.split(":")
        key = (harness.Branch(branch).value, int(h), int(m))
    except ValueError:
        raise UsageError(f"bad event {spec!r}, expected branch:h:m") from None
    return key


def curve_table(n: int, t: int, j: int, i_card: int, events, eps_step: float) -> str:
    """CSV text with one row per eps and one column per curve."""
    if not 0 < eps_step < 1:
        raise UsageError("eps step must lie in (0, 1)")
    eps_max = (n - t) / n
    grid = list(np.round(np.arange(0.0, eps_max, eps_step), 12))
    if not math.isclose(grid[-1], eps_max):
        grid.append(eps_max)
    cols = [f"{b}_h{h}_m{m}" for b, h, m in events]
    lines = [f"# n={n}", f"# t={t}", f"# j={j}", f"# i={i_card}", f"# eps_max={eps_max!r}",
             ",".join(["eps", "one_minus_eps"] + cols)]
    for eps in grid:
        row = [repr(float(eps)), repr(1.0 - float(eps))]
        for b, h, m in events:
            row.append(_curve_value(n, t, j, i_card, float(eps), b, h, m))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _curve_value(n, t, j, i_card, eps, branch, h, m) -> str:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", analysis.DegenerateEventWarning)
        try:
            if branch == "majority":
                v = analysis.majority_detect_prob(n, t, t, eps, h, m)
            else:
                p = analysis.MixedParams(n, t, i_card, j, eps)
                fn = (analysis.consensus_prob_given_hit if branch == "hit"
                      else analysis.consensus_prob_given_miss)
                v = fn(p, h, m)
        except analysis.DomainError:
            return harness.UNDEFINED
    return repr(float(v))


def _curve_params(vals: dict, events) -> tuple[int, int, int, int]:
    n, t = vals["n"], vals["t"]
    if not 0 < t < n:
        raise UsageError("need 0 < T < N")
    mixed = any(b != "majority" for b, _, _ in events)
    j = vals.get("j")
    i_card = vals.get("i")
    if mixed:
        if j is None and i_card is None:
            j = math.ceil(3 * t / 4)
        j = t - i_card if j is None else j
        i_card = t - j if i_card is None else i_card
        if j + i_card != t:
            raise UsageError("need T = I + J")
    else:
        j, i_card = t, 0
    return n, t, j, i_card


def cmd_curves(args) -> int:
    vals = resolve(args, CURVE_DEFAULTS)
    events = [_parse_event(e) for e in args.events]
    n, t, j, i_card = _curve_params(vals, events)
    text = curve_table(n, t, j, i_card, events, float(vals["eps_step"]))
    _write_text(_out_path(vals, "curves.csv"), text)
    return EXIT_OK


# -- reproduce ---------------------------------------------------------------


def _cell_trials(vals: dict, n_cells: int) -> int:
    if vals.get("trials") is not None:
        return vals["trials"]
    return max(MIN_CELL_TRIALS, math.ceil(PAPER_TOTAL_TRIALS / n_cells))


def _voting_sweep(vals: dict, cells):
    if vals.get("engine", "sp") == "ideal":
        eps = _eps_list(vals.get("eps"))
        if not eps:
            raise UsageError("the ideal engine needs --eps")
        return tuple(eps)
    if vals.get("m_rows") is not None and vals.get("_m_rows_set"):
        return ((vals["m_rows"], vals["smnr_db"]),)
    return tuple(cells)


def _reproduce_fig6(vals: dict, args) -> int:
    n, t = vals["n"], vals["t"]
    for (h, m), cells in harness.FIG6_CONFIGS.items():
        sweep = _voting_sweep(vals, cells)
        trials = _cell_trials(vals, len(sweep))
        model = ModelConfig(n=n, m_rows=vals["m_rows"], t=t, l=h + m)
        cfg = harness.ExperimentConfig(model, vals["engine"], trials, vals["seed"],
                                       ((1, 0), (h, m)), sweep, "majority", vals["workers"])
        recs = harness.run_common_experiment(cfg)
        meta = _meta(vals, trials=trials, l=h + m, figure="fig6", config=f"h{h}m{m}")
        text = harness.format_csv(recs, meta)
        _write_text(_out_path(vals, f"fig6_h{h}m{m}.csv"), text)
    return EXIT_OK


def _reproduce_fig7(vals: dict, args) -> int:
    sweep = _voting_sweep(vals, harness.FIG7_CELLS)
    trials = _cell_trials(vals, len(sweep))
    model = ModelConfig(n=vals["n"], m_rows=vals["m_rows"], t=vals["t"], l=3,
                        support_model="mixed", j=vals.get("j"), i_card=vals.get("i"))
    cfg = harness.ExperimentConfig(model, vals["engine"], trials, vals["seed"],
                                   tuple(harness.FIG7_EVENTS), sweep, "consensus",
                                   vals["workers"])
    recs = harness.run_mixed_experiment(cfg)
    meta = _meta(vals, trials=trials, l=3, j=model.j, i=model.i_card, figure="fig7")
    _write_text(_out_path(vals, "fig7.csv"), harness.format_csv(recs, meta))
    return EXIT_OK


def cmd_reproduce(args) -> int:
    fig = args.fig
    if fig in ("fig3", "fig4"):
        vals = resolve(args, VERIFY_DEFAULTS)
        return _verify(vals, fig == "fig4", f"{fig}.csv")
    if fig == "fig5":
        vals = resolve(args, dict(CURVE_DEFAULTS, j=15, i=5))
        events = [("hit", 0, 0), ("hit", 1, 0), ("hit", 2, 0), ("hit", 1, 1),
                  ("miss", 1, 0), ("miss", 2, 0), ("miss", 1, 1)]
        n, t, j, i_card = _curve_params(vals, events)
        _write_text(_out_path(vals, "fig5.csv"),
                    curve_table(n, t, j, i_card, events, float(vals["eps_step"])))
        return EXIT_OK
    if fig == "fig6":
        vals = resolve(args, VOTING_DEFAULTS)
        vals["_m_rows_set"] = args.m_rows is not None
        return _reproduce_fig6(vals, args)
    vals = resolve(args, MIXED_DEFAULTS)
    vals["_m_rows_set"] = args.m_rows is not None
    return _reproduce_fig7(vals, args)


# -- oracle-check ------------------------------------------------------------


def cmd_oracle_check(args) -> int:
    vals = resolve(args, {"max_n": 10})
    max_n = vals["max_n"]
    if not 4 <= max_n <= oracle.MAX_N:
        raise UsageError(f"--max-n must lie in [4, {oracle.MAX_N}]")
    shift = args.perturb
    rows = oracle.run_oracle_suite(max_n=max_n,
                                   perturb=(lambda v: v + shift) if shift else None)
    bad = [r for r in rows if not r[3] <= args.tol]
    lines = ["name,closed_form,oracle,abs_error,status"]
    for name, ref, got, err in rows:
        lines.append(f"{name},{ref!r},{got!r},{err!r},{'fail' if err > args.tol else 'pass'}")
    path = _out_path(vals, "oracle.csv")
    if path is not None:
        _write_text(path, "\n".join(lines) + "\n")
    worst = max(r[3] for r in rows)
    print(f"{len(rows) - len(bad)}/{len(rows)} checks within {args.tol:g} (worst {worst:.3g})")
    for name, ref, got, err in bad[:20]:
        print(f"FAIL {name}: closed form {ref!r} vs enumeration {got!r}")
    return EXIT_FAIL if bad else EXIT_OK


COMMANDS = {
    "verify-model": cmd_verify_model,
    "curves": cmd_curves,
    "reproduce": cmd_reproduce,
    "oracle-check": cmd_oracle_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, KeyError) as exc:
        msg = exc.args[0] if exc.args else exc
        print(f"dgpvote: error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
