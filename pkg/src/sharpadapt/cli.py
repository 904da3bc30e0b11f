"""Command-line front end.

Every run prints its canonical configuration as the first output line, in
the form of a command that reproduces the run.  Results are CSV rows with
a fixed header, or an SVG plot for the ``pinsker`` and ``curve`` commands.

Exit codes: 0 success, 2 usage error, 3 infeasible parameters.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .adaptive import AdaptiveTest, default_tuning
from .detectors import ermakov_test
from .estimation import (
    GolubevEstimator, default_estimation_tuning, exact_filter_risk,
    golubev_oracle_filter, pinsker_filter, pinsker_least_favorable, worst_case_risk,
)
from .exceptions import InfeasibleError, SharpAdaptError
from .harness import bivariate_lab, estimate_estimation_risk, estimate_size, estimate_type2
from .saddlepoint import (
    asymptotic_type2, continuous_saddlepoint, ermakov_A, ermakov_A0, ermakov_A1,
    pinsker_constant, shape_energy, solve_saddlepoint,
)
from .sequence import AlternativeSpec, separation_radius

HEADER = ["test", "beta", "M", "rho", "c", "n", "alpha", "reps", "seed",
          "metric", "estimate", "stderr", "target"]
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
PROG = "sharpadapt"


class UsageError(Exception):
    pass


# --- output ---------------------------------------------------------------


def format_value(value):
    """12 significant digits for floats, plain text otherwise."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def emit_csv(rows, dest=None):
    """Write rows (dicts keyed by the header) as CSV with LF line endings.

    ``dest`` may be a path, a writable stream or None; the text is returned.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for row in rows:
        unknown = set(row) - set(HEADER)
        if unknown:
            raise ValueError(f"unknown CSV columns: {sorted(unknown)}")
        writer.writerow([format_value(row.get(k)) for k in HEADER])
    text = buf.getvalue()
    _write(text, dest)
    return text


def _write(text, dest):
    if dest is None:
        return
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", newline="") as fh:
            fh.write(text)


def emit_plot(series, dest=None, xlabel="", ylabel="", title="", logx=False, reference=None):
    """Render ``series`` (a list of ``(label, xs, ys)``) as a static SVG.

    The output is byte-identical for identical input.  Returns the SVG text.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "sharpadapt", "svg.fonttype": "path",
                                "path.simplify": False}):
        fig, ax = plt.subplots(figsize=(6, 4))
        for label, xs, ys in series:
            ax.plot(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float),
                    marker="o", label=label)
        if reference is not None:
            ax.axhline(reference, color="grey", linestyle="--", linewidth=1)
        if logx:
            ax.set_xscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if series:
            ax.legend()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    text = buf.getvalue()
    _write(text, dest)
    return text


# --- argument handling ----------------------------------------------------


def _positive(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _float_list(text):
    if isinstance(text, (list, tuple)):
        return [_positive(str(v)) for v in text]
    parts = [p for p in str(text).split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("empty list")
    return [_positive(p) for p in parts]


def _count(text):
    try:
        value = int(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1 or value != float(text):
        raise argparse.ArgumentTypeError(f"must be a positive integer: {text!r}")
    return value


def _seed(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be nonnegative")
    return value


def _cn(text):
    if text in ("log", "loglog"):
        return text
    return _positive(text)


# name -> (type, default); default None means required
_COMMON_MC = {"reps": (_count, 10000), "seed": (_seed, 7)}
COMMANDS = {
    "saddlepoint": {"beta": (_positive, None), "M": (_positive, None), "c": (_positive, ""),
                    "rho": (_positive, ""), "n": (_positive, None), "alpha": (_positive, 0.05)},
    "constants": {"beta": (_positive, None)},
    "power": {"test": (str, None), "beta": (_positive, None), "M": (_positive, None),
              "c": (_positive, ""), "cn": (_cn, ""), "n": (_positive, None),
              "alpha": (_positive, 0.05), "mode": (str, "plug_in"), "tau": (_positive, 0.9),
              **_COMMON_MC},
    "impossibility": {"beta": (_positive, None), "M1": (_positive, None), "M2": (_positive, None),
                      "c": (_positive, None), "n": (_positive, None), "hypothesis": (str, "Q0"),
                      **_COMMON_MC},
    "pinsker": {"beta": (_positive, None), "M": (_positive, None),
                "n": (_float_list, "10000,100000,1000000"), "reps": (_count, 1000),
                "seed": (_seed, 7)},
    "curve": {"test": (str, None), "beta": (_positive, None), "M": (_positive, None),
              "n": (_positive, None), "alpha": (_positive, 0.05),
              "c": (_float_list, "0.5,1,2,4"), "mode": (str, "plug_in"), "tau": (_positive, 0.9),
              **_COMMON_MC},
}
CHOICES = {"test": ("ermakov", "adaptive"), "mode": ("plug_in", "split"),
           "hypothesis": ("Q0", "Q1", "Q2")}
PLOTTABLE = ("pinsker", "curve")
RUN_KEYS = ("out", "format")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser():
    parser = _Parser(prog=PROG, description="Sharp minimax detection experiments.")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True
    for name, params in COMMANDS.items():
        p = sub.add_parser(name)
        for key, (kind, _default) in params.items():
            kw = {"choices": CHOICES[key]} if key in CHOICES else {}
            p.add_argument(f"--{key}", dest=key, type=kind, default=None, **kw)
        p.add_argument("--config", default=None, help="JSON or YAML file whose keys are flag names")
        p.add_argument("--threads", type=_count, default=None,
                       help="worker threads (default: $SHARPADAPT_THREADS or all cores)")
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("csv", "svg"), default=None)
    return parser


def load_config(path):
    with open(path) as fh:
        text = fh.read()
    if path.endswith((".yaml", ".yml")):
        import yaml
        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise UsageError(f"config file {path!r} must hold a mapping")
    return data


def resolve(argv):
    """Parse ``argv`` into ``(command, params, threads)``; flags override the file."""
    ns = build_parser().parse_args(argv)
    command = ns.command
    spec = COMMANDS[command]
    file_values = {}
    if ns.config:
        try:
            file_values = {str(k): v for k, v in load_config(ns.config).items()}
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {ns.config!r}: {exc}") from None
        if file_values.pop("command", command) != command:
            raise UsageError(f"config file is for a different command than {command!r}")
    allowed = set(spec) | set(RUN_KEYS) | {"threads"}
    unknown = set(file_values) - allowed
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    params = {}
    for key in list(spec) + list(RUN_KEYS) + ["threads"]:
        value = getattr(ns, key)
        if value is None and key in file_values:
            value = file_values[key]
            if key in spec:
                kind = spec[key][0]
                try:
                    value = kind(value) if kind is not str else str(value)
                except argparse.ArgumentTypeError as exc:
                    raise UsageError(f"config key {key!r}: {exc}") from None
                if key in CHOICES and value not in CHOICES[key]:
                    raise UsageError(f"config key {key!r} must be one of {CHOICES[key]}")
        if value is None and key in spec:
            default = spec[key][1]
            if default is None:
                raise UsageError(f"{command}: --{key} is required")
            value = spec[key][0](default) if default != "" else None
        params[key] = value
    threads = params.pop("threads")
    params["format"] = params["format"] or "csv"
    _check_combination(command, params)
    return command, params, threads


def _check_combination(command, p):
    if p["format"] == "svg":
        if command not in PLOTTABLE:
            raise UsageError(f"--format svg is only available for {', '.join(PLOTTABLE)}")
        if not p["out"]:
            raise UsageError("--format svg needs --out")
    if command == "saddlepoint" and (p["c"] is None) == (p["rho"] is None):
        raise UsageError("saddlepoint: give exactly one of --c and --rho")
    if command == "power":
        if p["test"] == "ermakov" and (p["c"] is None or p["cn"] is not None):
            raise UsageError("power --test ermakov takes --c (and not --cn)")
        if p["test"] == "adaptive" and (p["cn"] is None or p["c"] is not None):
            raise UsageError("power --test adaptive takes --cn (and not --c)")
    if command in ("power", "curve") and p["test"] == "ermakov" and p["mode"] != "plug_in":
        raise UsageError("--mode applies to the adaptive test only")
    if command in ("saddlepoint", "power", "curve") and not p["alpha"] < 1:
        raise UsageError("--alpha must lie in (0, 1)")
    if command in ("power", "curve") and not p["tau"] < 1:
        raise UsageError("--tau must lie in (0, 1)")


def config_echo(command, params):
    """Canonical command line reproducing the run (thread count excluded)."""
    parts = [PROG, command]
    for key in sorted(params):
        value = params[key]
        if value is None:
            continue
        if isinstance(value, list):
            value = ",".join(format_value(v) for v in value)
        parts += [f"--{key}", format_value(value)]
    return "# " + " ".join(parts)


# --- commands -------------------------------------------------------------


def cn_value(cn, n):
    """``log n`` and ``(log log n)^{1/2}`` shorthands, or a number."""
    if cn == "log":
        return math.log(n)
    if cn == "loglog":
        if not n > math.e:
            raise InfeasibleError("--cn loglog needs n > e")
        return math.sqrt(math.log(math.log(n)))
    return float(cn)


def _row(test, **kw):
    return {"test": test, **kw}


def cmd_saddlepoint(p, threads):
    beta, M, n, alpha = p["beta"], p["M"], p["n"], p["alpha"]
    rho = p["rho"] if p["rho"] is not None else separation_radius(p["c"], n, beta)
    spec = AlternativeSpec(beta, M, rho)
    sp = solve_saddlepoint(spec, n)
    base = dict(beta=beta, M=M, rho=rho, c=p["c"], n=n, alpha=alpha)
    rows = [_row("saddlepoint", metric="lambda", estimate=sp.lam, **base),
            _row("saddlepoint", metric="mu", estimate=sp.mu, **base),
            _row("saddlepoint", metric="cutoff", estimate=sp.cutoff_J, **base)]
    A = ermakov_A(p["c"], beta, M) if p["c"] is not None else None
    target = math.sqrt(A / 2) if A is not None else None
    rows.append(_row("saddlepoint", metric="L0", estimate=sp.L0, target=target, **base))
    rows.append(_row("saddlepoint", metric="A", estimate=2 * sp.L0 ** 2, target=A, **base))
    pred = asymptotic_type2(alpha, 2 * sp.L0 ** 2)
    limit = asymptotic_type2(alpha, A) if A is not None else None
    rows.append(_row("saddlepoint", metric="predicted_type2", estimate=pred, target=limit, **base))
    return rows


def cmd_constants(p, threads):
    beta = p["beta"]
    cs = continuous_saddlepoint(beta)
    values = [("A0", ermakov_A0(beta)), ("A1", ermakov_A1(beta)),
              ("pinsker_c", pinsker_constant(beta)), ("K", shape_energy(beta)),
              ("lambda_star", cs.lambda_star), ("mu_star", cs.mu_star)]
    return [_row("constants", beta=beta, metric=k, estimate=v) for k, v in values]


def _make_test(test, beta, M, c, n, alpha, mode, tau):
    """``(test object, rho, c, A, f0)`` with ``f0`` the least-favourable signal."""
    rho = separation_radius(c, n, beta)
    spec = AlternativeSpec(beta, M, rho)
    if test == "ermakov":
        obj = ermakov_test(spec, n, alpha)
    else:
        # the adaptive test is built from (rho, beta, alpha) only
        obj = AdaptiveTest(rho, beta, alpha, default_tuning(c, n, beta, tau), mode)
    f0 = solve_saddlepoint(spec, n).f0
    return obj, rho, ermakov_A(c, beta, M), f0


def cmd_power(p, threads):
    n, beta, M, alpha = p["n"], p["beta"], p["M"], p["alpha"]
    c = p["c"] if p["test"] == "ermakov" else cn_value(p["cn"], n)
    test, rho, A, f0 = _make_test(p["test"], beta, M, c, n, alpha, p["mode"], p["tau"])
    name = p["test"] if p["test"] == "ermakov" else f"adaptive_{p['mode']}"
    base = dict(beta=beta, M=M, rho=rho, c=c, n=n, alpha=alpha, reps=p["reps"], seed=p["seed"])
    size = estimate_size(test, n, p["reps"], p["seed"], workers=threads)
    t2 = estimate_type2(test, f0, n, p["reps"], p["seed"], workers=threads)
    return [_row(name, metric="size", estimate=size.estimate, stderr=size.stderr, target=alpha, **base),
            _row(name, metric="type2", estimate=t2.estimate, stderr=t2.stderr,
                 target=asymptotic_type2(alpha, A), **base)]


def cmd_impossibility(p, threads):
    M1, M2 = p["M1"], p["M2"]
    if not M1 < M2:
        raise UsageError("impossibility: need --M1 < --M2")
    res = bivariate_lab(M1, M2, p["beta"], p["c"], p["n"], p["reps"], p["seed"],
                        p["hypothesis"], workers=threads)
    rho = separation_radius(p["c"], p["n"], p["beta"])
    base = dict(beta=p["beta"], M=M1, rho=rho, c=p["c"], n=p["n"], reps=p["reps"], seed=p["seed"])
    test = f"impossibility_{p['hypothesis']}"
    tm = res.target_mean
    return [_row(test, metric="M2", estimate=M2, **base),
            _row(test, metric="mean1", estimate=res.mean1, stderr=res.stderr1, target=tm[0], **base),
            _row(test, metric="mean2", estimate=res.mean2, stderr=res.stderr2, target=tm[1], **base),
            _row(test, metric="corr", estimate=res.corr, stderr=res.corr_stderr,
                 target=res.target_corr, **base),
            _row(test, metric="finite_corr", estimate=res.finite_corr, target=res.target_corr, **base)]


def pinsker_rows(beta, M, ns, reps, seed, threads=None):
    rows = []
    for n in ns:
        w = pinsker_filter(n, beta, M)
        scale = pinsker_constant(beta) * n ** (-2 * beta / (2 * beta + 1)) * M ** (1 / (2 * beta + 1))
        base = dict(beta=beta, M=M, n=n, reps=reps, seed=seed)
        rows.append(_row("pinsker", metric="risk_ratio", estimate=worst_case_risk(w, beta, M) / scale,
                         target=1.0, **{**base, "reps": None, "seed": None}))
        tuning = default_estimation_tuning(n, beta)
        f = pinsker_least_favorable(n, beta, M)
        oracle = exact_filter_risk(f, golubev_oracle_filter(f, n, beta, tuning))[2]
        mc = estimate_estimation_risk(GolubevEstimator(beta, tuning), f, n, reps, seed, workers=threads)
        rows.append(_row("golubev", metric="excess_risk", estimate=mc.estimate / oracle - 1.0,
                         stderr=mc.stderr / oracle, target=0.0, **base))
    return rows


def cmd_pinsker(p, threads):
    return pinsker_rows(p["beta"], p["M"], p["n"], p["reps"], p["seed"], threads)


def cmd_curve(p, threads):
    rows = []
    n, beta, M, alpha = p["n"], p["beta"], p["M"], p["alpha"]
    for c in p["c"]:
        test, rho, A, f0 = _make_test(p["test"], beta, M, c, n, alpha, p["mode"], p["tau"])
        name = p["test"] if p["test"] == "ermakov" else f"adaptive_{p['mode']}"
        t2 = estimate_type2(test, f0, n, p["reps"], p["seed"], workers=threads)
        rows.append(_row(name, beta=beta, M=M, rho=rho, c=c, n=n, alpha=alpha, reps=p["reps"],
                         seed=p["seed"], metric="type2", estimate=t2.estimate, stderr=t2.stderr,
                         target=asymptotic_type2(alpha, A)))
    return rows


HANDLERS = {"saddlepoint": cmd_saddlepoint, "constants": cmd_constants, "power": cmd_power,
            "impossibility": cmd_impossibility, "pinsker": cmd_pinsker, "curve": cmd_curve}


def plot_rows(command, rows, dest):
    if command == "pinsker":
        pts = [r for r in rows if r["metric"] == "risk_ratio"]
        series = [("worst-case risk / Pinsker bound", [r["n"] for r in pts], [r["estimate"] for r in pts])]
        return emit_plot(series, dest, xlabel="n", ylabel="ratio", logx=True, reference=1.0)
    xs = [r["c"] for r in rows]
    series = [("empirical type II", xs, [r["estimate"] for r in rows]),
              ("asymptotic type II", xs, [r["target"] for r in rows])]
    return emit_plot(series, dest, xlabel="c", ylabel="type II error")


def run(argv=None, stdout=None, stderr=None):
    """Execute one CLI invocation; returns the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        command, params, threads = resolve(sys.argv[1:] if argv is None else argv)
        stdout.write(config_echo(command, params) + "\n")
        rows = HANDLERS[command](params, threads)
        if params["format"] == "svg":
            plot_rows(command, rows, params["out"])
        elif params["out"]:
            emit_csv(rows, params["out"])
        else:
            emit_csv(rows, stdout)
    except UsageError as exc:
        stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except InfeasibleError as exc:
        stderr.write(f"{exc}\n")
        return EXIT_INFEASIBLE
    except SharpAdaptError as exc:
        stderr.write(f"{exc}\n")
        return EXIT_USAGE
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
