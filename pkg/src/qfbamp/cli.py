"""Command-line interface: check, bode, nyquist, simulate and gw subcommands.

Numeric tables go to ``--output`` (or stdout when omitted) as CSV with 17
significant digits; a one-line JSON summary goes to stdout.  Exit codes:
0 success, 1 check failed, 2 configuration error, 3 numeric guard,
4 Riccati failure, 5 rank deficiency.
"""

import argparse
import contextlib
import csv
import io
import json
import sys

import numpy as np

from . import components as comp
from . import feedback as fb
from . import gw
from . import stability as st
from . import statespace as ss
from .errors import (
    CareError,
    InternalConsistencyError,
    NumericGuardError,
    PoleError,
    QfbError,
    RankDeficiencyError,
)
from .rational import Port, RationalFunction, TransferMatrix

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_GUARD, EXIT_CARE, EXIT_RANK = 0, 1, 2, 3, 4, 5

NETWORKS = (
    "ndpa", "cavity-transmission", "cavity-reflection", "beam-splitter", "butterworth-controller",
    "differentiator", "integrator", "active-filter", "butterworth", "nonreciprocal",
    "integrator-loop", "phase-filter", "zero", "file",
)
RATE_OPTIONS = ("kappa", "kappa1", "kappa2", "delta", "lambda_", "gamma", "c_over_L4", "omega_min", "omega_max")


class ConfigError(QfbError, ValueError):
    """Bad command-line specification."""


def _fmt(x):
    return f"{float(x):.17g}"


def _complex(x):
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ConfigError("complex numbers in files are [re, im] pairs")
        return complex(float(x[0]), float(x[1]))
    return complex(x)


def _array(rows):
    return np.array([[_complex(v) for v in row] for row in rows], dtype=complex)


# ---------------------------------------------------------------- arguments

def _add_network_args(p):
    p.add_argument("--network", required=True, choices=NETWORKS)
    p.add_argument("--mode", choices=("finite", "ideal"), default="finite")
    p.add_argument("--kappa", type=float, default=1.0, help="symmetric cavity rate")
    p.add_argument("--kappa1", type=float, default=None)
    p.add_argument("--kappa2", type=float, default=None)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--lambda", dest="lambda_", type=float, default=2.0)
    p.add_argument("--gamma", type=float, default=None, help="defaults to gamma-ratio * lambda")
    p.add_argument("--gamma-ratio", type=float, default=2.01)
    p.add_argument("--T", dest="T", type=float, default=0.25, help="beam-splitter transmissivity")
    p.add_argument("--c-over-L4", dest="c_over_L4", type=float, default=None, help="defaults to 1e3 * kappa")
    p.add_argument("--file", default=None, help="JSON transfer matrix for --network file")
    _add_grid_args(p)


def _add_grid_args(p, points=64):
    p.add_argument("--omega-min", type=float, default=None)
    p.add_argument("--omega-max", type=float, default=None)
    p.add_argument("--points", type=int, default=points)
    p.add_argument("--scale", choices=("log", "linear"), default="log")
    p.add_argument("--unit", choices=("angular", "hertz"), default="angular")
    p.add_argument("--output", default=None)


def build_parser():
    ap = argparse.ArgumentParser(prog="qfbamp", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="realizability / unitarity report")
    _add_network_args(p)
    p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("bode", help="gain and phase table")
    _add_network_args(p)
    p.add_argument("--entries", default=None, help="comma-separated 1-based entries, e.g. 21,11")

    p = sub.add_parser("nyquist", help="Nyquist trajectory and stability verdict")
    _add_network_args(p)
    p.add_argument("--margin", type=float, default=1e-6)

    p = sub.add_parser("simulate", help="mean trajectory of a linear quantum model")
    p.add_argument("--model", choices=("self-oscillator", "integrator", "file"), default="self-oscillator")
    p.add_argument("--kappa", type=float, nargs="+", default=[0.1])
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--lambda", dest="lambda_", type=float, default=0.01)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--gamma-ratio", type=float, default=2.01)
    p.add_argument("--c-over-L4", dest="c_over_L4", type=float, default=0.1)
    p.add_argument("--x0", default=None, help="comma-separated complex initial state; default all 1/sqrt(2)")
    p.add_argument("--t-max", type=float, default=200.0)
    p.add_argument("--t-points", type=int, default=2001)
    p.add_argument("--file", default=None, help="JSON with A, C (and optional x0) for --model file")
    p.add_argument("--unit", choices=("angular", "hertz"), default="angular")
    p.add_argument("--output", default=None)

    p = sub.add_parser("gw", help="detector noise budget")
    p.add_argument("--config", default=None, help="flat key = value parameter file")
    p.add_argument("--preset", choices=("table1", "fig6"), default="table1")
    p.add_argument("--mode", choices=("baseline", "controlled", "sweep"), default="controlled")
    p.add_argument("--ignore-detuning", action="store_true")
    p.add_argument("--channel", choices=gw.SWEEP_CHANNELS, default="kappa_3loss")
    p.add_argument("--values", default="1e2,1e4,1e6")
    _add_grid_args(p, points=400)
    return ap


# ---------------------------------------------------------------- networks

def _to_angular(args):
    if getattr(args, "unit", "angular") != "hertz":
        return
    for name in RATE_OPTIONS:
        v = getattr(args, name, None)
        if isinstance(v, list):
            setattr(args, name, [2 * np.pi * x for x in v])
        elif v is not None:
            setattr(args, name, 2 * np.pi * v)


def _grid(args, lo, hi):
    lo = lo if args.omega_min is None else args.omega_min
    hi = hi if args.omega_max is None else args.omega_max
    if args.points < 2 or not lo < hi:
        raise ConfigError("grid needs omega-min < omega-max and points >= 2")
    if args.scale == "log":
        if not lo > 0:
            raise ConfigError("log grid needs omega-min > 0")
        return np.geomspace(lo, hi, args.points)
    return np.linspace(lo, hi, args.points)


def _amp(args):
    g = args.gamma if args.gamma is not None else args.gamma_ratio * args.lambda_
    return comp.NdpaParams(g, args.lambda_)


def _cavity(args):
    k1 = args.kappa if args.kappa1 is None else args.kappa1
    k2 = args.kappa if args.kappa2 is None else args.kappa2
    return comp.CavityParams(k1, k2, args.delta)


def _port(x):
    return {"a": Port.ANNIHILATION, "c": Port.CREATION}.get(x) or Port(x)


def _read_matrix_file(path):
    with open(path) as fh:
        data = json.load(fh)
    try:
        entries = [[RationalFunction([_complex(c) for c in e[0]], [_complex(c) for c in e[1]])
                    if isinstance(e, list) else RationalFunction.constant(_complex(e))
                    for e in row] for row in data["entries"]]
        n_in, n_out = len(entries[0]), len(entries)
        sig_in = tuple(_port(x) for x in data.get("sig_in", ["a"] * n_in))
        sig_out = tuple(_port(x) for x in data.get("sig_out", ["a"] * n_out))
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise ConfigError(f"malformed matrix file: {exc}") from exc
    return TransferMatrix(entries, sig_in, sig_out)


def build_network(args):
    """Return (kind, obj): kind is amplifier, passive, loop, system or statespace."""
    n = args.network
    if n == "ndpa":
        return "amplifier", comp.make_ndpa(_amp(args))
    if n == "cavity-transmission":
        return "passive", comp.make_cavity_transmission(_cavity(args))
    if n == "cavity-reflection":
        return "passive", comp.make_cavity_reflection(_cavity(args))
    if n == "beam-splitter":
        return "passive", comp.make_beam_splitter(args.T)
    if n == "butterworth-controller":
        c = _cavity(args)
        return "passive", comp.make_butterworth_controller(comp.butterworth_params(c.kappa1, c.kappa2))
    if n in ("differentiator", "integrator", "active-filter", "butterworth"):
        c = _cavity(args)
        if n == "differentiator":
            K = comp.make_cavity_transmission(c)
        elif n == "butterworth":
            K = comp.make_butterworth_controller(comp.butterworth_params(c.kappa1, c.kappa2))
        else:
            K = comp.make_cavity_reflection(c)
        if args.mode == "ideal":
            return "system", fb.ideal_closed_loop(K)
        return "loop", fb.close_loop(comp.make_ndpa(_amp(args)), K)
    if n == "nonreciprocal":
        K = comp.make_beam_splitter(args.T, port=Port.ANNIHILATION)
        if args.mode == "ideal":
            return "system", fb.nonreciprocal_ideal(K)
        G = comp.make_ndpa(_amp(args))
        return "system", fb.nonreciprocal_close(G, G, K).gfb
    if n in ("integrator-loop", "phase-filter"):
        a = _amp(args)
        c_over = 1e3 * args.kappa if args.c_over_L4 is None else args.c_over_L4
        lp = ss.LoopCavityParams.from_c_over_L4(a.gamma, a.lambda_, args.kappa, c_over)
        if n == "integrator-loop":
            return "statespace", ss.build_integrator_model(lp)
        model, Z = ss.build_phase_filter(lp)
        return ("statespace", model) if args.mode == "finite" else ("system", TransferMatrix([[Z]]))
    if n == "zero":
        return "zero", RationalFunction.constant(0.0)
    if args.file is None:
        raise ConfigError("--network file needs --file")
    return "system", _read_matrix_file(args.file)


def _response(kind, obj, omegas):
    """Complex responses (N, m, n) and a per-point pole flag."""
    if kind == "loop":
        obj = obj.gfb
    if kind == "zero":
        obj = TransferMatrix([[obj]])
    out, flags = [], []
    for w in omegas:
        try:
            out.append(ss.freq_response(obj, w) if kind == "statespace" else obj(1j * w))
            flags.append(False)
        except PoleError:
            shape = obj.shape if kind != "statespace" else obj.D.shape
            out.append(np.full(shape, np.nan, dtype=complex))
            flags.append(True)
    return np.array(out), np.array(flags)


# ---------------------------------------------------------------- commands

@contextlib.contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def cmd_check(args, out):
    kind, obj = build_network(args)
    omegas = _grid(args, 1e-3, 1e3)
    if kind == "amplifier":
        rep = comp.check_amplifier_realizable(obj, omegas, args.tol)
    elif kind == "passive":
        rep = comp.check_passive_unitary(obj, omegas, args.tol)
    elif kind in ("loop", "system"):
        rep = comp.check_commutation(obj.gfb if kind == "loop" else obj, omegas, args.tol)
    elif kind == "statespace":
        rep = ss.check_model_commutation(obj, omegas, args.tol)
    else:
        raise ConfigError("nothing to check for this network")
    summary = {"command": "check", "network": args.network, "mode": args.mode, **rep.to_dict()}
    out.write(json.dumps(summary, sort_keys=True) + "\n")
    return EXIT_OK if rep.passed else EXIT_CHECK


def cmd_bode(args, out):
    kind, obj = build_network(args)
    omegas = _grid(args, 1e-3, 1e3)
    resp, poles = _response(kind, obj, omegas)
    m, n = resp.shape[1:]
    if args.entries:
        try:
            entries = [(int(e[0]) - 1, int(e[1]) - 1) for e in args.entries.split(",")]
        except (ValueError, IndexError) as exc:
            raise ConfigError("--entries takes 1-based pairs like 21,11") from exc
        if any(not (0 <= i < m and 0 <= j < n) for i, j in entries):
            raise ConfigError(f"entries out of range for a {m}x{n} matrix")
    else:
        entries = [(i, j) for i in range(m) for j in range(n)]
    with _sink(args.output) as fh:
        wr = csv.writer(fh, lineterminator="\n")
        head = ["omega"]
        for i, j in entries:
            head += [f"mag_{i + 1}{j + 1}", f"phase_{i + 1}{j + 1}"]
        wr.writerow(head + ["flag"])
        for k, w in enumerate(omegas):
            row = [_fmt(w)]
            for i, j in entries:
                z = resp[k, i, j]
                row += [_fmt(abs(z)), _fmt(np.angle(z))]
            wr.writerow(row + ["pole" if poles[k] else ""])
    summary = {"command": "bode", "network": args.network, "mode": args.mode,
               "points": int(omegas.size), "poles_on_grid": int(poles.sum())}
    if args.output is not None:
        out.write(json.dumps(summary, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_nyquist(args, out):
    kind, obj = build_network(args)
    if kind == "loop":
        L = obj.open_loop
    elif kind == "zero":
        L = obj
    else:
        raise ConfigError("nyquist needs a two-port feedback network or zero")
    res = st.nyquist(L, args.omega_min, args.omega_max, margin=args.margin, points=args.points)
    with _sink(args.output) as fh:
        st.write_nyquist_csv(res, fh)
    summary = {"command": "nyquist", "network": args.network, "verdict": res.verdict.value,
               "winding_number": res.winding_number, "min_distance": res.min_distance,
               "closure": [res.closure.real, res.closure.imag], "points": int(res.omega.size),
               "notes": res.notes}
    if args.output is not None:
        out.write(json.dumps(summary, sort_keys=True) + "\n")
    return EXIT_OK


def _simulate_models(args):
    if args.model == "file":
        if args.file is None:
            raise ConfigError("--model file needs --file")
        with open(args.file) as fh:
            data = json.load(fh)
        try:
            A = _array(data["A"])
            Cm = _array(data.get("C", np.eye(A.shape[0]).tolist()))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed model file: {exc}") from exc
        model = ss.StateSpaceModel(A, np.zeros((A.shape[0], 0)), Cm, np.zeros((Cm.shape[0], 0)))
        return [("", model, data.get("x0"))]
    g = args.gamma if args.gamma is not None else args.gamma_ratio * args.lambda_
    out = []
    for k in args.kappa:
        lp = ss.LoopCavityParams.from_c_over_L4(g, args.lambda_, k, args.c_over_L4)
        if args.model == "self-oscillator":
            model = ss.build_self_oscillator(lp, args.delta)
        else:
            model = ss.build_integrator_model(lp)
        suffix = f"_kappa{k!r}" if len(args.kappa) > 1 else ""
        out.append((suffix, model, None))
    return out


def cmd_simulate(args, out):
    if args.t_points < 1 or not args.t_max >= 0 or (args.t_points > 1 and args.t_max == 0):
        raise ConfigError("need t-points >= 1 and t-max > 0")
    t = np.linspace(0.0, args.t_max, args.t_points)
    trajs, labels = [], []
    for suffix, model, x0 in _simulate_models(args):
        if args.x0 is not None:
            x0 = [complex(v) for v in args.x0.split(",")]
        elif x0 is not None:
            x0 = [_complex(v) for v in x0]
        else:
            x0 = np.full(model.n_states, 1 / np.sqrt(2))
        if len(x0) != model.n_states:
            raise ConfigError(f"x0 needs {model.n_states} entries")
        trajs.append(ss.simulate_mean(model, x0, t))
        labels += [f"{lab}{suffix}" for lab in model.output_labels]
    outputs = np.hstack([tr.outputs for tr in trajs])
    merged = ss.Trajectory(t, None, outputs, tuple(labels))
    with _sink(args.output) as fh:
        ss.write_trajectory_csv(merged, fh)
    summary = {"command": "simulate", "model": args.model, "points": int(t.size), "outputs": labels}
    if args.output is not None:
        out.write(json.dumps(summary, sort_keys=True) + "\n")
    return EXIT_OK


def _care_summary(c):
    return {"residual": c.residual, "residual_float64": c.residual_float64,
            "relative_residual": c.relative_residual, "iterations": c.iterations}


def cmd_gw(args, out):
    if args.config is not None:
        p = gw.parse_config(args.config, unit=args.unit)
    else:
        p = gw.GwParams.fig6() if args.preset == "fig6" else gw.GwParams()
    _to_angular(args)
    omegas = _grid(args, 2 * np.pi * 10, 2 * np.pi * 1e4)
    summary = {"command": "gw", "mode": args.mode}
    if args.mode == "baseline":
        budget = gw.baseline_noise(p, omegas, ignore_detuning=args.ignore_detuning)
        with _sink(args.output) as fh:
            gw.write_noise_csv(budget, fh)
        summary["sql_tangent"] = bool(np.all(budget.total[~budget.flags] >= budget.sql[~budget.flags] * (1 - 1e-12)))
    elif args.mode == "controlled":
        model = gw.build_full_system(p)
        lqg = gw.lqg_synthesize(model, p.weights())
        budget = gw.controlled_noise(model, lqg, p, omegas)
        with _sink(args.output) as fh:
            gw.write_noise_csv(budget, fh)
        summary.update({
            "max_re_eig_A_tot": lqg.max_re_eig,
            "max_re_eig_A": float(np.max(np.linalg.eigvals(model.A).real)),
            "stable": lqg.max_re_eig < 0,
            "ranks": list(lqg.ranks),
            "care_regulator": _care_summary(lqg.care_F),
            "care_kalman": _care_summary(lqg.care_K),
            "flagged_points": int(budget.flags.sum()),
        })
    else:
        try:
            values = [float(v) for v in args.values.split(",")]
        except ValueError as exc:
            raise ConfigError("--values takes comma-separated numbers") from exc
        if args.unit == "hertz":
            values = [2 * np.pi * v for v in values]
        entries = gw.loss_sweep(p, args.channel, values, omegas)
        buf = io.StringIO()
        first = True
        for e in entries:
            if e.budget is None:
                continue
            part = io.StringIO()
            gw.write_noise_csv(e.budget, part, leading=(args.channel, e.value))
            text = part.getvalue()
            buf.write(text if first else text.split("\n", 1)[1])
            first = False
        with _sink(args.output) as fh:
            fh.write(buf.getvalue())
        summary.update({
            "channel": args.channel,
            "values": values,
            "failures": [{"value": e.value, "error": e.error} for e in entries if e.error],
            "max_re_eig_A_tot": [e.lqg.max_re_eig if e.lqg else None for e in entries],
        })
    if args.output is not None:
        out.write(json.dumps(summary, sort_keys=True) + "\n")
    return EXIT_OK


COMMANDS = {"check": cmd_check, "bode": cmd_bode, "nyquist": cmd_nyquist, "simulate": cmd_simulate, "gw": cmd_gw}


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        if args.command != "gw":
            _to_angular(args)
        return COMMANDS[args.command](args, out)
    except CareError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CARE
    except RankDeficiencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANK
    except (NumericGuardError, InternalConsistencyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (QfbError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
