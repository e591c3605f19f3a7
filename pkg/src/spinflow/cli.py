"""Command-line surface: single evaluations, oracle checks, and sweeps."""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    MapInversionError,
    choi_eigenvalues,
    choi_of,
    classify,
    divisibility_scan,
    intermediate_map,
    positivity_scan,
)
from .maps import (
    EquationKind,
    MapParams,
    MapSnapshot,
    SingularRateError,
    apply_map,
    parse_kind,
    rate_divergence_time,
    snapshot,
    snapshot_arrays,
    tcl_rate_arrays,
    xi,
    xi_derivative,
)
from .measure import DEFAULT_SEED, DegeneratePairError, measure, sigma_analytic
from .states import QubitState, StatePair, state_from_bloch, trace_distance
from .volterra import (
    IntegrationDivergenceError,
    generator_matrix,
    integrate_memory_kernel,
    integrate_post_markovian,
    integrate_quadrature,
    integrate_tcl,
)

TRIG_WARNING = "regime: trigonometric (4R>1), positivity not guaranteed"
ANALYSES = ("measure", "rates", "choi", "divisibility", "positivity")
ORACLE_TOL_RANGE = (1e-12, 1e-4)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return "%.17g" % float(value)


def _py(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def _emit(headers, rows, fmt: str, out: str | None) -> None:
    if fmt == "csv":
        lines = [",".join(headers)]
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
        text = "\n".join(lines) + "\n"
    else:
        records = [{h: _py(v) for h, v in zip(headers, row)} for row in rows]
        text = json.dumps(records, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _diag(message: str) -> None:
    print(message, file=sys.stderr)


def _add_output_flags(sp) -> None:
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--out", default=None, help="output path (default stdout)")


def _add_param_flags(sp) -> None:
    sp.add_argument("--kind", required=True, help="equation kind: mem | post")
    sp.add_argument("--r", type=float, default=None, help="dimensionless ratio R")
    sp.add_argument("--gamma0", type=float, default=None)
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--n", type=float, default=0.0, help="thermal occupation N")


def _params(args, parser) -> tuple[EquationKind, MapParams]:
    try:
        kind = parse_kind(args.kind)
    except ValueError as exc:
        parser.error(str(exc))
    if args.r is not None and (args.gamma0 is not None or args.gamma is not None):
        parser.error("give either --r or --gamma0/--gamma, not both")
    try:
        if args.r is not None:
            p = MapParams.from_ratio(args.r, args.n)
        elif args.gamma0 is not None:
            p = MapParams(args.gamma0, args.gamma if args.gamma is not None else 1.0, args.n)
        else:
            parser.error("parameters required: --r R or --gamma0 G0 [--gamma G]")
    except ValueError as exc:
        parser.error(str(exc))
    return kind, p


def _grid(args, parser) -> np.ndarray:
    if not args.tau_end > 0.0:
        parser.error(f"--tau-end must be positive, got {args.tau_end}")
    if args.points < 2:
        parser.error(f"--points must be >= 2, got {args.points}")
    return np.linspace(0.0, args.tau_end, args.points)


def _state_triple(text: str, parser, flag: str) -> QubitState:
    parts = text.split(",")
    if len(parts) != 3:
        parser.error(f"{flag} expects 'pe,re,im', got {text!r}")
    try:
        pe, re, im = (float(v) for v in parts)
    except ValueError:
        parser.error(f"{flag} expects three numbers, got {text!r}")
    state = QubitState(pe, complex(re, im))
    if not state.is_valid():
        parser.error(f"{flag} is not a valid qubit state: {text!r}")
    return state


def _warn_trig(kind: EquationKind, r: float) -> None:
    if kind is EquationKind.MEMORY_KERNEL and 4.0 * r > 1.0:
        _diag(TRIG_WARNING)


def cmd_xi(args, parser) -> int:
    kind, p = _params(args, parser)
    taus = _grid(args, parser)
    _warn_trig(kind, p.R)
    x = xi(kind, p.R, taus)
    d = xi_derivative(kind, p.R, taus)
    _emit(("tau", "xi", "dxi"), list(zip(taus, x, d)), args.format, args.out)
    return 0


def cmd_solve(args, parser) -> int:
    kind, p = _params(args, parser)
    taus = _grid(args, parser)
    s0 = _state_triple(args.state, parser, "--state")
    headers = ("tau", "pe", "re_b", "im_b")
    if args.method == "closed":
        lam1, lam3, t3 = snapshot_arrays(kind, p, taus)
        pe = 0.5 * (1.0 + t3 - lam3) + lam3 * s0.population_e
        b = lam1 * complex(s0.coherence)
        rows = list(zip(taus, pe, b.real, b.imag))
    else:
        try:
            traj = _integrate(kind, p, s0, args, parser)
        except IntegrationDivergenceError as exc:
            _diag(f"integrator diverged: {exc}")
            return 1
        except SingularRateError as exc:
            _diag(f"time-local rates unusable: {exc}")
            return 1
        _diag(f"max trace residual = {_fmt(traj.max_residual)}")
        rows = [
            (t, s.population_e, complex(s.coherence).real, complex(s.coherence).imag)
            for t, s in zip(traj.times, traj.states)
        ]
    _emit(headers, rows, args.format, args.out)
    return 0


def _integrate(kind, p, s0, args, parser):
    if args.method == "ode":
        run = (
            integrate_memory_kernel
            if kind is EquationKind.MEMORY_KERNEL
            else integrate_post_markovian
        )
        try:
            return run(generator_matrix(p), p, s0, args.tau_end, args.tol, points=args.points)
        except ValueError as exc:
            parser.error(str(exc))
    if args.method == "quadrature":
        # round the step count up to a multiple of the grid so every
        # requested tau lands exactly on a quadrature node
        per_cell = max(1, -(-args.steps // (args.points - 1)))
        steps = per_cell * (args.points - 1)
        try:
            traj = integrate_quadrature(
                kind, generator_matrix(p), p, s0, args.tau_end, steps=steps
            )
        except ValueError as exc:
            parser.error(str(exc))
        keep = np.arange(args.points) * per_cell
        return type(traj)(
            times=traj.times[keep],
            states=tuple(traj.states[k] for k in keep),
            auxiliary=traj.auxiliary[keep],
            steps=traj.steps,
            max_residual=traj.max_residual,
            meta=traj.meta,
        )
    try:
        return integrate_tcl(kind, p, s0, args.tau_end, args.tol, points=args.points)
    except ValueError as exc:
        parser.error(str(exc))


def cmd_trace_distance(args, parser) -> int:
    kind, p = _params(args, parser)
    taus = _grid(args, parser)
    s1 = _state_triple(args.state1, parser, "--state1")
    s2 = _state_triple(args.state2, parser, "--state2")
    lam1, lam3, t3 = snapshot_arrays(kind, p, taus)
    rows = []
    for k, tau in enumerate(taus):
        snap = MapSnapshot(float(lam1[k]), float(lam3[k]), float(t3[k]))
        rows.append(
            (
                tau,
                trace_distance(
                    apply_map(snap, s1), apply_map(snap, s2), validate=False
                ),
            )
        )
    _emit(("tau", "distance"), rows, args.format, args.out)
    return 0


def cmd_sigma(args, parser) -> int:
    kind, p = _params(args, parser)
    taus = _grid(args, parser)
    pair = StatePair(
        _state_triple(args.state1, parser, "--state1"),
        _state_triple(args.state2, parser, "--state2"),
    )
    _warn_trig(kind, p.R)
    try:
        values = sigma_analytic(kind, p, pair, taus)
    except DegeneratePairError as exc:
        parser.error(str(exc))
    _emit(("tau", "sigma"), list(zip(taus, values)), args.format, args.out)
    return 0


def _quick_classify(kind, p, seed, measure_result=None, budget=150):
    return classify(
        kind,
        p,
        grid_points=201,
        divisibility_grid=100,
        measure_budget=budget,
        seed=seed,
        measure_result=measure_result,
    )


def cmd_measure(args, parser) -> int:
    kind, p = _params(args, parser)
    if args.budget < 100:
        parser.error(f"--budget must be >= 100, got {args.budget}")
    result = measure(kind, p, t_end=args.tau_end, budget=args.budget, seed=args.seed)
    report = _quick_classify(kind, p, args.seed, measure_result=result)
    first = result.argmax_pair.first.bloch()
    second = result.argmax_pair.second.bloch()
    headers = (
        "value",
        "evaluations",
        "method",
        "tau_end",
        "classification",
        "first_x",
        "first_y",
        "first_z",
        "second_x",
        "second_y",
        "second_z",
    )
    row = (
        result.value,
        result.evaluations,
        result.method,
        result.tau_end,
        report.verdict,
        *first,
        *second,
    )
    _emit(headers, [row], args.format, args.out)
    return 0


def cmd_tcl_rates(args, parser) -> int:
    kind, p = _params(args, parser)
    taus = _grid(args, parser)
    horizon = rate_divergence_time(kind, p)
    if np.isfinite(horizon):
        kept = taus[taus < horizon]
        _diag(
            f"rates diverge at tau = {_fmt(horizon)}; "
            f"emitting {len(kept)} of {len(taus)} grid rows"
        )
        taus = kept
    g1, g2, g3 = tcl_rate_arrays(kind, p, taus)
    _emit(
        ("tau", "gamma1", "gamma2", "gamma3"),
        list(zip(taus, g1, g2, g3)),
        args.format,
        args.out,
    )
    return 0


def cmd_choi(args, parser) -> int:
    kind, p = _params(args, parser)
    if args.tau < 0.0 or args.tau_start < 0.0:
        parser.error("--tau and --tau-start must be >= 0")
    try:
        if args.tau_start > 0.0:
            snap = intermediate_map(kind, p, args.tau_start, args.tau).as_snapshot()
        else:
            snap = snapshot(kind, p, args.tau)
    except (MapInversionError, ValueError) as exc:
        _diag(str(exc))
        return 1
    c = choi_of(snap)
    _diag(f"min eigenvalue = {_fmt(choi_eigenvalues(snap)[0])}")
    rows = [
        (i, j, c[i, j].real, c[i, j].imag) for i in range(4) for j in range(4)
    ]
    _emit(("row", "col", "re", "im"), rows, args.format, args.out)
    return 0


def cmd_divisibility(args, parser) -> int:
    kind, p = _params(args, parser)
    report = divisibility_scan(kind, p, tau_end=args.tau_end, grid=args.grid)
    headers = ("divisible", "min_eigenvalue", "t1", "t2", "tau_end", "grid")
    row = (
        report.divisible,
        report.min_eigenvalue,
        report.worst_pair[0],
        report.worst_pair[1],
        report.tau_end,
        report.grid,
    )
    _emit(headers, [row], args.format, args.out)
    return 0


def cmd_positivity(args, parser) -> int:
    kind, p = _params(args, parser)
    taus = _grid(args, parser)
    result = positivity_scan(kind, p, taus, samples=args.samples)
    wx, wy, wz = result.witness.bloch()
    headers = ("ok", "worst_tau", "max_norm", "witness_x", "witness_y", "witness_z")
    _emit(
        headers,
        [(result.ok, result.worst_tau, result.worst_value, wx, wy, wz)],
        args.format,
        args.out,
    )
    return 0


def cmd_oracle(args, parser) -> int:
    kind, p = _params(args, parser)
    taus = _grid(args, parser)
    if not (ORACLE_TOL_RANGE[0] <= args.tol <= ORACLE_TOL_RANGE[1]):
        parser.error(
            f"--tol must lie in [{ORACLE_TOL_RANGE[0]:g}, {ORACLE_TOL_RANGE[1]:g}], "
            f"got {args.tol}"
        )
    s0 = _state_triple(args.state, parser, "--state")

    lam1, lam3, t3 = snapshot_arrays(kind, p, taus)
    pe_closed = 0.5 * (1.0 + t3 - lam3) + lam3 * s0.population_e
    b_closed = lam1 * complex(s0.coherence)

    run = (
        integrate_memory_kernel
        if kind is EquationKind.MEMORY_KERNEL
        else integrate_post_markovian
    )
    try:
        ode = run(
            generator_matrix(p), p, s0, args.tau_end, min(args.tol, 1e-8),
            points=args.points,
        )
        per_cell = max(1, -(-args.steps // (args.points - 1)))
        steps = per_cell * (args.points - 1)
        quad = integrate_quadrature(kind, generator_matrix(p), p, s0, args.tau_end, steps=steps)
    except IntegrationDivergenceError as exc:
        _diag(f"integrator diverged: {exc}")
        return 1
    keep = np.arange(args.points) * per_cell
    quad_states = [quad.states[k] for k in keep]

    rows = []
    worst = 0.0
    for k, tau in enumerate(taus):
        so, sq = ode.states[k], quad_states[k]
        row = (
            tau,
            pe_closed[k],
            b_closed[k].real,
            b_closed[k].imag,
            so.population_e,
            complex(so.coherence).real,
            complex(so.coherence).imag,
            sq.population_e,
            complex(sq.coherence).real,
            complex(sq.coherence).imag,
        )
        rows.append(row)
        worst = max(
            worst,
            abs(row[4] - row[1]), abs(row[5] - row[2]), abs(row[6] - row[3]),
            abs(row[7] - row[1]), abs(row[8] - row[2]), abs(row[9] - row[3]),
        )
    headers = (
        "tau",
        "pe_closed", "re_b_closed", "im_b_closed",
        "pe_ode", "re_b_ode", "im_b_ode",
        "pe_quad", "re_b_quad", "im_b_quad",
    )
    _emit(headers, rows, args.format, args.out)
    ok = worst <= args.tol
    _diag(
        f"max|delta| = {worst:.3e} {'<=' if ok else '>'} {args.tol:g}: "
        f"{'PASS' if ok else 'FAIL'}"
    )
    return 0


def cmd_classify(args, parser) -> int:
    kind, p = _params(args, parser)
    report = _quick_classify(kind, p, args.seed, budget=args.budget)
    headers = (
        "verdict",
        "params_physical",
        "positivity_ok",
        "positivity_max_norm",
        "cp_ok",
        "cp_min_eigenvalue",
        "divisible",
        "divisibility_min_eigenvalue",
        "measure_value",
        "tau_end",
    )
    row = (
        report.verdict,
        report.params_physical,
        report.positivity.ok,
        report.positivity.worst_value,
        report.cp.ok,
        report.cp.worst_value,
        report.divisibility.divisible,
        report.divisibility.min_eigenvalue,
        report.measure.value,
        report.tau_end,
    )
    _emit(headers, [row], args.format, args.out)
    return 0


class ConfigError(ValueError):
    pass


def _parse_flat_config(text: str) -> dict:
    config = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        items = [v.strip() for v in value.split(",")]
        parsed = []
        for item in items:
            try:
                parsed.append(json.loads(item))
            except json.JSONDecodeError:
                parsed.append(item)
        config[key] = parsed if len(parsed) > 1 else parsed[0]
    return config


def _as_list(value) -> list:
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _load_sweep_config(path: str) -> dict:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        raw = json.loads(text)
    else:
        raw = _parse_flat_config(text)
    known = {
        "kind", "r", "gamma0", "gamma", "n", "tau_end", "tau_points",
        "analyses", "format", "seed", "budget", "out_dir",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    kinds = [parse_kind(k) for k in _as_list(raw.get("kind", "mem"))]
    if "r" in raw and ("gamma0" in raw or "gamma" in raw):
        raise ConfigError("give either r or gamma0/gamma, not both")
    n_values = [float(v) for v in _as_list(raw.get("n", 0.0))]
    if any(n < 0.0 for n in n_values):
        raise ConfigError("every n must be >= 0")
    if "r" in raw:
        r_values = [float(v) for v in _as_list(raw["r"])]
        if any(r <= 0.0 for r in r_values):
            raise ConfigError("every r must be > 0")
        points = [
            (kind, MapParams.from_ratio(r, n))
            for kind in kinds for r in r_values for n in n_values
        ]
    elif "gamma0" in raw:
        gamma = float(raw.get("gamma", 1.0))
        g0_values = [float(v) for v in _as_list(raw["gamma0"])]
        if any(g0 <= 0.0 for g0 in g0_values) or gamma <= 0.0:
            raise ConfigError("every gamma0 and gamma must be > 0")
        points = [
            (kind, MapParams(g0, gamma, n))
            for kind in kinds for g0 in g0_values for n in n_values
        ]
    else:
        raise ConfigError("config must set r or gamma0")

    tau_end = float(raw.get("tau_end", 20.0))
    if tau_end <= 0.0:
        raise ConfigError("tau_end must be > 0")
    tau_points = int(raw.get("tau_points", 201))
    if tau_points < 2:
        raise ConfigError("tau_points must be >= 2")
    analyses = [str(a) for a in _as_list(raw.get("analyses", [])) if str(a).strip()]
    if not analyses:
        raise ConfigError("analyses must name at least one analysis")
    bad = [a for a in analyses if a not in ANALYSES]
    if bad:
        raise ConfigError(f"unknown analyses: {bad}; choose from {list(ANALYSES)}")
    fmt = str(raw.get("format", "csv"))
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    budget = int(raw.get("budget", 1000))
    if budget < 100:
        raise ConfigError("budget must be >= 100")
    return {
        "points": points,
        "tau_end": tau_end,
        "tau_points": tau_points,
        "analyses": analyses,
        "format": fmt,
        "seed": int(raw.get("seed", DEFAULT_SEED)),
        "budget": budget,
        "out_dir": raw.get("out_dir"),
        "echo": raw,
    }


def _sweep_point(index: int, kind, p, cfg: dict) -> dict:
    taus = np.linspace(0.0, cfg["tau_end"], cfg["tau_points"])
    seed = cfg["seed"]
    out: dict = {"index": index, "kind": kind.value, "r": p.R, "n": p.n_occ}
    analyses = cfg["analyses"]

    measure_result = None
    if "measure" in analyses:
        measure_result = measure(kind, p, budget=cfg["budget"], seed=seed)
        out["measure"] = [
            (
                index, kind.value, p.R, p.n_occ,
                measure_result.value,
                measure_result.evaluations,
                measure_result.method,
                measure_result.tau_end,
            )
        ]
    if "rates" in analyses:
        horizon = rate_divergence_time(kind, p)
        kept = taus[taus < horizon] if np.isfinite(horizon) else taus
        g1, g2, g3 = tcl_rate_arrays(kind, p, kept)
        out["rates"] = [
            (index, kind.value, p.R, p.n_occ, t, a, b, c)
            for t, a, b, c in zip(kept, g1, g2, g3)
        ]
    if "choi" in analyses:
        rows = []
        for tau in taus:
            eig = choi_eigenvalues(snapshot(kind, p, float(tau)))[0]
            rows.append((index, kind.value, p.R, p.n_occ, float(tau), float(eig)))
        out["choi"] = rows
    if "divisibility" in analyses:
        rep = divisibility_scan(kind, p, tau_end=cfg["tau_end"])
        out["divisibility"] = [
            (
                index, kind.value, p.R, p.n_occ,
                rep.divisible, rep.min_eigenvalue,
                rep.worst_pair[0], rep.worst_pair[1],
            )
        ]
    if "positivity" in analyses:
        res = positivity_scan(kind, p, taus)
        out["positivity"] = [
            (index, kind.value, p.R, p.n_occ, res.ok, res.worst_tau, res.worst_value)
        ]
    report = _quick_classify(
        kind, p, seed, measure_result=measure_result,
        budget=min(cfg["budget"], 150),
    )
    out["classification"] = report.verdict
    out["measure_value"] = (
        measure_result.value if measure_result is not None else report.measure.value
    )
    return out


_SWEEP_HEADERS = {
    "measure": (
        "index", "kind", "r", "n", "value", "evaluations", "method", "tau_end",
    ),
    "rates": ("index", "kind", "r", "n", "tau", "gamma1", "gamma2", "gamma3"),
    "choi": ("index", "kind", "r", "n", "tau", "min_eigenvalue"),
    "divisibility": (
        "index", "kind", "r", "n", "divisible", "min_eigenvalue", "t1", "t2",
    ),
    "positivity": ("index", "kind", "r", "n", "ok", "worst_tau", "max_norm"),
}


def cmd_sweep(args, parser) -> int:
    started = time.perf_counter()
    try:
        cfg = _load_sweep_config(args.config)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        _diag(f"config error: {exc}")
        return 2
    out_dir = Path(args.out_dir or cfg["out_dir"] or ".")
    out_dir.mkdir(parents=True, exist_ok=True)

    points = cfg["points"]
    results: list[dict | None] = [None] * len(points)
    failures = []
    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        futures = {
            pool.submit(_sweep_point, idx, kind, p, cfg): idx
            for idx, (kind, p) in enumerate(points)
        }
        for future, idx in futures.items():
            try:
                results[idx] = future.result()
            except Exception as exc:
                failures.append({"index": idx, "error": f"{type(exc).__name__}: {exc}"})

    for analysis in cfg["analyses"]:
        rows = []
        for res in results:
            if res is not None and analysis in res:
                rows.extend(res[analysis])
        suffix = "csv" if cfg["format"] == "csv" else "json"
        _emit(
            _SWEEP_HEADERS[analysis],
            rows,
            cfg["format"],
            str(out_dir / f"{analysis}.{suffix}"),
        )

    record = {
        "tool": "spinflow",
        "version": __version__,
        "config": cfg["echo"],
        "points": [
            {
                "index": idx,
                "kind": kind.value,
                "r": p.R,
                "n": p.n_occ,
                "classification": results[idx]["classification"]
                if results[idx] is not None
                else None,
                "measure_value": results[idx]["measure_value"]
                if results[idx] is not None
                else None,
            }
            for idx, (kind, p) in enumerate(points)
        ],
        "failures": sorted(failures, key=lambda f: f["index"]),
        "wall_time_s": time.perf_counter() - started,
    }
    (out_dir / "run_record.json").write_text(
        json.dumps(record, indent=2, sort_keys=True) + "\n"
    )
    _diag(
        f"sweep complete: {len(points)} points, {len(failures)} failures "
        f"-> {out_dir}"
    )
    for failure in record["failures"]:
        _diag(f"  point {failure['index']} failed: {failure['error']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinflow",
        description="Damping-map evaluations, information-flow analysis, sweeps.",
    )
    parser.add_argument("--version", action="version", version=f"spinflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, **kwargs):
        sp = sub.add_parser(name, **kwargs)
        sp.set_defaults(func=func)
        return sp

    sp = add("xi", cmd_xi, help="decay profile xi and its tau-derivative on a grid")
    _add_param_flags(sp)
    sp.add_argument("--tau-end", type=float, required=True)
    sp.add_argument("--points", type=int, default=201)
    _add_output_flags(sp)

    sp = add("solve", cmd_solve, help="evolve one state (closed form or integrator)")
    _add_param_flags(sp)
    sp.add_argument("--tau-end", type=float, required=True)
    sp.add_argument("--points", type=int, default=201)
    sp.add_argument("--state", default="1,0,0", help="initial state as 'pe,re,im'")
    sp.add_argument(
        "--method", choices=("closed", "ode", "quadrature", "tcl"), default="closed"
    )
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--steps", type=int, default=2000, help="quadrature steps")
    _add_output_flags(sp)

    sp = add("trace-distance", cmd_trace_distance, help="distance of an evolving pair")
    _add_param_flags(sp)
    sp.add_argument("--tau-end", type=float, required=True)
    sp.add_argument("--points", type=int, default=201)
    sp.add_argument("--state1", default="1,0,0")
    sp.add_argument("--state2", default="0,0,0")
    _add_output_flags(sp)

    sp = add("sigma", cmd_sigma, help="trace-distance rate of change for a pair")
    _add_param_flags(sp)
    sp.add_argument("--tau-end", type=float, required=True)
    sp.add_argument("--points", type=int, default=201)
    sp.add_argument("--state1", default="1,0,0")
    sp.add_argument("--state2", default="0,0,0")
    _add_output_flags(sp)

    sp = add("measure", cmd_measure, help="non-Markovianity measure by pair search")
    _add_param_flags(sp)
    sp.add_argument("--tau-end", type=float, default=None)
    sp.add_argument("--budget", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    _add_output_flags(sp)

    sp = add("tcl-rates", cmd_tcl_rates, help="time-local decay rates on a grid")
    _add_param_flags(sp)
    sp.add_argument("--tau-end", type=float, required=True)
    sp.add_argument("--points", type=int, default=201)
    _add_output_flags(sp)

    sp = add("choi", cmd_choi, help="Choi matrix of the map at tau (or tau-start->tau)")
    _add_param_flags(sp)
    sp.add_argument("--tau", type=float, required=True)
    sp.add_argument("--tau-start", type=float, default=0.0)
    _add_output_flags(sp)

    sp = add("divisibility", cmd_divisibility, help="two-time intermediate-map CP scan")
    _add_param_flags(sp)
    sp.add_argument("--tau-end", type=float, default=20.0)
    sp.add_argument("--grid", type=int, default=200)
    _add_output_flags(sp)

    sp = add("positivity", cmd_positivity, help="Bloch-ball contraction check on a grid")
    _add_param_flags(sp)
    sp.add_argument("--tau-end", type=float, default=20.0)
    sp.add_argument("--points", type=int, default=201)
    sp.add_argument("--samples", type=int, default=1000)
    _add_output_flags(sp)

    sp = add("oracle", cmd_oracle, help="closed form vs both integration routes")
    _add_param_flags(sp)
    sp.add_argument("--tau-end", type=float, required=True)
    sp.add_argument("--points", type=int, default=101)
    sp.add_argument("--state", default="1,0,0")
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--steps", type=int, default=2000)
    _add_output_flags(sp)

    sp = add("sweep", cmd_sweep, help="parameter sweep driven by a config file")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out-dir", default=None)
    sp.add_argument("--workers", type=int, default=4)

    sp = add("classify", cmd_classify, help="regime verdict for one parameter point")
    _add_param_flags(sp)
    sp.add_argument("--budget", type=int, default=400)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    _add_output_flags(sp)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args, parser)


if __name__ == "__main__":
    sys.exit(main())
