"""Experiment orchestration and bit-stable report emission.

Subcommands: solve, sweep, phi-trace, spectrum, fit-growth, verify.
Configuration is a single JSON document; every report row echoes its
hash.  CSV is emitted with a fixed column order and 12 significant
digits so identical configurations reproduce identical bytes (set
measure_runtime to false to zero the timing column as well).

Exit codes: 0 success, 1 invariant violation (the failing invariant is
named), 2 solver nonconvergence, 3 invalid configuration.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import estimators as est
from .grid import Field, GridSpec, build_grid
from .penalization import Penalization, admissibility_check, beta_eval, rescale
from .solver import (DirichletData, NonconvergedError, rescaled_solution,
                     solve_penalized, variational_trace)
from .spectral import build_sphere_mesh, eigenvalue_min

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_NONCONVERGED = 2
EXIT_CONFIG = 3

SWEEP_COLUMNS = ("epsilon", "sup_u", "min_uy", "neg_part_sup", "C0", "delta0",
                 "holder_half", "holder_075", "alpha_hat", "phi_defect",
                 "iterations", "runtime_ms", "config_hash")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    dimension: int = 2
    resolution: int = 128
    tangential_extent: float = 1.0
    normal_extent: float = 1.0
    epsilon_list: tuple = (0.01, 0.001, 0.0001)
    preset: str = "constant"
    amplitude: float = -1.0
    width: float = 0.5
    solver_tol: float = 1e-8
    estimator_tol: float = 1e-6
    radii: tuple | None = None
    alphas: tuple = (0.5, 0.75)
    seed: int = 0
    out_dir: str = "out"
    measure_runtime: bool = True
    workers: int = 1

    def validate(self) -> "ExperimentConfig":
        eps = tuple(float(e) for e in self.epsilon_list)
        if not eps or any(e <= 0 for e in eps):
            raise ConfigError("epsilon_list must be nonempty and positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("epsilon_list must be strictly decreasing")
        self.epsilon_list = eps
        try:
            self.grid_spec()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        try:
            self.dirichlet_data()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.radii is not None:
            radii = tuple(float(r) for r in self.radii)
            spec = self.grid_spec()
            if any(r < 4.0 / self.resolution for r in radii):
                raise ConfigError("radii must be at least 4h")
            if any(r > spec.tangential_extent for r in radii):
                raise ConfigError("radii exit the domain")
            setattr(self, "radii", radii)
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.solver_tol <= 0 or self.estimator_tol <= 0:
            raise ConfigError("tolerances must be positive")
        return self

    def grid_spec(self) -> GridSpec:
        return GridSpec(dimension=self.dimension,
                        tangential_extent=self.tangential_extent,
                        normal_extent=self.normal_extent,
                        resolution=self.resolution)

    def dirichlet_data(self) -> DirichletData:
        return DirichletData(self.preset, amplitude=self.amplitude,
                             width=self.width)

    def canonical_json(self) -> str:
        """Experiment identity only: execution details (workers, output
        location, timing) do not change the science and stay out of the hash."""
        payload = asdict(self)
        payload["epsilon_list"] = list(self.epsilon_list)
        payload["alphas"] = list(self.alphas)
        payload["radii"] = list(self.radii) if self.radii is not None else None
        for key in ("workers", "out_dir", "measure_runtime"):
            payload.pop(key)
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:12]

    @staticmethod
    def from_file(path: str | None) -> "ExperimentConfig":
        if path is None:
            return ExperimentConfig().validate()
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        if "epsilon" in raw and "epsilon_list" not in raw:
            raw["epsilon_list"] = [raw.pop("epsilon")]
        known = {f for f in ExperimentConfig.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = ExperimentConfig(**raw)
        return cfg.validate()


# -- formatting ---------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return "%.12g" % float(x)


def write_csv(path: Path, columns, rows):
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    path.write_text("\n".join(lines) + "\n")


def write_json(path: Path, payload):
    path.write_text(json.dumps(payload, sort_keys=True, indent=1,
                               default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_field(out: Path, name: str, fld: Field, cfg: ExperimentConfig):
    """Flat binary dump: float64 little-endian, row-major, y-outer."""
    values = np.ascontiguousarray(fld.values, dtype="<f8")
    (out / f"{name}.f64").write_bytes(values.tobytes())
    write_json(out / f"{name}.json", {
        "dtype": "<f8", "order": "row-major", "layout": "y-outer",
        "shape": list(values.shape), "dimension": cfg.dimension,
        "tangential_extent": cfg.tangential_extent,
        "normal_extent": cfg.normal_extent, "resolution": cfg.resolution,
        "config_hash": cfg.config_hash,
    })


# -- per-epsilon measurement (sweep worker) ------------------------------------


def sweep_row(cfg: ExperimentConfig, eps: float) -> dict:
    t0 = time.perf_counter()
    spec = cfg.grid_spec()
    grid = build_grid(spec)
    data = cfg.dirichlet_data()
    res = solve_penalized(grid, Penalization(eps), data, tol=cfg.solver_tol)
    rep = est.estimate_report(res, alphas=(0.5, 0.75))

    C0 = rep.C0
    w = est.corrected_velocity(res, C0)
    h = spec.h
    L = spec.tangential_extent
    fb = est.free_boundary(res, tol=max(1e-12, 10 * res.residual))
    center = (fb[np.argmin(np.linalg.norm(fb, axis=1))]
              if fb.size else np.zeros(spec.dimension - 1))
    r_max = min(0.35 * L, L - float(np.max(np.abs(center))) - 2 * h)
    radii = cfg.radii or tuple(np.linspace(max(8 * h, r_max / 8), r_max, 8))
    if min(radii) >= 4 * h and len(radii) >= 2 and radii[0] < radii[-1]:
        phi = est.phi_trace(w, center, radii)
        top = float(phi.phi_values[-1])
        phi_defect = phi.monotone_defect / top if top > 0 else 0.0
    else:
        phi_defect = 0.0    # window unmeasurable at this resolution

    ms = (time.perf_counter() - t0) * 1e3 if cfg.measure_runtime else 0.0
    return {
        "epsilon": eps,
        "sup_u": rep.sup_u,
        "min_uy": rep.min_uy,
        "neg_part_sup": rep.neg_part_sup,
        "C0": rep.C0,
        "delta0": rep.delta0,
        "holder_half": rep.holder_seminorms[0.5],
        "holder_075": rep.holder_seminorms[0.75],
        "alpha_hat": rep.growth_alpha,
        "phi_defect": phi_defect,
        "iterations": res.iterations,
        "runtime_ms": int(round(ms)),
        "config_hash": cfg.config_hash,
    }


def _sweep_row_packed(args) -> dict:
    cfg_dict, eps = args
    cfg = ExperimentConfig(**cfg_dict).validate()
    return sweep_row(cfg, eps)


# -- subcommands ----------------------------------------------------------------


def cmd_solve(cfg: ExperimentConfig, out: Path) -> int:
    grid = build_grid(cfg.grid_spec())
    eps = cfg.epsilon_list[0]
    res = solve_penalized(grid, Penalization(eps), cfg.dirichlet_data(),
                          tol=cfg.solver_tol)
    write_field(out, "field", res.u, cfg)
    rows = []
    if cfg.dimension == 2:
        for i, x in enumerate(grid.xs):
            rows.append({"x": x, "u": res.u.values[0][i],
                         "uy": res.uy_trace[i],
                         "active": bool(res.active_set[i])})
        write_csv(out / "trace.csv", ("x", "u", "uy", "active"), rows)
    else:
        for i1, x1 in enumerate(grid.xs):
            for i2, x2 in enumerate(grid.xs):
                rows.append({"x1": x1, "x2": x2,
                             "u": res.u.values[0][i1, i2],
                             "uy": res.uy_trace[i1, i2],
                             "active": bool(res.active_set[i1, i2])})
        write_csv(out / "trace.csv", ("x1", "x2", "u", "uy", "active"), rows)
    write_json(out / "report.json", {
        "config_hash": cfg.config_hash, "epsilon": eps,
        "iterations": res.iterations, "residual": res.residual,
        "energy": res.energy,
        "active_nodes": int(res.active_set.sum()),
    })
    print(f"solved eps={eps:g}: {res.iterations} iterations, "
          f"residual {res.residual:.3e}, energy {res.energy:.12g}")
    return EXIT_OK


def cmd_sweep(cfg: ExperimentConfig, out: Path) -> int:
    eps_sorted = tuple(sorted(cfg.epsilon_list, reverse=True))
    if cfg.workers > 1:
        cfg_dict = asdict(cfg)
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_sweep_row_packed,
                                 [(cfg_dict, e) for e in eps_sorted]))
    else:
        rows = [sweep_row(cfg, e) for e in eps_sorted]
    rows.sort(key=lambda r: -r["epsilon"])
    write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows)
    write_json(out / "sweep.json", {"config_hash": cfg.config_hash, "rows": rows})
    for r in rows:
        print(f"eps={r['epsilon']:.3g}  sup_u={r['sup_u']:.6g}  "
              f"neg_part_sup={r['neg_part_sup']:.6g}  "
              f"holder_half={r['holder_half']:.6g}")
    return EXIT_OK


def cmd_phi_trace(cfg: ExperimentConfig, out: Path) -> int:
    grid = build_grid(cfg.grid_spec())
    eps = min(cfg.epsilon_list)
    res = solve_penalized(grid, Penalization(eps), cfg.dirichlet_data(),
                          tol=cfg.solver_tol)
    h = grid.h
    C0 = est.semiconvexity_constant(res, [4 * h, 8 * h])
    w = est.corrected_velocity(res, C0)
    fb = est.free_boundary(res, tol=max(1e-12, 10 * res.residual))
    center = (fb[np.argmin(np.linalg.norm(fb, axis=1))]
              if fb.size else np.zeros(cfg.dimension - 1))
    L = cfg.tangential_extent
    radii = cfg.radii or tuple(np.linspace(
        8 * h, min(0.4 * L, L - float(np.max(np.abs(center))) - 2 * h), 12))
    tr = est.phi_trace(w, center, radii)
    rows = [{"r": r, "phi": p, "config_hash": cfg.config_hash}
            for r, p in zip(tr.radii, tr.phi_values)]
    write_csv(out / "phi_trace.csv", ("r", "phi", "config_hash"), rows)
    write_json(out / "phi_trace.json", {
        "config_hash": cfg.config_hash, "epsilon": eps, "C0": C0,
        "center": tr.center, "radii": tr.radii, "phi": tr.phi_values,
        "monotone_defect": tr.monotone_defect,
    })
    print(f"phi(r) on [{tr.radii[0]:.4g}, {tr.radii[-1]:.4g}]: "
          f"defect {tr.monotone_defect:.3e} "
          f"({100 * tr.monotone_defect / max(tr.phi_values[-1], 1e-300):.2f}% of top)")
    return EXIT_OK


def cmd_spectrum(cfg: ExperimentConfig, out: Path) -> int:
    resolutions = [max(32, cfg.resolution // 4), max(32, cfg.resolution // 2),
                   max(32, cfg.resolution)]
    resolutions = sorted(set(resolutions))
    rows = []
    for n in resolutions:
        t0 = time.perf_counter()
        mesh = build_sphere_mesh(cfg.dimension, n)
        lam, _ = eigenvalue_min(mesh, tol=1e-12)
        ms = (time.perf_counter() - t0) * 1e3 if cfg.measure_runtime else 0.0
        rows.append({"nodes_per_axis": n, "lambda_hat": lam,
                     "runtime_ms": int(round(ms)),
                     "config_hash": cfg.config_hash})
        print(f"d={cfg.dimension} n={n}: lambda_hat = {lam:.8f}")
    write_csv(out / "spectrum.csv",
              ("nodes_per_axis", "lambda_hat", "runtime_ms", "config_hash"),
              rows)
    write_json(out / "spectrum.json",
               {"config_hash": cfg.config_hash, "rows": rows})
    return EXIT_OK


def cmd_fit_growth(cfg: ExperimentConfig, out: Path) -> int:
    grid = build_grid(cfg.grid_spec())
    eps = min(cfg.epsilon_list)
    res = solve_penalized(grid, Penalization(eps), cfg.dirichlet_data(),
                          tol=cfg.solver_tol)
    fb = est.free_boundary(res, tol=max(1e-12, 10 * res.residual))
    center = (fb[np.argmin(np.linalg.norm(fb, axis=1))]
              if fb.size else np.zeros(cfg.dimension - 1))
    h, L = grid.h, cfg.tangential_extent
    if cfg.radii:
        radii = cfg.radii
    else:
        r_top = min(0.5 * L, L - float(np.max(np.abs(center))) - 2 * h)
        radii, r = [], r_top
        while r >= 8 * h:
            radii.append(r)
            r *= 0.5
        if len(radii) < 4 and r_top > 8 * h:
            # coarse grid: a geometric ladder still gives enough fit points
            radii = list(np.geomspace(8 * h, r_top, 5))
    fit = est.growth_fit(res, center, radii)
    write_json(out / "growth.json", {
        "config_hash": cfg.config_hash, "epsilon": eps,
        "center": center, "alpha_hat": fit.alpha_hat, "K1": fit.K1,
        "mu": fit.mu, "fit_residual": fit.residual,
        "radii": fit.radii, "sups": fit.sups,
    })
    rows = [{"r": r, "sup_uy": s, "config_hash": cfg.config_hash}
            for r, s in zip(fit.radii, fit.sups)]
    write_csv(out / "growth.csv", ("r", "sup_uy", "config_hash"), rows)
    print(f"alpha_hat = {fit.alpha_hat:.4f}  K1 = {fit.K1:.4f}  "
          f"mu = {fit.mu:.4f}  fit residual {fit.residual:.3e}")
    return EXIT_OK


# -- verify ----------------------------------------------------------------------


class InvariantFailure(Exception):
    def __init__(self, name: str, detail: str):
        super().__init__(f"{name}: {detail}")
        self.name = name


def _verify_battery(cfg: ExperimentConfig):
    """Yield (name, callable) pairs; callables raise InvariantFailure."""
    spec = cfg.grid_spec()
    grid = build_grid(spec)
    h = spec.h
    L = spec.tangential_extent
    tol = cfg.estimator_tol
    eps_list = cfg.epsilon_list
    bump = DirichletData.positive_bump()
    sig = DirichletData.signorini_exact()

    solved: dict = {}

    def solve(data, eps):
        key = (data.preset, eps)
        if key not in solved:
            solved[key] = solve_penalized(grid, Penalization(eps), data,
                                          tol=cfg.solver_tol)
        return solved[key]

    def check_max_principle():
        for data in (DirichletData.constant(-1.0), bump, sig):
            for eps in (eps_list[0], eps_list[-1]):
                res = solve(data, eps)
                g = data.evaluate(grid, eps)[grid.dirichlet_mask]
                u = res.u.values
                if u.min() < g.min() - tol or u.max() > g.max() + tol:
                    raise InvariantFailure(
                        "max_principle",
                        f"{data.preset} eps={eps:g}: range [{u.min():.6g}, "
                        f"{u.max():.6g}] vs data [{g.min():.6g}, {g.max():.6g}]")
                if g.min() < 0 < g.max():
                    if np.abs(u).max() > np.abs(g).max() + tol:
                        raise InvariantFailure(
                            "max_principle",
                            f"{data.preset} eps={eps:g}: sup|u| exceeds sup|g|")

    def check_trace_sign_bound():
        flat = grid.flat_mask_bottom
        Cs = []
        for eps in eps_list:
            res = solve(bump, eps)
            tr = res.uy_trace[flat]
            if tr.max() > tol:
                raise InvariantFailure(
                    "trace_sign", f"eps={eps:g}: max trace {tr.max():.3e} > tol")
            Cs.append(-tr.min())
        spread = (max(Cs) - min(Cs)) / max(max(Cs), 1e-300)
        if spread > 0.10:
            raise InvariantFailure(
                "trace_bound_stability",
                f"C varies {100 * spread:.1f}% over the sweep ({Cs})")

    def check_annulus_positivity():
        for eps in eps_list:
            res = solve(bump, eps)
            d0 = est.annulus_positivity_width(res)
            if not d0 > 0.0:
                raise InvariantFailure(
                    "annulus_positivity", f"eps={eps:g}: delta0 = {d0}")

    def check_semiconvexity_consistency():
        deltas = [h, 2 * h, 4 * h, 8 * h]
        for data in (bump, sig):
            res = solve(data, eps_list[-1])
            C0 = est.semiconvexity_constant(res, deltas)
            ok, margin = est.semiconcavity_check(res, C0, tol=10 * tol)
            if not ok:
                raise InvariantFailure(
                    "semiconcavity",
                    f"{data.preset}: sup u_yy exceeds (d-1)C0 by {-margin:.3e}")
            ok, worst = est.uy_increment_check(res, C0, tol=10 * tol)
            if not ok:
                raise InvariantFailure(
                    "uy_increment", f"{data.preset}: excess {worst:.3e}")
            m = (spec.dimension - 1) * C0
            ok, worst = est.corollary1_c_check(res, max(m, 10 * tol), tol=10 * tol)
            if not ok:
                raise InvariantFailure(
                    "quadratic_growth_in_y", f"{data.preset}: excess {worst:.3e}")

    def check_admissibility():
        for eps in eps_list:
            rep = admissibility_check(Penalization(eps))
            if not rep.all_passed:
                raise InvariantFailure(
                    "penalization_admissibility",
                    f"eps={eps:g}: failures {rep.failures()}")

    def check_scaling_covariance():
        rng = np.random.default_rng(cfg.seed)
        for eps in eps_list:
            p = Penalization(eps)
            for sigma in (0.5, 1.0, 2.0, *np.exp(rng.uniform(-2, 2, 4))):
                q = rescale(p, sigma)
                ts = rng.uniform(-3, 3, 17)
                a = np.asarray(beta_eval(p, sigma * ts))
                b = np.asarray(beta_eval(q, ts))
                # exact for dyadic sigma; rounding of eps/sigma otherwise
                slack = 0.0 if sigma in (0.5, 1.0, 2.0) else \
                    4.0 * np.finfo(float).eps * np.maximum(np.abs(a), 1.0)
                if np.any(np.abs(a - b) > slack):
                    raise InvariantFailure(
                        "scaling_covariance", f"eps={eps:g} sigma={sigma:g}")

    def check_rescaled_identity():
        eps = 0.25
        res = solve(sig, eps)
        v = rescaled_solution(res, Penalization(eps))
        vy = variational_trace(v)
        active = v.values[0] < 0
        active &= grid.flat_mask_bottom
        if active.any():
            gap = np.abs(vy[active] - v.values[0][active]).max()
            bound = 20.0 * h * max(1.0, np.abs(v.values).max())
            if gap > bound:
                raise InvariantFailure(
                    "rescaled_identity",
                    f"|v_y - v| = {gap:.3e} > O(h) bound {bound:.3e}")

    def check_hull_localization():
        res = solve(sig, eps_list[-1])
        fit_radii = np.geomspace(8 * h, 0.4 * L, 5)
        fb = est.free_boundary(res, tol=max(1e-12, 10 * res.residual))
        center = (fb[np.argmin(np.linalg.norm(fb, axis=1))]
                  if fb.size else np.zeros(spec.dimension - 1))
        try:
            fit = est.growth_fit(res, center, fit_radii)
            alpha = min(0.5, max(0.05, fit.alpha_hat))
        except ValueError:
            alpha = 0.5
        for r in fit_radii:
            if not est.hull_check(grid, res.uy_trace, r, alpha):
                raise InvariantFailure(
                    "hull_localization", f"r={r:g} alpha={alpha:g}")

    yield "max_principle", check_max_principle
    yield "trace_sign_bound", check_trace_sign_bound
    yield "annulus_positivity", check_annulus_positivity
    yield "semiconvexity_consistency", check_semiconvexity_consistency
    yield "penalization_admissibility", check_admissibility
    yield "scaling_covariance", check_scaling_covariance
    yield "rescaled_identity", check_rescaled_identity
    yield "hull_localization", check_hull_localization


def cmd_verify(cfg: ExperimentConfig, out: Path) -> int:
    results = []
    code = EXIT_OK
    first_failure = None
    for name, check in _verify_battery(cfg):
        t0 = time.perf_counter()
        try:
            check()
            status, detail = "PASS", ""
        except InvariantFailure as exc:
            status, detail = "FAIL", str(exc)
            code = EXIT_INVARIANT
            first_failure = first_failure or exc.name
        except NonconvergedError as exc:
            status, detail = "NONCONVERGED", str(exc)
            code = EXIT_NONCONVERGED
        except Exception as exc:  # noqa: BLE001 - report and keep going
            status, detail = "FAIL", f"{type(exc).__name__}: {exc}"
            code = EXIT_INVARIANT
            first_failure = first_failure or name
        ms = (time.perf_counter() - t0) * 1e3 if cfg.measure_runtime else 0.0
        results.append({"invariant": name, "status": status, "detail": detail,
                        "runtime_ms": int(round(ms)),
                        "config_hash": cfg.config_hash})
        print(f"{status:4s} {name}" + (f"  [{detail}]" if detail else ""))
    write_csv(out / "verify.csv",
              ("invariant", "status", "detail", "runtime_ms", "config_hash"),
              results)
    write_json(out / "verify.json",
               {"config_hash": cfg.config_hash, "results": results})
    if first_failure:
        print(f"invariant violated: {first_failure}", file=sys.stderr)
    return code


# -- entry point ------------------------------------------------------------------


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "phi-trace": cmd_phi_trace,
    "spectrum": cmd_spectrum,
    "fit-growth": cmd_fit_growth,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="obstacle-lab",
        description="Penalized boundary obstacle problem laboratory")
    parser.add_argument("subcommand", choices=sorted(COMMANDS))
    parser.add_argument("--config", default=None,
                        help="JSON configuration file (defaults used if omitted)")
    parser.add_argument("--out", default=None,
                        help="output directory (overrides config out_dir)")
    parser.add_argument("--workers", type=int, default=None,
                        help="parallel sweep workers (overrides config)")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.from_file(args.config)
        if args.workers is not None:
            cfg.workers = args.workers
        if args.out is not None:
            cfg.out_dir = args.out
        cfg.validate()
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return COMMANDS[args.subcommand](cfg, out)
    except NonconvergedError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (ConfigError, ValueError) as exc:
        # precondition violations surface as invalid configuration
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
