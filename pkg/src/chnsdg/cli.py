"""Command-line driver.

    python -m chnsdg --config configs/spinodal.toml --out runs/spinodal
    python -m chnsdg --mode verify-mms --set space.q=1
    python -m chnsdg --mode probe-constants --set probe.ns=2,4,8

Exit codes: 0 success, 2 configuration error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np
import sympy as sym

from . import initial_data
from .config import ConfigError, RunConfig, keys_doc, load_config
from .diagnostics import coercivity_constants, estimate_infsup
from .forms import Discretization
from .mesh import MeshError, load_mesh, structured_unit_square
from .output import DiagnosticsWriter, write_fields_csv, write_json, write_vtk
from .projections import SingularSystemError
from .stepper import NewtonDivergence, SchemeParams, Stepper
from .verify_mms import T as T_SYM
from .verify_mms import builtin_case, run_convergence, spatial_taus

log = logging.getLogger("chnsdg")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


class SolverFailure(RuntimeError):
    pass


# --------------------------------------------------------------------- helpers
def build_mesh_from(cfg: RunConfig):
    path = cfg.mesh_file()
    if path is None:
        return structured_unit_square(cfg.get("mesh.n"))
    try:
        return load_mesh(path)
    except OSError as exc:
        raise ConfigError("mesh.file", f"cannot read {path}: {exc.strerror}") from None
    except MeshError as exc:
        raise ConfigError("mesh.file", str(exc)) from None


def probe_constants(disc: Discretization, max_dofs: int) -> dict:
    """K_alpha, K_eps and beta_h on ``disc``; ``None`` when the dense probe would be too large."""
    if disc.nX > max_dofs:
        return {"K_alpha": None, "K_eps": None, "beta_h": None,
                "probe_skipped": f"{disc.nX} velocity dofs exceed run.probe_max_dofs={max_dofs}"}
    ka, ke = coercivity_constants(disc)
    return {"K_alpha": ka, "K_eps": ke, "beta_h": estimate_infsup(disc)}


def _mms_case(cfg: RunConfig):
    g = cfg.get("mms.velocity_time")
    vt = None
    if g is not None:
        try:
            vt = sym.sympify(g, locals={"t": T_SYM})
        except (sym.SympifyError, TypeError, SyntaxError) as exc:
            raise ConfigError("mms.velocity_time", f"cannot parse expression: {exc}") from None
    return builtin_case(kappa=cfg.get("mms.kappa"), mu_s=cfg.get("mms.mu_s"), velocity_time=vt)


def _initial(cfg: RunConfig):
    preset = cfg.get("initial.preset")
    if preset == "constant":
        return initial_data.constant(cfg.get("initial.cbar")), None, None
    if preset == "spinodal":
        c0 = initial_data.spinodal(cfg.get("initial.seed"), cfg.get("initial.amplitude"),
                                   cfg.get("initial.modes"), cfg.get("initial.mean"))
        return c0, None, None
    case = _mms_case(cfg)
    return case.c_at(0.0), case.v_at(0.0), case.forcing()


def scheme_params(cfg: RunConfig) -> SchemeParams:
    g = cfg.get
    return SchemeParams(tau=g("scheme.tau"), kappa=g("scheme.kappa"), mu_s=g("scheme.mu_s"),
                        potential=cfg.potential(), newton_atol=g("scheme.newton_atol"),
                        newton_maxit=g("scheme.newton_maxit"))


# ----------------------------------------------------------------------- modes
def simulate(cfg: RunConfig, out: Path) -> dict:
    mesh = build_mesh_from(cfg)
    disc = Discretization(mesh, cfg.q, cfg.get("space.sigma"))
    c0, v0, forcing = _initial(cfg)
    stepper = Stepper(disc, scheme_params(cfg), forcing)
    every = cfg.get("output.every")
    dump = cfg.get("output.fields")
    masses, energies = [], []

    def dump_fields(state):
        fields = {"c": state.c, "v": state.v}
        if state.mu is not None:
            fields.update(mu=state.mu, p=state.p)
        stem = out / f"fields_{state.n:06d}"
        write_fields_csv(stem.with_suffix(".csv"), mesh, fields)
        write_vtk(stem.with_suffix(".vtk"), mesh, fields, title=f"step {state.n} t={state.t!r}")

    with DiagnosticsWriter(out / "diagnostics.csv") as diag:
        def record(state):
            masses.append(state.diagnostics["mass"])
            energies.append(state.diagnostics["F_total"])
            last = state.n == cfg.n_steps
            if state.n % every == 0 or last:
                diag.write(state)
                if dump:
                    dump_fields(state)

        try:
            state = stepper.initialize(c0, v0)
            record(state)
            for _ in range(cfg.n_steps):
                state = stepper.step(state)
                record(state)
        except (NewtonDivergence, SingularSystemError) as exc:
            raise SolverFailure(str(exc)) from exc

    dE = np.diff(energies)
    report = {
        "mode": "simulate",
        "steps": cfg.n_steps,
        "final_time": state.t,
        "mass_drift": float(np.max(np.abs(np.array(masses) - masses[0]))),
        "max_energy_increase": float(dE.max()) if dE.size else 0.0,
        "n_elements": mesh.n_elements,
        "h_max": mesh.h_max,
    }
    if cfg.get("run.probes"):
        report.update(probe_constants(disc, cfg.get("run.probe_max_dofs")))
    return report


def verify_mms(cfg: RunConfig, out: Path) -> dict:
    case = _mms_case(cfg)
    q, T = cfg.q, cfg.get("mms.T")
    if cfg.get("mms.study") == "spatial":
        ns = cfg.int_list("mms.ns")
        taus = spatial_taus(ns, T, cfg.get("mms.tau_factor"), q)
        by = "h"
    else:
        divs = cfg.int_list("mms.divisions")
        ns = [cfg.get("mms.n")] * len(divs)
        taus = [T / d for d in divs]
        by = "tau"
    try:
        table = run_convergence(case, q, ns, taus, T, by=by, sigma=cfg.get("space.sigma"))
    except (NewtonDivergence, SingularSystemError) as exc:
        raise SolverFailure(str(exc)) from exc
    table.write_csv(out / "convergence.csv")
    report = {
        "mode": "verify-mms",
        "study": cfg.get("mms.study"),
        "q": q,
        "final_eoc": {k: table.final_eoc(k) for k in ("err_c_dg", "err_v_l2", "err_v_dg_acc",
                                                       "err_mu_dg_acc")},
    }
    if cfg.get("run.probes"):
        disc = Discretization(structured_unit_square(ns[0]), q, cfg.get("space.sigma"))
        report.update(probe_constants(disc, cfg.get("run.probe_max_dofs")))
    return report


def probe(cfg: RunConfig, out: Path) -> dict:
    rows = []
    for n in cfg.int_list("probe.ns"):
        disc = Discretization(structured_unit_square(n), cfg.q, cfg.get("space.sigma"))
        rows.append({"n": n, "h": disc.mesh.h_max, **probe_constants(disc, cfg.get("run.probe_max_dofs"))})
    with open(out / "probes.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["n", "h", "K_alpha", "K_eps", "beta_h"], extrasaction="ignore")
        w.writeheader()
        w.writerows(rows)
    report = {"mode": "probe-constants", "q": cfg.q, "probes": rows}
    # headline values from the finest mesh
    report.update({k: rows[-1].get(k) for k in ("K_alpha", "K_eps", "beta_h")})
    return report


MODE_FUNCS = {"simulate": simulate, "verify-mms": verify_mms, "probe-constants": probe}


# ------------------------------------------------------------------------ main
def parse_args(argv):
    ap = argparse.ArgumentParser(prog="chnsdg", description=__doc__.splitlines()[0],
                                 epilog="config keys:\n" + keys_doc(),
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", type=Path, help="[section] key = value file")
    ap.add_argument("--set", dest="overrides", action="append", default=[], metavar="K=V",
                    help="override one key, e.g. scheme.tau=0.01 (repeatable)")
    ap.add_argument("--mode", choices=list(MODE_FUNCS), help="overrides run.mode")
    ap.add_argument("--out", type=Path, help="output directory (overrides output.dir)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = list(args.overrides)
    if args.mode:
        overrides.append(f"run.mode={args.mode}")
    try:
        cfg = load_config(args.config, overrides)
        out = cfg.output_dir(args.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError("output.dir", f"cannot create {out}: {exc.strerror}") from None
        report = MODE_FUNCS[cfg.mode](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    write_json(out / "report.json", report)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
