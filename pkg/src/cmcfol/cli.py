"""Command line front end.

``cmcfol <command> --manifest <path> [--out DIR] [--bandlimit N]
[--sigma-min X --sigma-max Y --leaves K]``

The manifest is a JSON object; unknown keys are rejected. Relative paths
in it are resolved against the manifest's directory. Exit codes: 0 on
success, 1 when ``verify`` finds a failing check, 2 for configuration
errors, 3 for domain errors, 4 for solver and numerical failures.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CmcfolError, ConfigError
from .metric import builtin_model, decay_report, load_metric
from .sphere import build_grid
from .surface import dump_surface, load_surface
from .tables import write_csv, write_json

log = logging.getLogger("cmcfol")

COMMANDS = ("solve", "foliate", "masses", "centers", "spectrum", "verify", "decay")

_MANIFEST_KEYS = {
    "metric",
    "command",
    "sigma",
    "sigma_min",
    "sigma_max",
    "leaves",
    "bandlimit",
    "radii",
    "initial",
    "tolerances",
    "eigenpairs",
    "samples",
    "seed",
    "out",
    "acceptance",
}
_TOL_KEYS = {"newton", "center"}


@dataclass
class RunManifest:
    """Validated run configuration."""

    metric: object
    metric_source: str
    command: str | None = None
    sigma: float | None = None
    sigma_min: float | None = None
    sigma_max: float | None = None
    leaves: int | None = None
    bandlimit: int = 16
    radii: list = field(default_factory=lambda: [100.0, 200.0, 400.0, 800.0])
    initial: Path | None = None
    tolerances: dict = field(default_factory=dict)
    eigenpairs: int = 10
    samples: int = 1000
    seed: int = 0
    out: Path = Path("cmcfol_out")
    acceptance: object = False


def _num(d, key, kind=float, positive=True):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"manifest key {key!r} must be a number")
    if kind is int and int(v) != v:
        raise ConfigError(f"manifest key {key!r} must be an integer")
    v = kind(v)
    if positive and not v > 0:
        raise ConfigError(f"manifest key {key!r} must be positive")
    return v


def _resolve_metric(spec, base: Path):
    if not isinstance(spec, str):
        raise ConfigError("manifest 'metric' must be a path or 'builtin:<name>'")
    if spec.startswith("builtin:"):
        return builtin_model(spec.split(":", 1)[1]), spec
    path = Path(spec)
    if not path.is_absolute():
        path = base / path
    if not path.exists():
        raise ConfigError(f"metric file {path} does not exist")
    return load_metric(path), str(path)


def load_manifest(path) -> RunManifest:
    """Parse and validate a run manifest."""
    path = Path(path)
    try:
        d = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"manifest {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"manifest {path} is not valid JSON: {exc}") from None
    if not isinstance(d, dict):
        raise ConfigError("manifest must be a JSON object")
    extra = set(d) - _MANIFEST_KEYS
    if extra:
        raise ConfigError(f"unknown manifest keys: {sorted(extra)}")
    if "metric" not in d:
        raise ConfigError("manifest needs a 'metric'")
    base = path.parent
    model, src = _resolve_metric(d["metric"], base)
    m = RunManifest(model, src)
    if "command" in d:
        if d["command"] not in COMMANDS:
            raise ConfigError(f"unknown command {d['command']!r}")
        m.command = d["command"]
    for key in ("sigma", "sigma_min", "sigma_max"):
        if key in d:
            setattr(m, key, _num(d, key))
    if "leaves" in d:
        m.leaves = _num(d, "leaves", int)
    if "bandlimit" in d:
        m.bandlimit = _num(d, "bandlimit", int)
    if "eigenpairs" in d:
        m.eigenpairs = _num(d, "eigenpairs", int)
    if "samples" in d:
        m.samples = _num(d, "samples", int)
    if "seed" in d:
        m.seed = _num(d, "seed", int, positive=False)
    if "radii" in d:
        r = d["radii"]
        if not isinstance(r, list) or not r or not all(isinstance(x, (int, float)) and not isinstance(x, bool) and x > 0 for x in r):
            raise ConfigError("'radii' must be a non-empty list of positive numbers")
        m.radii = [float(x) for x in r]
    if "initial" in d:
        p = Path(d["initial"])
        m.initial = p if p.is_absolute() else base / p
        if not m.initial.exists():
            raise ConfigError(f"initial surface {m.initial} does not exist")
    if "tolerances" in d:
        t = d["tolerances"]
        if not isinstance(t, dict) or set(t) - _TOL_KEYS:
            raise ConfigError(f"'tolerances' must be an object with keys among {sorted(_TOL_KEYS)}")
        m.tolerances = {k: _num(t, k) for k in t}
    if "out" in d:
        p = Path(d["out"])
        m.out = p if p.is_absolute() else base / p
    if "acceptance" in d:
        a = d["acceptance"]
        if not (isinstance(a, bool) or (isinstance(a, list) and all(isinstance(k, int) and 1 <= k <= 10 for k in a))):
            raise ConfigError("'acceptance' must be a boolean or a list of criterion numbers 1..10")
        m.acceptance = a
    return m


def _apply_overrides(m: RunManifest, args):
    if args.out is not None:
        m.out = Path(args.out)
    if args.bandlimit is not None:
        if args.bandlimit < 4:
            raise ConfigError("bandlimit must be at least 4")
        m.bandlimit = args.bandlimit
    if args.sigma_min is not None:
        m.sigma_min = args.sigma_min
    if args.sigma_max is not None:
        m.sigma_max = args.sigma_max
    if args.leaves is not None:
        m.leaves = args.leaves
    return m


def _need(m, *keys):
    for k in keys:
        if getattr(m, k) is None:
            raise ConfigError(f"command needs {k!r} in the manifest or on the command line")


def _newton_tol(m, sigma):
    rel = m.tolerances.get("newton")
    return None if rel is None else rel / sigma


# -- commands ------------------------------------------------------------------------

def cmd_solve(m: RunManifest):
    from .solver import newton_cmc, solve_leaf

    _need(m, "sigma")
    grid = build_grid(m.bandlimit)
    tol = _newton_tol(m, m.sigma)
    if m.initial is not None:
        init = load_surface(m.initial).with_grid(grid)
        surf, info = newton_cmc(m.metric, m.sigma, init, tol=tol, return_info=True)
        history = info.history
    else:
        surf, history = solve_leaf(m.metric, m.sigma, grid, tol=tol)
    m.out.mkdir(parents=True, exist_ok=True)
    dump_surface(surf, m.out / "surface.json")
    write_csv(m.out / "solve.csv", ("step", "residual"), enumerate(history))
    print(f"solved sigma={m.sigma:g}: residual {history[-1]:.3e}, surface written to {m.out / 'surface.json'}")
    return 0


def cmd_foliate(m: RunManifest):
    from .solver import foliate, write_foliation

    _need(m, "sigma_min", "sigma_max", "leaves")
    tab = foliate(
        m.metric,
        m.sigma_min,
        m.sigma_max,
        m.leaves,
        build_grid(m.bandlimit),
        tol=_newton_tol(m, m.sigma_min),
    )
    write_foliation(tab, m.out / "foliation.csv", m.out / "leaves")
    if tab.failure is not None:
        from .errors import SolverError

        raise SolverError(f"foliation stopped at sigma = {tab.failure[0]:g}: {tab.failure[1]}", trace=tab)
    print(f"{len(tab.sigmas)} leaves written to {m.out / 'foliation.csv'}")
    return 0


def cmd_masses(m: RunManifest):
    from .functionals import mass_report, write_mass_report

    rep = mass_report(m.metric, m.radii, max(m.bandlimit, 2))
    write_mass_report(rep, m.out / "masses.csv")
    for R, f in zip(rep.radii, rep.adm_flux):
        print(f"R={R:g} adm_flux={f:.12g}")
    return 0


def cmd_centers(m: RunManifest):
    from .functionals import adm_center_flux
    from .solver import adm_center_limit, cmc_center_limit, foliate

    if m.metric.mass == 0:
        raise ConfigError("centers need a non-vanishing mass")
    grid = build_grid(m.bandlimit)
    tol = m.tolerances.get("center", 1e-3)
    rows = [(R, *adm_center_flux(m.metric, R, grid)) for R in m.radii]
    write_csv(m.out / "adm_centers.csv", ("radius", "center_x", "center_y", "center_z"), rows)
    result = {"adm": None, "cmc": None}
    if len(m.radii) >= 2:
        adm = adm_center_limit(m.metric, m.radii, tol=tol, grid=grid)
        result["adm"] = {"value": adm.value, "spread": adm.spread, "converged": adm.converged}
    if m.sigma_min is not None and m.sigma_max is not None and m.leaves is not None:
        tab = foliate(m.metric, m.sigma_min, m.sigma_max, m.leaves, grid)
        write_csv(
            m.out / "cmc_centers.csv",
            ("sigma", "center_x", "center_y", "center_z"),
            ((s, *z) for s, z in zip(tab.sigmas, tab.centers)),
        )
        if len(tab.sigmas) >= 3:
            cmc = cmc_center_limit(tab, tol=tol)
            result["cmc"] = {
                "value": cmc.value,
                "spread": cmc.spread,
                "converged": cmc.converged,
                "exponent": cmc.exponent,
            }
    write_json(m.out / "center_limits.json", result)
    for k, v in result.items():
        if v is not None:
            print(f"{k} center {np.asarray(v['value']).tolist()} converged={v['converged']}")
    return 0


def cmd_spectrum(m: RunManifest):
    from .operators import spectrum, stability_operator
    from .surface import surface_geometry

    grid = build_grid(m.bandlimit)
    if m.initial is not None:
        leaf = load_surface(m.initial).with_grid(grid)
    else:
        _need(m, "sigma")
        from .solver import solve_leaf

        leaf = solve_leaf(m.metric, m.sigma, grid)[0]
    sp = spectrum(stability_operator(surface_geometry(leaf, m.metric)), min(m.eigenpairs, grid.ncoef))
    rows = ((i, sp.values[i], int(sp.bands[i]), sp.residuals[i]) for i in range(len(sp)))
    write_csv(m.out / "spectrum.csv", ("index", "eigenvalue", "band_guess_l", "residual"), rows)
    print(f"{len(sp)} eigenvalues of -L written to {m.out / 'spectrum.csv'}")
    return 0


def cmd_verify(m: RunManifest):
    from .checks import run_criteria, verify_model

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        results = verify_model(m.metric, m.bandlimit, m.sigma, m.seed)
        if m.acceptance:
            which = None if m.acceptance is True else m.acceptance
            results += run_criteria(which, L=m.bandlimit)
    for r in results:
        print(r.line())
    rows = ((r.criterion, r.name, r.value, r.tolerance, r.passed, r.known_inconsistent) for r in results)
    write_csv(m.out / "verify.csv", ("criterion", "check", "value", "tolerance", "passed", "known_inconsistent"), rows)
    bad = [r for r in results if not r.passed and not r.known_inconsistent]
    print(f"{len(results) - len(bad)}/{len(results)} checks passed or known-inconsistent")
    return 1 if bad else 0


def cmd_decay(m: RunManifest):
    rep = decay_report(m.metric, m.radii, m.samples)
    keys = list(rep.per_shell[0])
    write_csv(m.out / "decay.csv", ("radius", *keys), ([R, *(s[k] for k in keys)] for R, s in zip(rep.radii, rep.per_shell)))
    write_json(m.out / "decay_overall.json", {"epsilon": rep.epsilon, **rep.overall})
    return 0


_HANDLERS = {
    "solve": cmd_solve,
    "foliate": cmd_foliate,
    "masses": cmd_masses,
    "centers": cmd_centers,
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
    "decay": cmd_decay,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cmcfol", description="CMC foliations of asymptotically flat metrics")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--manifest", required=True, help="run manifest (JSON)")
    p.add_argument("--out", help="output directory (overrides the manifest)")
    p.add_argument("--bandlimit", type=int, help="spherical-harmonic bandlimit L")
    p.add_argument("--sigma-min", type=float, dest="sigma_min")
    p.add_argument("--sigma-max", type=float, dest="sigma_max")
    p.add_argument("--leaves", type=int)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run(command: str, manifest: RunManifest) -> int:
    """Execute ``command``; library errors propagate."""
    return _HANDLERS[command](manifest)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, which matches the config class
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        m = _apply_overrides(load_manifest(args.manifest), args)
        if m.command is not None and m.command != args.command:
            raise ConfigError(f"manifest is for command {m.command!r}, not {args.command!r}")
        return run(args.command, m)
    except CmcfolError as exc:
        print(f"cmcfol: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
