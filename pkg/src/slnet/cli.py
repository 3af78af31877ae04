"""Command-line front end driven by TOML experiment files.

Example file::

    seed = 0

    [topology]
    kind = "ring"          # ring | complete | edges
    n = 6
    s = 2

    [params]
    mu = 1.0
    omega = 1.0            # scalar or list of length n
    c = 0.02

    [initial]
    mode = "polar"         # polar | explicit
    r = 0.5
    theta_range = [0.3, 2.8]

    [integrator]
    scheme = "rk4"         # rk4 | rkf45
    dt = 1e-3

    [run]
    t_end = 200.0
    sample_every = 0.01

Any key can be overridden with ``--set section.key=value`` (value parsed as TOML).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import certificates, hopf, scan, spectral
from .dynamics import RK4, RKF45, SystemParams, integrate, polar_state, random_polar_state
from .errors import SlnetError
from .graph import build_complete, build_ring, load_edge_list
from .metrics import sync_report, write_metrics_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class ConfigError(Exception):
    pass


# section -> {key: default}; None marks "required when used"
SCHEMA: dict = {
    "seed": 0,
    "topology": {"kind": "ring", "n": None, "s": 1, "path": None},
    "params": {"mu": None, "omega": 1.0, "c": 0.0},
    "initial": {
        "mode": "polar", "r": 0.5, "r_range": None, "theta_range": [0.0, 6.283185307179586],
        "re": None, "im": None,
    },
    "integrator": {
        "scheme": "rk4", "dt": 1e-3, "atol": 1e-9, "rtol": 1e-9, "h_min": 1e-8, "h_max": 0.1,
    },
    "run": {
        "t_end": 200.0, "sample_every": 0.01, "record_from": 0.0,
        "tail_fraction": 0.2, "sync_tol": 1e-4, "polar_columns": False,
    },
    "scan": {
        "mu_grid": None, "mu_min": -0.05, "mu_max": 0.15, "mu_step": 0.01,
        "transient_T": 200.0, "measure_T": 50.0, "growth_times": 50.0,
        "scale": 1e-3, "synchronous": False, "observable_node": 1, "observable_coord": "x",
        "dt": 0.02, "sample_every": 0.05, "workers": 1,
    },
    "output": {"dir": "out"},
}


def _defaults() -> dict:
    return {k: (dict(v) if isinstance(v, dict) else v) for k, v in SCHEMA.items()}


def _merge(cfg: dict, raw: dict, where: str = "") -> None:
    for key, value in raw.items():
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {where}{key!r}")
        if isinstance(SCHEMA[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{key!r} must be a section")
            for sub, v in value.items():
                if sub not in SCHEMA[key]:
                    raise ConfigError(f"unknown key '{key}.{sub}'")
                cfg[key][sub] = v
        else:
            cfg[key] = value


def _parse_override(text: str) -> tuple[list[str], Any]:
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    try:
        value = tomllib.loads(f"v = {raw.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw.strip()  # bare strings such as scheme=rkf45
    return key.strip().split("."), value


def load_config(path: Optional[str], overrides: Sequence[str] = (), seed: Optional[int] = None) -> dict:
    cfg = _defaults()
    if path is not None:
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        _merge(cfg, raw)
    for text in overrides:
        parts, value = _parse_override(text)
        if len(parts) == 1:
            _merge(cfg, {parts[0]: value})
        elif len(parts) == 2:
            _merge(cfg, {parts[0]: {parts[1]: value}})
        else:
            raise ConfigError(f"override key {'.'.join(parts)!r} is nested too deeply")
    if seed is not None:
        cfg["seed"] = seed
    if not isinstance(cfg["seed"], int) or cfg["seed"] < 0:
        raise ConfigError("seed must be a non-negative integer")
    return cfg


def _require(section: dict, key: str, name: str):
    if section.get(key) is None:
        raise ConfigError(f"missing required key '{name}.{key}'")
    return section[key]


def build_topology(cfg: dict):
    t = cfg["topology"]
    kind = t["kind"]
    if kind == "ring":
        return build_ring(int(_require(t, "n", "topology")), int(t["s"]))
    if kind == "complete":
        return build_complete(int(_require(t, "n", "topology")))
    if kind == "edges":
        return load_edge_list(_require(t, "path", "topology"), t.get("n"))
    raise ConfigError(f"unknown topology kind {kind!r}")


def build_params(cfg: dict, mu: Optional[float] = None) -> SystemParams:
    p = cfg["params"]
    if mu is None:
        mu = float(_require(p, "mu", "params"))
    omega = p["omega"]
    omega = [float(w) for w in omega] if isinstance(omega, list) else float(omega)
    return SystemParams(mu, omega, float(p["c"]), build_topology(cfg))


def build_initial(cfg: dict, n: int) -> np.ndarray:
    ic = cfg["initial"]
    if ic["mode"] == "explicit":
        re = np.asarray(_require(ic, "re", "initial"), dtype=float)
        im = np.asarray(ic["im"] if ic["im"] is not None else np.zeros_like(re), dtype=float)
        if re.shape != (n,) or im.shape != (n,):
            raise ConfigError(f"explicit initial state needs {n} real and imaginary parts")
        return re + 1j * im
    if ic["mode"] != "polar":
        raise ConfigError(f"unknown initial mode {ic['mode']!r}")
    seed = cfg["seed"]
    theta_range = tuple(float(x) for x in ic["theta_range"])
    if ic["r_range"] is not None:
        lo, hi = (float(x) for x in ic["r_range"])
        rng = np.random.Generator(np.random.PCG64(seed))
        r = rng.uniform(lo, hi, n)
        theta = rng.uniform(*theta_range, n)
        return polar_state(r, theta)
    return random_polar_state(n, float(ic["r"]), theta_range, seed)


def build_scheme(section: dict):
    name = str(section["scheme"]).lower()
    if name == "rk4":
        return RK4(float(section["dt"]))
    if name == "rkf45":
        return RKF45(float(section["atol"]), float(section["rtol"]), h_min=float(section["h_min"]),
                     h_max=float(section["h_max"]))
    raise ConfigError(f"unknown scheme {name!r}")


def _out_dir(cfg: dict, override: Optional[str]) -> Path:
    out = Path(override if override is not None else cfg["output"]["dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _simulate(cfg: dict, params: SystemParams, z0: np.ndarray):
    r = cfg["run"]
    traj = integrate(z0, params, float(r["t_end"]), build_scheme(cfg["integrator"]),
                     float(r["sample_every"]), float(r["record_from"]))
    rep = sync_report(traj, float(r["tail_fraction"]), float(r["sync_tol"]))
    return traj, rep


def cmd_simulate(cfg: dict, args) -> int:
    params = build_params(cfg)
    z0 = build_initial(cfg, params.n_nodes)
    traj, rep = _simulate(cfg, params, z0)
    out = _out_dir(cfg, args.out)
    traj.to_csv(out / "trajectory.csv", polar=bool(cfg["run"]["polar_columns"]))
    write_metrics_csv(traj, out / "metrics.csv")
    text = rep.to_text()
    (out / "sync_report.txt").write_text(text)
    print(text, end="")
    return EXIT_OK


def cmd_certify(cfg: dict, args) -> int:
    params = build_params(cfg)
    z0 = build_initial(cfg, params.n_nodes)
    text = "".join(c.to_text() + "\n" for c in certificates.check_all(z0, params))
    if args.validate:
        _, rep = _simulate(cfg, params, z0)
        text += "[Validation]\n" + rep.to_text()
    out = _out_dir(cfg, args.out)
    (out / "certificates.txt").write_text(text)
    print(text, end="")
    return EXIT_OK


def cmd_spectrum(cfg: dict, args) -> int:
    params = build_params(cfg)
    report = spectral.compute_blocks_M(params)
    out = _out_dir(cfg, args.out)
    report.write_csv(out / "spectrum.csv")
    text = report.table.to_text() if report.table is not None else ""
    print(text, end="")
    return EXIT_OK


def cmd_critical_values(cfg: dict, args) -> int:
    t, p = cfg["topology"], cfg["params"]
    n = args.n if args.n is not None else _require(t, "n", "topology")
    s = args.s if args.s is not None else t["s"]
    c = args.c if args.c is not None else p["c"]
    table = spectral.classify_criticalities(int(n), int(s), float(c))
    if args.out is not None:
        table.write_markers_csv(_out_dir(cfg, args.out) / "markers.csv")
    print(table.to_text(), end="")
    return EXIT_OK


def cmd_hopf(cfg: dict, args) -> int:
    omega = args.omega if args.omega is not None else cfg["params"]["omega"]
    if isinstance(omega, list):
        raise ConfigError("hopf needs a scalar omega")
    coeffs = hopf.normal_form(float(omega), method=args.method)
    if args.out is not None:
        (_out_dir(cfg, args.out) / "hopf.txt").write_text(coeffs.to_text())
    print(coeffs.table(), end="")
    return EXIT_OK


def _scan_config(cfg: dict) -> scan.ScanConfig:
    sc = cfg["scan"]
    if sc["mu_grid"] is not None:
        grid = [float(m) for m in sc["mu_grid"]]
    else:
        lo, hi, step = float(sc["mu_min"]), float(sc["mu_max"]), float(sc["mu_step"])
        if step <= 0:
            raise ConfigError("scan.mu_step must be positive")
        count = int(np.floor((hi - lo) / step + 1e-9)) + 1
        grid = list(np.round(lo + step * np.arange(count), 12))
    template = build_params(cfg, mu=0.0)
    growth = sc["growth_times"]
    return scan.ScanConfig(
        mu_grid=grid,
        params=template,
        transient_T=float(sc["transient_T"]),
        measure_T=float(sc["measure_T"]),
        perturbation=scan.Perturbation(float(sc["scale"]), cfg["seed"], bool(sc["synchronous"])),
        observable_node=int(sc["observable_node"]),
        observable_coord=str(sc["observable_coord"]),
        scheme=RK4(float(sc["dt"])),
        sample_every=float(sc["sample_every"]),
        growth_times=None if growth is None or growth == 0 else float(growth),
        workers=int(sc["workers"]),
    )


def cmd_scan(cfg: dict, args) -> int:
    result = scan.run_scan(_scan_config(cfg))
    out = _out_dir(cfg, args.out)
    result.write(out)
    for p in result.points:
        print(f"mu = {p.mu:.6g}  amplitude = {p.amplitude:.6g}  {p.sync_classification}")
    try:
        print(f"onset estimate = {scan.onset_estimate(result.points):.6g}")
    except SlnetError as exc:
        print(f"onset estimate unavailable: {exc}")
    if result.table is not None:
        print(result.table.to_text(), end="")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "certify": cmd_certify,
    "spectrum": cmd_spectrum,
    "critical-values": cmd_critical_values,
    "hopf": cmd_hopf,
    "scan": cmd_scan,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML experiment file")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides output.dir)")
    common.add_argument("--seed", type=int, help="seed for every random draw")
    common.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="SECTION.KEY=VALUE", help="override a config key (repeatable)")

    parser = argparse.ArgumentParser(prog="slnet", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="integrate and write trajectory + sync report")
    cert = sub.add_parser("certify", parents=[common], help="evaluate the sufficient conditions")
    cert.add_argument("--validate", action="store_true", help="also run the confirming simulation")
    sub.add_parser("spectrum", parents=[common], help="block-circulant Jacobian spectrum of a ring")
    crit = sub.add_parser("critical-values", parents=[common], help="critical mu values of a ring")
    crit.add_argument("--n", "-N", type=int, dest="n")
    crit.add_argument("--s", "-s", type=int, dest="s")
    crit.add_argument("--c", "-c", type=float, dest="c")
    hp = sub.add_parser("hopf", parents=[common], help="normal-form coefficients at mu = 0")
    hp.add_argument("--omega", type=float)
    hp.add_argument("--method", choices=["analytic", "finite_difference"], default="analytic")
    sub.add_parser("scan", parents=[common], help="sweep mu along the synchronous branch")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = load_config(args.config, args.overrides, args.seed)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, ValueError, TypeError, KeyError) as exc:
        # parameter validation errors derive from ValueError
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SlnetError, RuntimeError, ArithmeticError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
