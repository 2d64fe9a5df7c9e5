"""Command-line front end.

Three subcommands: ``design`` sweeps the antenna efficiency exponent and
tabulates the optimal cell geometry, ``gain`` tabulates the best-case
repositioning rate over the same sweep, and ``simulate`` runs the
Monte-Carlo campaign. Sample/CDF data is emitted as CSV, scalar summaries
as JSON, and every run writes a manifest with content digests.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import warnings
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .channel import user_rate
from .design import (NearDegenerateWarning, NoOptimumError, ideal_directivity,
                     solve_edge_angle)
from .params import ScenarioParams
from .placement import Strategy
from .sim import SimConfig, run_simulation

_DEFAULTS = {
    "a": 9.61,
    "b": 0.16,
    "eta_los": 1.0,
    "eta_nlos": 20.0,
    "freq_hz": 2e9,
    "er": 0.6,
    "lambda": 5.0,
    "fixed_n": None,
    "timeslots": 100_000,
    "seed": 0,
    "strategies": "static,sbc,mar,cmp",
    "dmax": 500.0,
    "workers": 1,
    "er_min": 0.0,
    "er_max": 0.9,
    "er_step": 0.05,
}

# argparse dest -> config key ("lambda" is a Python keyword)
_FLAG_KEYS = {
    "a": "a", "b": "b", "eta_los": "eta_los", "eta_nlos": "eta_nlos",
    "freq_hz": "freq_hz", "er": "er", "lam": "lambda", "fixed_n": "fixed_n",
    "timeslots": "timeslots", "seed": "seed", "strategies": "strategies",
    "dmax": "dmax", "workers": "workers", "er_min": "er_min",
    "er_max": "er_max", "er_step": "er_step",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dronecell",
        description="Drone small-cell geometry design and repositioning simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", type=Path, help="flat JSON config; flags override")
        p.add_argument("--scenario-a", type=float, dest="a")
        p.add_argument("--scenario-b", type=float, dest="b")
        p.add_argument("--eta-los", type=float, dest="eta_los")
        p.add_argument("--eta-nlos", type=float, dest="eta_nlos")
        p.add_argument("--freq-hz", type=float, dest="freq_hz")
        p.add_argument("--er", type=float, dest="er")
        p.add_argument("--out", type=Path, default=Path("out"))

    for name, help_text in (("design", "sweep the efficiency exponent, tabulate cell geometry"),
                            ("gain", "sweep the efficiency exponent, tabulate best-case rates")):
        p = sub.add_parser(name, help=help_text)
        add_common(p)
        p.add_argument("--er-min", type=float, dest="er_min")
        p.add_argument("--er-max", type=float, dest="er_max")
        p.add_argument("--er-step", type=float, dest="er_step")

    p = sub.add_parser("simulate", help="run the Monte-Carlo campaign")
    add_common(p)
    p.add_argument("--lambda", type=float, dest="lam",
                   help="mean users per timeslot (Poisson)")
    p.add_argument("--fixed-n", type=int, dest="fixed_n",
                   help="fixed user count overriding the Poisson draw")
    p.add_argument("--timeslots", type=int, dest="timeslots")
    p.add_argument("--seed", type=int, dest="seed")
    p.add_argument("--strategies", type=str, dest="strategies",
                   help="comma list out of static,sbc,mar,cmp")
    p.add_argument("--dmax", type=float, dest="dmax")
    p.add_argument("--workers", type=int, dest="workers",
                   help="parallel workers; never affects the outputs")
    return parser


def _resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS)
    if args.config is not None:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except OSError as e:
            raise ValueError(f"cannot read config file: {e}") from e
        except json.JSONDecodeError as e:
            raise ValueError(f"config file is not valid JSON: {e}") from e
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a flat JSON object")
        unknown = sorted(set(loaded) - set(cfg))
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        cfg.update(loaded)
    for dest, key in _FLAG_KEYS.items():
        val = getattr(args, dest, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _scenario(cfg: dict) -> ScenarioParams:
    return ScenarioParams(a=float(cfg["a"]), b=float(cfg["b"]),
                          eta_los=float(cfg["eta_los"]),
                          eta_nlos=float(cfg["eta_nlos"]),
                          freq_hz=float(cfg["freq_hz"]), e_r=float(cfg["er"]))


def _parse_strategies(value) -> tuple[Strategy, ...]:
    if isinstance(value, str):
        names = [s.strip() for s in value.split(",") if s.strip()]
    else:
        names = list(value)
    try:
        return tuple(Strategy(n) for n in names)
    except ValueError:
        valid = ", ".join(s.value for s in Strategy)
        raise ValueError(f"strategies must be a comma list out of: {valid}") from None


def _er_sweep(cfg: dict) -> list[float]:
    lo, hi, step = float(cfg["er_min"]), float(cfg["er_max"]), float(cfg["er_step"])
    if step <= 0.0:
        raise ValueError(f"er-step must be positive, got {step}")
    if not (0.0 <= lo <= hi < 1.0):
        raise ValueError(f"efficiency sweep must satisfy 0 <= min <= max < 1, got [{lo}, {hi}]")
    n = int(round((hi - lo) / step)) + 1
    values = [round(lo + i * step, 12) for i in range(n)]
    return [v for v in values if v < 1.0]


class _OutputSet:
    """Tracks emitted files so a failed run leaves nothing behind."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.paths: list[Path] = []

    def open_csv(self, name: str):
        path = self.out_dir / name
        self.paths.append(path)
        return path

    def write_json(self, name: str, payload: dict) -> None:
        path = self.out_dir / name
        self.paths.append(path)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def cleanup(self) -> None:
        for p in self.paths:
            p.unlink(missing_ok=True)

    def manifest(self, command: str, cfg: dict) -> None:
        entries = [{"path": p.name, "sha256": _sha256(p)}
                   for p in sorted(self.paths, key=lambda p: p.name)]
        payload = {
            "artifact_version": __version__,
            "command": command,
            "created_utc": datetime.now(timezone.utc).isoformat(),
            "seed": cfg.get("seed"),
            "config": cfg,
            "outputs": entries,
        }
        path = self.out_dir / "manifest.json"
        self.paths.append(path)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _solve_row(scenario: ScenarioParams):
    """Solve one sweep row; returns (theta or None, status)."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NearDegenerateWarning)
        try:
            theta = solve_edge_angle(scenario)
        except NoOptimumError:
            return None, "no_optimum"
    degenerate = any(issubclass(w.category, NearDegenerateWarning) for w in caught)
    return theta, ("near_degenerate" if degenerate else "ok")


def cmd_design(cfg: dict, out: _OutputSet) -> None:
    base = _scenario(cfg)
    path = out.open_csv("design.csv")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["e_r", "theta_edge_deg", "ideal_directivity_db",
                    "altitude_over_dmax", "status"])
        for er in _er_sweep(cfg):
            theta, status = _solve_row(base.with_efficiency(er))
            if theta is None:
                w.writerow([er, "", "", "", status])
            else:
                w.writerow([er, theta,
                            10.0 * math.log10(ideal_directivity(theta)),
                            math.tan(math.radians(theta)), status])
    out.manifest("design", cfg)


def cmd_gain(cfg: dict, out: _OutputSet) -> None:
    base = _scenario(cfg)
    path = out.open_csv("gain.csv")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["e_r", "theta_edge_deg", "max_rate_at_kappa0",
                    "rate_at_kappa1", "status"])
        for er in _er_sweep(cfg):
            sc = base.with_efficiency(er)
            theta, status = _solve_row(sc)
            if theta is None:
                w.writerow([er, "", "", "", status])
            else:
                w.writerow([er, theta, user_rate(0.0, theta, sc),
                            user_rate(1.0, theta, sc), status])
    out.manifest("gain", cfg)


def cmd_simulate(cfg: dict, out: _OutputSet) -> None:
    scenario = _scenario(cfg)
    fixed_n = cfg["fixed_n"]
    sim_config = SimConfig(
        scenario=scenario,
        lam=float(cfg["lambda"]),
        fixed_n=None if fixed_n is None else int(fixed_n),
        n_timeslots=int(cfg["timeslots"]),
        seed=int(cfg["seed"]),
        strategies=_parse_strategies(cfg["strategies"]),
        d_max=float(cfg["dmax"]),
    )
    workers = int(cfg["workers"])
    stats = run_simulation(sim_config, workers=workers)

    for s in sim_config.strategies:
        st = stats.per_strategy[s]
        _write_cdf_csv(out.open_csv(f"rate_cdf_{s.value}.csv"),
                       "rate_bits_per_symbol", st.rate_samples)
        _write_cdf_csv(out.open_csv(f"travel_cdf_{s.value}.csv"),
                       "distance_over_dmax", st.travel_samples)

    theta = stats.geometry.theta_edge_deg
    summary = {
        "cell": {
            "theta_edge_deg": theta,
            "altitude_over_dmax": math.tan(math.radians(theta)),
            "e_r": scenario.e_r,
            "d_max": sim_config.d_max,
            "max_rate_at_kappa0": user_rate(0.0, theta, scenario),
        },
        "run": {
            "lambda": None if sim_config.fixed_n is not None else sim_config.lam,
            "fixed_n": sim_config.fixed_n,
            "n_timeslots": stats.n_timeslots,
            "n_users_total": stats.n_users_total,
            "seed": sim_config.seed,
        },
        "strategies": {
            s.value: {
                "mean_rate": _jsonable(stats.per_strategy[s].mean_rate),
                "p5_rate": _jsonable(stats.per_strategy[s].p5_rate),
                "frac_rate_above_1": _jsonable(stats.per_strategy[s].frac_rate_above_1),
                "frac_kappa_above_1": _jsonable(stats.per_strategy[s].frac_kappa_above_1),
                "mean_travel": _jsonable(stats.per_strategy[s].mean_travel),
                "n_user_samples": stats.per_strategy[s].n_user_samples,
            }
            for s in sim_config.strategies
        },
    }
    out.write_json("summary.json", summary)
    out.manifest("simulate", cfg)


def _jsonable(x: float):
    # an all-empty run has no rate samples; NaN is not valid JSON
    return None if math.isnan(x) else x


def _write_cdf_csv(path: Path, value_column: str, sorted_samples) -> None:
    n = len(sorted_samples)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([value_column, "cdf"])
        for i, v in enumerate(sorted_samples):
            w.writerow([float(v), (i + 1) / n])


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_set = None
    try:
        cfg = _resolve_config(args)
        args.out.mkdir(parents=True, exist_ok=True)
        out_set = _OutputSet(args.out)
        if args.command == "design":
            cmd_design(cfg, out_set)
        elif args.command == "gain":
            cmd_gain(cfg, out_set)
        else:
            cmd_simulate(cfg, out_set)
    except (ValueError, NoOptimumError, OSError) as e:
        if out_set is not None:
            out_set.cleanup()
        msg = " ".join(str(e).split())
        print(f"error: {msg}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
