"""Command-line front end.

Exit codes: 0 success, 2 bad arguments, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import channel, noise_process, spectral, waterfill
from .errors import MemchanError, QuadratureError

EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    mu: float = 0.5
    sigma: float = 1.0
    N: float = 8.0
    n: tuple = (1024,)
    J: int = 32
    shots: int = 100_000
    seed: int = 0
    epsilon: float = 1e-3
    max_steps: int = noise_process.DEFAULT_MAX_STEPS
    grid_mu: tuple = (0.0, 1.0, 21)
    grid_sigma: tuple = (0.0, 8.0, 33)
    d1: tuple = (2.0, 0.0, 3.0)
    d2: tuple = (-1.0, 0.0, 0.5)
    tol: float = 1e-10
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if not self.tol > 0:
            raise UsageError(f"--tol must be > 0, got {self.tol}")
        if not self.epsilon > 0:
            raise UsageError(f"--epsilon must be > 0, got {self.epsilon}")
        for name in ("grid_mu", "grid_sigma"):
            lo, hi, count = getattr(self, name)
            if count < 1:
                raise UsageError(f"--{name.replace('_', '-')} count must be >= 1")
        if any(k < 1 for k in self.n):
            raise UsageError("--n values must be >= 1")
        if self.shots < 1 or self.J < 1:
            raise UsageError("--shots and --J must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        kwargs = {}
        for f in fields(cls):
            if f.name in d:
                v = d[f.name]
                kwargs[f.name] = tuple(v) if isinstance(v, list) else v
        return cls(**kwargs)


def grid(spec: tuple) -> np.ndarray:
    lo, hi, count = spec
    if count == 1:
        return np.array([lo])
    return np.linspace(lo, hi, int(count))


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "" if math.isnan(x) else f"{float(x):.10g}"
    return "" if x is None else str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return None if math.isnan(x) else float(x)
    return x


def render(cfg: RunConfig, records: list[dict], diagnostics: dict | None = None) -> str:
    if cfg.format == "json":
        doc = {"command": cfg.command, "config": cfg.to_dict(), "records": records}
        if diagnostics:
            doc["diagnostics"] = diagnostics
        return json.dumps(_jsonable(doc), indent=2) + "\n"
    buf = io.StringIO()
    if records:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(records[0].keys())
        for rec in records:
            writer.writerow(_fmt(v) for v in rec.values())
    return buf.getvalue()


def cmd_capacity(cfg: RunConfig):
    params = waterfill.ChannelParams(cfg.mu, cfg.sigma, cfg.N)
    sol = waterfill.solve_memory(params, cfg.tol)
    rec = {
        "mu": cfg.mu, "sigma": cfg.sigma, "N": cfg.N, "capacity": sol.capacity,
        "water_level": sol.water_level, "lagrange_L": sol.lagrange, "region": sol.region,
    }
    return [rec], {"constraint_residual": sol.residual, "crossing": sol.crossing}


def cmd_sweep(cfg: RunConfig):
    mus, sigmas = grid(cfg.grid_mu), grid(cfg.grid_sigma)
    for name, g_, lo, hi in (("mu", mus, 0.0, 1.0), ("sigma", sigmas, 0.0, math.inf)):
        if g_.min() < lo or g_.max() > hi:
            raise UsageError(f"--grid-{name} must lie within [{lo}, {hi}]")
    res = waterfill.sweep(mus, sigmas, cfg.N, cfg.tol)
    records = []
    for j, s in enumerate(sigmas):
        for i, m in enumerate(mus):
            records.append({"mu": m, "sigma": s, "N": cfg.N, "capacity": res.capacity[i, j]})
    failures = [
        {"mu": mus[i], "sigma": sigmas[j], "error": msg} for (i, j), msg in sorted(res.failures.items())
    ]
    for f in failures:
        print(f"warning: cell mu={f['mu']:g} sigma={f['sigma']:g} failed: {f['error']}", file=sys.stderr)
    return records, {"failures": failures}


def cmd_spectrum(cfg: RunConfig):
    n = cfg.n[0]
    m = spectral.eigenvalues(spectral.build_M(n, cfg.mu))
    spec = spectral.noise_spectrum(n, cfg.mu, cfg.sigma)
    records = [{"j": j + 1, "eigenvalue": m[j], "variance": spec.variances[j]} for j in range(n)]
    return records, {"mean_variance": spec.mean(), "trace": float(m.sum())}


def cmd_szego(cfg: RunConfig):
    records = [
        {"n": n, "mu": cfg.mu, "sigma": cfg.sigma, "deviation": spectral.szego_deviation(n, cfg.mu, cfg.sigma)}
        for n in cfg.n
    ]
    return records, None


def _dist(t: tuple) -> noise_process.GaussianNoiseDist:
    re, im, var = t
    return noise_process.GaussianNoiseDist(complex(re, im), var)


def cmd_forget(cfg: RunConfig):
    params = noise_process.MarkovParams(cfg.mu, cfg.sigma)
    d1, d2 = _dist(cfg.d1), _dist(cfg.d2)
    nu = noise_process.forgetfulness_horizon(params, d1, d2, cfg.epsilon, cfg.max_steps)
    forgetful = not isinstance(nu, noise_process.NotForgetful)
    shown = nu if forgetful else min(cfg.max_steps, 50)
    profile = noise_process.distance_profile(params, d1, d2, shown)
    rec = {
        "mu": cfg.mu, "sigma": cfg.sigma, "epsilon": cfg.epsilon,
        "horizon": nu if forgetful else "NotForgetful",
        "forgetful": forgetful,
        "last_distance": profile[-1] if forgetful else nu.last_distance,
    }
    return [rec], {"distances": list(profile)}


def cmd_bounds(cfg: RunConfig):
    params = waterfill.ChannelParams(cfg.mu, cfg.sigma, cfg.N)
    n = cfg.n[0]
    lower, upper = waterfill.capacity_bounds(params, n, cfg.J)
    cap = waterfill.capacity_memory(params, cfg.tol)
    rec = {
        "n": n, "J": cfg.J, "mu": cfg.mu, "sigma": cfg.sigma, "N": cfg.N,
        "lower": lower, "capacity": cap, "upper": upper, "sandwiched": lower <= cap <= upper,
    }
    return [rec], None


def cmd_simulate(cfg: RunConfig):
    n = cfg.n[0]
    params = noise_process.MarkovParams(cfg.mu, cfg.sigma)
    state = channel.GaussianState.vacuum(n)
    mc = channel.monte_carlo_channel(params, state, n, cfg.shots, cfg.seed)
    ref = channel.apply_additive_noise(state, channel.stationary_noise_cov(n, cfg.mu, cfg.sigma))
    zm, zc = mc.z_scores(ref)
    records = []
    for i in range(2 * n):
        records.append({"kind": "mean", "i": i, "j": "", "empirical": mc.mean[i],
                        "analytic": ref.mean[i], "std_error": mc.mean_se[i], "z": zm[i]})
    for i in range(2 * n):
        for j in range(i, 2 * n):
            records.append({"kind": "cov", "i": i, "j": j, "empirical": mc.cov[i, j],
                            "analytic": ref.cov[i, j], "std_error": mc.cov_se[i, j], "z": zc[i, j]})
    return records, {"max_z": float(max(zm.max(), zc.max())), "shots": cfg.shots}


COMMANDS = {
    "capacity": cmd_capacity,
    "sweep": cmd_sweep,
    "spectrum": cmd_spectrum,
    "szego": cmd_szego,
    "forget": cmd_forget,
    "bounds": cmd_bounds,
    "simulate": cmd_simulate,
}


def _grid_spec(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be min:max:count, got {text!r}")
    try:
        return (float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _dist_spec(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"distribution must be mean_re,mean_im,var, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text: str):
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    defaults = RunConfig("capacity")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mu", type=float, default=defaults.mu)
    common.add_argument("--sigma", type=float, default=defaults.sigma)
    common.add_argument("--N", type=float, default=defaults.N, help="mean photon number per mode")
    common.add_argument("--n", type=_int_list, default=defaults.n, help="modes (comma list for szego)")
    common.add_argument("--J", type=int, default=defaults.J, help="number of blocks")
    common.add_argument("--shots", type=int, default=defaults.shots)
    common.add_argument("--seed", type=int, default=defaults.seed)
    common.add_argument("--epsilon", type=float, default=defaults.epsilon)
    common.add_argument("--max-steps", type=int, default=defaults.max_steps)
    common.add_argument("--grid-mu", type=_grid_spec, default=defaults.grid_mu, metavar="MIN:MAX:COUNT")
    common.add_argument("--grid-sigma", type=_grid_spec, default=defaults.grid_sigma, metavar="MIN:MAX:COUNT")
    common.add_argument("--d1", type=_dist_spec, default=defaults.d1, metavar="RE,IM,VAR")
    common.add_argument("--d2", type=_dist_spec, default=defaults.d2, metavar="RE,IM,VAR")
    common.add_argument("--tol", type=float, default=defaults.tol)
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=defaults.format)

    parser = argparse.ArgumentParser(
        prog="memchan", description="Capacity of the Markov-correlated additive noise channel."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "capacity": "capacity at one (mu, sigma, N)",
        "sweep": "capacity over a mu x sigma grid",
        "spectrum": "eigenvalues of M and collective noise variances",
        "szego": "distance between finite-n spectrum and the asymptotic symbol",
        "forget": "forgetfulness horizon for two initial noise laws",
        "bounds": "block lower/upper capacity bounds",
        "simulate": "Monte Carlo check of the channel output covariance",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command, mu=args.mu, sigma=args.sigma, N=args.N, n=args.n, J=args.J,
            shots=args.shots, seed=args.seed, epsilon=args.epsilon, max_steps=args.max_steps,
            grid_mu=args.grid_mu, grid_sigma=args.grid_sigma, d1=args.d1, d2=args.d2,
            tol=args.tol, out=args.out, format=args.format,
        )
        records, diagnostics = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"memchan {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, AssertionError) as exc:
        print(f"memchan {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (MemchanError, ValueError) as exc:
        print(f"memchan {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    text = render(cfg, records, diagnostics)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if diagnostics and diagnostics.get("failures"):
        return EXIT_NUMERIC
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
