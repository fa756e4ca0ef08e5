"""Command-line front end.

Subcommands wire the library into a file pipeline: generate writes a channel
realization (CTF), decompose turns one into an eigenvalue summary, precode
emits a precoded grid plus energy accounting, simulate runs BER sweeps,
stats emits second-order statistics and stationarity metrics, complexity
prints operation-count estimates.  Every run re-emits its effective
configuration and a manifest naming the seed and output files, so any result
can be reproduced byte-for-byte from those two files.

Exit codes: 0 success, 1 configuration/validation problem, 2 file or I/O
problem, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .channel import (
    ScenarioConfig,
    generate_channel,
    load_ctf,
    save_ctf,
    to_kernel,
)
from .errors import ConfigError, HogmtError, NumericalError, ValidationError, FormatError
from .kernels import hogmt_decompose, TruncationPolicy
from .linksim import (
    get_scheme,
    modulate,
    parse_precoder,
    run_ber,
)
from .precoding import energy_report, hogmt_precode
from .stats import (
    GaussianPrototype,
    atomic_kernel,
    cmd,
    decompose_atomic,
    stationarity_interval,
    stats_from_decomp,
    tf_transfer,
)

__all__ = [
    "RunConfig",
    "ComplexityEstimate",
    "parse_config",
    "complexity_estimate",
    "main",
]

_SEED_CLI_BITS = 20
_SEED_STATS_MEMBER = 21

_SCENARIO_DEFAULTS = {
    "users": 4,
    "tx_antennas": 4,
    "time_symbols": 256,
    "min_delay_taps": 1,
    "max_delay_taps": 4,
    "mode": "wssus",
    "block_len": 64,
    "doppler_max": 0.05,
    "doppler_drift": 0.0,
    "spatial_corr": 0.0,
}
_SIM_DEFAULTS = {
    "precoder": "hogmt",
    "fraction": 1.0,
    "modulation": "qam16",
    "snr_db": [0.0, 5.0, 10.0, 15.0, 20.0],
    "min_bits": 100_000,
    "seed": 12345,
}
_STATS_DEFAULTS = {
    "d0": 0.2,
    "window": 8,
    "ensemble": 1,
    "proto_spread_t": 4.0,
    "proto_spread_f": 1.0,
}
_OUT_DEFAULTS = {"dir": "out"}


@dataclass(frozen=True)
class RunConfig:
    """Fully validated run configuration (defaults applied)."""

    scenario: ScenarioConfig
    precoder: str
    fraction: float
    modulation: str
    snr_db: tuple[float, ...]
    min_bits: int
    seed: int
    d0: float
    window: int
    ensemble: int
    proto_spread_t: float
    proto_spread_f: float
    out_dir: str

    def to_mapping(self) -> dict:
        """Schema-shaped mapping that reparses to an identical RunConfig."""
        sc = self.scenario
        return {
            "scenario": {
                "users": sc.users,
                "tx_antennas": sc.tx_antennas,
                "time_symbols": sc.time_symbols,
                "min_delay_taps": sc.min_delay_taps,
                "max_delay_taps": sc.max_delay_taps,
                "mode": sc.mode,
                "block_len": sc.block_len,
                "doppler_max": sc.doppler_max,
                "doppler_drift": sc.doppler_drift,
                "spatial_corr": sc.spatial_corr,
            },
            "sim": {
                "precoder": self.precoder,
                "fraction": self.fraction,
                "modulation": self.modulation,
                "snr_db": list(self.snr_db),
                "min_bits": self.min_bits,
                "seed": self.seed,
            },
            "stats": {
                "d0": self.d0,
                "window": self.window,
                "ensemble": self.ensemble,
                "proto_spread_t": self.proto_spread_t,
                "proto_spread_f": self.proto_spread_f,
            },
            "out": {"dir": self.out_dir},
        }


def _want_int(section: str, key: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ConfigError(f"{section}.{key} must be an integer, got {value!r}")
    return int(value)


def _want_float(section: str, key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, np.floating)):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    return float(value)


def _want_str(section: str, key: str, value) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{section}.{key} must be a string, got {value!r}")
    return value


def _want_float_list(section: str, key: str, value) -> list[float]:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return [float(value)]
    if not isinstance(value, list) or not value:
        raise ConfigError(
            f"{section}.{key} must be a number or non-empty list of numbers, "
            f"got {value!r}"
        )
    return [_want_float(section, key, v) for v in value]


def _section(raw: dict, name: str) -> dict:
    sec = raw.pop(name, None)
    if sec is None:
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"config section {name!r} must be a mapping")
    return dict(sec)


def _reject_unknown(section: str, leftover: dict) -> None:
    if leftover:
        key = sorted(leftover)[0]
        raise ConfigError(f"unknown config key {section}.{key}")


def config_from_mapping(raw) -> RunConfig:
    """Validate a parsed configuration mapping and apply defaults."""
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("top-level config must be a mapping of sections")
    raw = dict(raw)
    scen_raw = _section(raw, "scenario")
    sim_raw = _section(raw, "sim")
    stats_raw = _section(raw, "stats")
    out_raw = _section(raw, "out")
    if raw:
        name = sorted(raw)[0]
        raise ConfigError(f"unknown config section {name!r}")

    scen_kwargs = {}
    for key, default in _SCENARIO_DEFAULTS.items():
        value = scen_raw.pop(key, default)
        if key == "mode":
            scen_kwargs[key] = _want_str("scenario", key, value)
        elif isinstance(default, int):
            scen_kwargs[key] = _want_int("scenario", key, value)
        else:
            scen_kwargs[key] = _want_float("scenario", key, value)
    _reject_unknown("scenario", scen_raw)
    try:
        scenario = ScenarioConfig(**scen_kwargs)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc

    precoder = _want_str("sim", "precoder", sim_raw.pop("precoder", _SIM_DEFAULTS["precoder"]))
    fraction = _want_float("sim", "fraction", sim_raw.pop("fraction", _SIM_DEFAULTS["fraction"]))
    modulation = _want_str(
        "sim", "modulation", sim_raw.pop("modulation", _SIM_DEFAULTS["modulation"])
    )
    snr_db = _want_float_list("sim", "snr_db", sim_raw.pop("snr_db", list(_SIM_DEFAULTS["snr_db"])))
    min_bits = _want_int("sim", "min_bits", sim_raw.pop("min_bits", _SIM_DEFAULTS["min_bits"]))
    seed = _want_int("sim", "seed", sim_raw.pop("seed", _SIM_DEFAULTS["seed"]))
    _reject_unknown("sim", sim_raw)
    try:
        parse_precoder(precoder)
        get_scheme(modulation)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
    if not (0.0 < fraction <= 1.0):
        raise ConfigError(f"sim.fraction must be in (0, 1], got {fraction}")
    if min_bits < 10_000:
        raise ConfigError(f"sim.min_bits must be >= 10000, got {min_bits}")
    if not (0 <= seed < 2**64):
        raise ConfigError(f"sim.seed must fit in 64 bits, got {seed}")

    d0 = _want_float("stats", "d0", stats_raw.pop("d0", _STATS_DEFAULTS["d0"]))
    window = _want_int("stats", "window", stats_raw.pop("window", _STATS_DEFAULTS["window"]))
    ensemble = _want_int(
        "stats", "ensemble", stats_raw.pop("ensemble", _STATS_DEFAULTS["ensemble"])
    )
    proto_t = _want_float(
        "stats", "proto_spread_t",
        stats_raw.pop("proto_spread_t", _STATS_DEFAULTS["proto_spread_t"]),
    )
    proto_f = _want_float(
        "stats", "proto_spread_f",
        stats_raw.pop("proto_spread_f", _STATS_DEFAULTS["proto_spread_f"]),
    )
    _reject_unknown("stats", stats_raw)
    if not (0.0 < d0 <= 1.0):
        raise ConfigError(f"stats.d0 must be in (0, 1], got {d0}")
    if window < 2:
        raise ConfigError(f"stats.window must be >= 2, got {window}")
    if window > scenario.time_symbols:
        raise ConfigError(
            f"stats.window must be <= scenario.time_symbols, got {window} > "
            f"{scenario.time_symbols}"
        )
    if ensemble < 1:
        raise ConfigError(f"stats.ensemble must be >= 1, got {ensemble}")
    if proto_t <= 0.0:
        raise ConfigError(f"stats.proto_spread_t must be > 0, got {proto_t}")
    if proto_f <= 0.0:
        raise ConfigError(f"stats.proto_spread_f must be > 0, got {proto_f}")

    out_dir = _want_str("out", "dir", out_raw.pop("dir", _OUT_DEFAULTS["dir"]))
    _reject_unknown("out", out_raw)

    return RunConfig(
        scenario=scenario,
        precoder=precoder,
        fraction=fraction,
        modulation=modulation,
        snr_db=tuple(snr_db),
        min_bits=min_bits,
        seed=seed,
        d0=d0,
        window=window,
        ensemble=ensemble,
        proto_spread_t=proto_t,
        proto_spread_f=proto_f,
        out_dir=out_dir,
    )


def parse_config(path) -> RunConfig:
    """Load and validate a YAML configuration file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
    return config_from_mapping(raw)


@dataclass(frozen=True)
class ComplexityEstimate:
    """Operation-count estimates of the three precoding strategies."""

    users: int
    tx_antennas: int
    time_symbols: int
    hogmt_flatten: float
    hogmt_hosvd: float
    dpc: float

    def rows(self) -> list[tuple[str, float]]:
        return [
            ("hogmt_flatten", self.hogmt_flatten),
            ("hogmt_hosvd", self.hogmt_hosvd),
            ("dpc", self.dpc),
        ]


def complexity_estimate(l_u: int, l_up: int, l_t: int) -> ComplexityEstimate:
    """Closed-form operation counts for the three precoding strategies.

    hogmt_flatten: SVD of the flattened kernel, L_u * L_u'^2 * L_t^3.
    hogmt_hosvd: higher-order SVD route, ((L_u + L_u' + 2 L_t)/4)^5 +
    L_u * L_u' * L_t^2.  dpc: successive encoding with per-order search,
    L_t * ((L_u L_u')^3.5 + L_u L_u'^2) * L_u'!, factorial in the antenna
    count.  Assumes at least as many users as transmit antennas; if not, a
    warning is emitted and the counts are still computed.
    """
    for name, v in (("users", l_u), ("tx_antennas", l_up), ("time_symbols", l_t)):
        if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
            raise ValidationError(f"{name} must be an integer >= 1, got {v!r}")
    if l_u < l_up:
        warnings.warn(
            f"complexity formulas assume users >= tx_antennas, got {l_u} < {l_up}; "
            "computing anyway",
            stacklevel=2,
        )
    flatten = float(l_u) * float(l_up) ** 2 * float(l_t) ** 3
    hosvd = ((l_u + l_up + 2.0 * l_t) / 4.0) ** 5 + float(l_u) * l_up * float(l_t) ** 2
    dpc = (
        float(l_t)
        * ((float(l_u) * l_up) ** 3.5 + float(l_u) * float(l_up) ** 2)
        * float(math.factorial(l_up))
    )
    return ComplexityEstimate(
        users=int(l_u),
        tx_antennas=int(l_up),
        time_symbols=int(l_t),
        hogmt_flatten=flatten,
        hogmt_hosvd=hosvd,
        dpc=dpc,
    )


def _fmt(x) -> str:
    """Stable scalar formatting: shortest roundtrip repr for floats."""
    if isinstance(x, (bool, np.bool_)):
        raise ValueError("no boolean columns in CSV outputs")
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(float(x))


def _write_csv(path: Path, header: str, rows, footer: str | None = None) -> None:
    lines = [header]
    for row in rows:
        lines.append(",".join(_fmt(v) if not isinstance(v, str) else v for v in row))
    if footer is not None:
        lines.append(footer)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _emit_run_records(
    out_dir: Path, cfg: RunConfig, subcommand: str, outputs: list[str]
) -> None:
    eff = out_dir / "effective_config.yaml"
    eff.write_text(
        yaml.safe_dump(cfg.to_mapping(), sort_keys=True), encoding="utf-8"
    )
    manifest = {
        "subcommand": subcommand,
        "seed": cfg.seed,
        "outputs": sorted(outputs),
        "version": __version__,
    }
    (out_dir / "manifest.yaml").write_text(
        yaml.safe_dump(manifest, sort_keys=True), encoding="utf-8"
    )


def _say(quiet: bool, message: str) -> None:
    if not quiet:
        print(message)


def _cmd_generate(cfg: RunConfig, out_dir: Path, quiet: bool) -> list[str]:
    h = generate_channel(cfg.scenario, cfg.seed)
    target = out_dir / "channel.ctf"
    save_ctf(h, target)
    _say(quiet, f"wrote {target}")
    return ["channel.ctf"]


def _resolve_input(arg: str | None, out_dir: Path) -> Path:
    return Path(arg) if arg else out_dir / "channel.ctf"


def _resolve_precoder(cfg: RunConfig):
    """sim.precoder with sim.fraction folded in for a bare "hogmt"."""
    if cfg.precoder.strip().lower() == "hogmt":
        return parse_precoder(f"hogmt({cfg.fraction})")
    return parse_precoder(cfg.precoder)


def _cmd_decompose(
    cfg: RunConfig, out_dir: Path, quiet: bool, input_path: str | None
) -> list[str]:
    src = _resolve_input(input_path, out_dir)
    h = load_ctf(src)
    kernel = to_kernel(h)
    decomp = hogmt_decompose(kernel)
    sig_sq = decomp.sigmas**2
    total = float(sig_sq.sum())
    cum = np.cumsum(sig_sq) / total if total > 0 else np.zeros_like(sig_sq)
    rows = [
        (n, float(decomp.sigmas[n]), float(cum[n])) for n in range(decomp.n_modes)
    ]
    footer = (
        f"# sum_sigma_sq={_fmt(total)} kernel_frob_sq={_fmt(kernel.frob_norm ** 2)}"
    )
    target = out_dir / "eigen.csv"
    _write_csv(target, "n,sigma,cumulative_fraction", rows, footer)
    _say(quiet, f"wrote {target}")
    return ["eigen.csv"]


def _cmd_precode(
    cfg: RunConfig, out_dir: Path, quiet: bool, input_path: str | None
) -> list[str]:
    src = _resolve_input(input_path, out_dir)
    h = load_ctf(src)
    kernel = to_kernel(h)
    decomp = hogmt_decompose(kernel)
    scheme = get_scheme(cfg.modulation)
    l_u = h.dims[0]
    l_t = h.dims[2]
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=cfg.seed, spawn_key=(_SEED_CLI_BITS,))
    )
    bits = rng.integers(0, 2, size=scheme.bits_per_symbol * l_u * l_t, dtype=np.uint8)
    s = modulate(bits, scheme, (l_u, l_t))
    spec = _resolve_precoder(cfg)
    if spec.kind != "hogmt":
        raise ConfigError(
            "the precode subcommand emits eigen-domain coefficients and "
            f"requires an hogmt precoder, got sim.precoder={cfg.precoder!r}"
        )
    policy = (
        TruncationPolicy.fraction(spec.fraction)
        if spec.fraction < 1.0
        else TruncationPolicy.full()
    )
    x, coeffs = hogmt_precode(decomp, s, policy)
    report = energy_report(decomp, coeffs)
    xt = out_dir / "precoded.npy"
    np.save(xt, x.grid)
    rows = [
        (
            n,
            float(report.gains[n]),
            float(report.cost_energy[n]),
            float(report.cancelled_energy[n]),
            float(report.cum_gain[n]),
            float(report.cum_cost[n]),
            float(report.cum_cancelled[n]),
        )
        for n in range(coeffs.retained)
    ]
    footer = (
        f"# total_tx_energy={_fmt(report.total_tx_energy)} "
        f"dropped_energy={_fmt(report.dropped_energy)}"
    )
    et = out_dir / "energy.csv"
    _write_csv(
        et,
        "n,gain,cost_energy,cancelled_energy,cum_gain,cum_cost,cum_cancelled",
        rows,
        footer,
    )
    _say(quiet, f"wrote {xt}")
    _say(quiet, f"wrote {et}")
    return ["precoded.npy", "energy.csv"]


def _cmd_simulate(cfg: RunConfig, out_dir: Path, quiet: bool) -> list[str]:
    spec = _resolve_precoder(cfg)
    report = run_ber(
        cfg.scenario,
        [spec],
        list(cfg.snr_db),
        cfg.min_bits,
        cfg.seed,
        modulations=[cfg.modulation],
    )
    rows = [
        (
            float(p.snr_db),
            p.precoder,
            p.modulation,
            float(p.fraction),
            p.bits,
            p.errors,
            float(p.ber),
            float(p.tx_energy),
        )
        for p in report.points
    ]
    target = out_dir / "ber.csv"
    _write_csv(
        target, "snr_db,precoder,modulation,fraction,bits,errors,ber,tx_energy", rows
    )
    _say(quiet, f"wrote {target}")
    return ["ber.csv"]


def _cmd_stats(cfg: RunConfig, out_dir: Path, quiet: bool) -> list[str]:
    proto = GaussianPrototype(cfg.proto_spread_t, cfg.proto_spread_f)
    decomps = []
    first_h = None
    for member in range(cfg.ensemble):
        member_seed = int(
            np.random.default_rng(
                np.random.SeedSequence(
                    entropy=cfg.seed, spawn_key=(_SEED_STATS_MEMBER, member)
                )
            ).integers(0, 2**63)
        )
        h = generate_channel(cfg.scenario, member_seed)
        if first_h is None:
            first_h = h
        transfer = tf_transfer(h, 0, 0)
        decomps.append(decompose_atomic(atomic_kernel(transfer, proto)))
    report = stats_from_decomp(None, ensemble=decomps)

    outputs = []
    n_tau, n_nu = report.scattering.shape
    rows = [
        (tau, nu, float(report.scattering[tau, nu]))
        for tau in range(n_tau)
        for nu in range(n_nu)
    ]
    _write_csv(out_dir / "stats_scattering.csv", "tau,nu,value", rows)
    outputs.append("stats_scattering.csv")

    n_t, n_f = report.path_gain.shape
    rows = [
        (t, f, float(report.path_gain[t, f]))
        for t in range(n_t)
        for f in range(n_f)
    ]
    _write_csv(out_dir / "stats_path_gain.csv", "t,f,value", rows)
    outputs.append("stats_path_gain.csv")

    _write_csv(
        out_dir / "stats_summary.csv",
        "quantity,value",
        [
            ("total_gain", report.total_gain),
            ("ensemble_size", report.ensemble_size),
            ("scattering_sum", float(report.scattering.sum())),
            ("path_gain_sum", float(report.path_gain.sum())),
            ("lsf_min", float(report.lsf.min())),
        ],
    )
    outputs.append("stats_summary.csv")

    for side in ("tx", "rx"):
        series = cmd(first_h, side=side, window=cfg.window)
        n = series.n_starts
        rows = [
            (i, j - i, float(series.distances[i, j]))
            for i in range(n)
            for j in range(n)
        ]
        _write_csv(out_dir / f"cmd_{side}.csv", "start,shift,d_corr", rows)
        outputs.append(f"cmd_{side}.csv")
        sr = stationarity_interval(series, cfg.d0)
        rows = [(i, int(sr.intervals[i])) for i in range(n)]
        _write_csv(
            out_dir / f"intervals_{side}.csv",
            "start,interval_symbols",
            rows,
            f"# d0={_fmt(cfg.d0)} window={sr.window}",
        )
        outputs.append(f"intervals_{side}.csv")
    for name in outputs:
        _say(quiet, f"wrote {out_dir / name}")
    return outputs


def _cmd_complexity(cfg: RunConfig, out_dir: Path, quiet: bool) -> list[str]:
    est = complexity_estimate(
        cfg.scenario.users, cfg.scenario.tx_antennas, cfg.scenario.time_symbols
    )
    print(
        f"operation counts for users={est.users} tx_antennas={est.tx_antennas} "
        f"time_symbols={est.time_symbols}"
    )
    for name, count in est.rows():
        print(f"  {name:<14} {_fmt(count)}")
    return []


_EPILOG = """\
configuration file (YAML), all keys optional:

  scenario.users (4)            scenario.tx_antennas (4)
  scenario.time_symbols (256)   scenario.min_delay_taps (1)
  scenario.max_delay_taps (4)   scenario.mode (wssus | block | drift)
  scenario.block_len (64)       scenario.doppler_max (0.05, < 0.5)
  scenario.doppler_drift (0.0)  scenario.spatial_corr (0.0, < 1)
  sim.precoder (hogmt; hogmt(f) | zf | zfdpc | none | ideal)
  sim.fraction (1.0)            sim.modulation (qam16; bpsk|qpsk|qam16|qam64)
  sim.snr_db ([0,5,10,15,20])   sim.min_bits (100000, >= 10000)
  sim.seed (12345)
  stats.d0 (0.2)                stats.window (8)
  stats.ensemble (1)            stats.proto_spread_t (4.0)
  stats.proto_spread_f (1.0)
  out.dir (out)

every run writes effective_config.yaml and manifest.yaml into the output
directory; rerunning a subcommand from those files reproduces its outputs
byte for byte.
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"bad command line: {message}")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="hogmt",
        description=(
            "Eigenfunction-domain channel decomposition, precoding and "
            "link simulation."
        ),
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, needs_input in (
        ("generate", False),
        ("decompose", True),
        ("precode", True),
        ("simulate", False),
        ("stats", False),
        ("complexity", False),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML configuration file")
        p.add_argument("--out", help="output directory (overrides out.dir)")
        p.add_argument("--seed", type=int, help="master seed (overrides sim.seed)")
        p.add_argument("--quiet", action="store_true", help="suppress log lines")
        if needs_input:
            p.add_argument(
                "input",
                nargs="?",
                help="input CTF file (default: <out dir>/channel.ctf)",
            )
    return parser


def _dispatch(args) -> int:
    cfg = parse_config(args.config)
    if args.seed is not None:
        if not (0 <= args.seed < 2**64):
            raise ConfigError(f"--seed must fit in 64 bits, got {args.seed}")
        cfg = replace(cfg, seed=int(args.seed))
    if args.out is not None:
        cfg = replace(cfg, out_dir=args.out)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    name = args.subcommand
    if name == "generate":
        outputs = _cmd_generate(cfg, out_dir, args.quiet)
    elif name == "decompose":
        outputs = _cmd_decompose(cfg, out_dir, args.quiet, args.input)
    elif name == "precode":
        outputs = _cmd_precode(cfg, out_dir, args.quiet, args.input)
    elif name == "simulate":
        outputs = _cmd_simulate(cfg, out_dir, args.quiet)
    elif name == "stats":
        outputs = _cmd_stats(cfg, out_dir, args.quiet)
    else:
        outputs = _cmd_complexity(cfg, out_dir, args.quiet)
    _emit_run_records(out_dir, cfg, name, outputs)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _dispatch(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except HogmtError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
