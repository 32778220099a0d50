"""Command-line orchestration: ingest, radius, solve, backtest, compare.

Every output embeds a hash of the fully resolved configuration, outputs are
byte-identical for identical (config, seed), and exit codes distinguish
config errors (1), data errors (2), and solver failures (3).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .backtest import StrategySchedule, run_backtest
from .baselines import BoxSpec, bootstrap_gammas, solve_bmc, solve_kmc
from .cvar import SmoothingParam, TailSpec
from .errors import ConfigError, DataError, SolverFailure
from .market_data import (
    DEFAULT_IN_SAMPLE_LEN,
    ReturnsMatrix,
    as_return_array,
    compute_returns,
    load_prices,
    split,
    write_table_csv,
)
from .metrics import compute_metrics
from .nonrobust import STATUS_OPTIMAL, SolveReport, solve_nmc
from .radius import RadiusConfig, select_radius
from .robust import RobustConfig, solve_rmc1, solve_rmc2

ALL_STRATEGIES = ("NMC", "BMC", "KMC", "RMC1", "RMC2")


@dataclass(frozen=True)
class RunConfig:
    data: str = ""
    output: str = "out"
    in_sample_len: int = DEFAULT_IN_SAMPLE_LEN
    tail_mass: float = 0.05
    rho: float | None = None
    kappa: int = 1
    confidence: float = 0.95
    mc_samples: int = 10_000
    seed: int = 0
    smoothing_t: float = 1e-4
    threshold: float = 0.05
    tc_rate: float = 0.002
    charge_tc: bool = True
    strategies: tuple[str, ...] = ALL_STRATEGIES
    long_only: bool = True
    delta: float | None = None  # override: skip radius selection
    box_width: float = 0.3
    bootstrap_resamples: int = 500
    static_weights: bool = False
    reestimate_every: int = 126

    def validate(self) -> "RunConfig":
        if not 0.0 < self.tail_mass < 1.0:
            raise ConfigError(f"tail_mass must be in (0, 1), got {self.tail_mass}")
        if self.kappa not in (1, 2):
            raise ConfigError(f"kappa must be 1 or 2, got {self.kappa}")
        if not 0.0 < self.confidence < 1.0:
            raise ConfigError(f"confidence must be in (0, 1), got {self.confidence}")
        if self.mc_samples < 100:
            raise ConfigError("mc_samples must be at least 100")
        if self.in_sample_len < 2:
            raise ConfigError("in_sample_len must be at least 2")
        if self.smoothing_t <= 0.0:
            raise ConfigError("smoothing_t must be positive")
        if self.threshold <= 0.0:
            raise ConfigError("threshold must be positive")
        if self.tc_rate < 0.0:
            raise ConfigError("tc_rate must be nonnegative")
        if self.delta is not None and self.delta < 0.0:
            raise ConfigError("delta override must be nonnegative")
        if self.reestimate_every < 1:
            raise ConfigError("reestimate_every must be at least 1")
        unknown = set(self.strategies) - set(ALL_STRATEGIES)
        if unknown:
            raise ConfigError(f"unknown strategies: {sorted(unknown)}")
        return self

    def config_hash(self) -> str:
        fields = asdict(self)
        fields.pop("output")  # where results land does not change them
        payload = json.dumps(fields, sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def resolve_rho(cfg: RunConfig, r_in: ReturnsMatrix) -> float:
    """Default target: cross-sectional mean of in-sample asset means."""
    if cfg.rho is not None:
        return cfg.rho
    return float(r_in.returns.mean(axis=0).mean())


def choose_delta(cfg: RunConfig, r_in, rho: float, kappa: int) -> tuple[float, dict | None]:
    if cfg.delta is not None:
        return cfg.delta, None
    result = select_radius(
        r_in,
        rho,
        TailSpec(cfg.tail_mass),
        RadiusConfig(kappa=kappa, confidence=cfg.confidence, mc_samples=cfg.mc_samples, seed=cfg.seed),
        SmoothingParam(cfg.smoothing_t),
    )
    return result.delta_star, result.to_json_dict()


def solve_strategy(name: str, cfg: RunConfig, r_in, rho: float) -> tuple[SolveReport, dict]:
    """Solve one strategy on the in-sample window; returns (report, extras)."""
    tail = TailSpec(cfg.tail_mass)
    extras: dict = {}
    if name == "NMC":
        report = solve_nmc(r_in, rho, tail, long_only=cfg.long_only)
    elif name == "BMC":
        box = BoxSpec.symmetric(as_return_array(r_in).shape[0], cfg.box_width)
        report = solve_bmc(r_in, box, rho, tail)
        extras["box_width"] = cfg.box_width
    elif name == "KMC":
        amb = bootstrap_gammas(r_in, cfg.bootstrap_resamples, cfg.confidence, cfg.seed)
        report = solve_kmc(r_in, amb, rho, tail, long_only=cfg.long_only)
        extras["gamma1"] = amb.gamma1
        extras["gamma2"] = amb.gamma2
        extras["pinv_used"] = amb.pinv_used
    elif name in ("RMC1", "RMC2"):
        kappa = 1 if name == "RMC1" else 2
        delta, radius_info = choose_delta(cfg, r_in, rho, kappa)
        rcfg = RobustConfig(delta=delta, kappa=kappa, tail=tail, rho=rho, long_only=cfg.long_only)
        report = solve_rmc1(r_in, rcfg) if kappa == 1 else solve_rmc2(r_in, rcfg)
        extras["delta"] = delta
        if radius_info is not None:
            extras["radius"] = radius_info
    else:
        raise ConfigError(f"unknown strategy {name!r}")
    return report, extras


def _load_split(cfg: RunConfig):
    prices = load_prices(cfg.data)
    returns = compute_returns(prices)
    if not 0 < cfg.in_sample_len < returns.n_obs:
        raise DataError(
            f"in_sample_len {cfg.in_sample_len} out of range for {returns.n_obs} observations"
        )
    return split(returns, cfg.in_sample_len)


def _write_json(path: Path, payload: dict, config_hash: str):
    payload = dict(payload)
    payload["config_hash"] = config_hash
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def cmd_ingest(cfg: RunConfig) -> int:
    prices = load_prices(cfg.data)
    returns = compute_returns(prices)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    chash = cfg.config_hash()
    write_table_csv(out / "returns.csv", returns.dates, returns.tickers, returns.returns, chash)
    _write_json(
        out / "ingest.json",
        {
            "tickers": list(returns.tickers),
            "n_obs": returns.n_obs,
            "dropped_rows": prices.dropped,
            "first_date": returns.dates[0].isoformat(),
            "last_date": returns.dates[-1].isoformat(),
        },
        chash,
    )
    print(f"ingested {returns.n_obs} observations of {returns.n_assets} assets "
          f"({prices.dropped} rows dropped)")
    return 0


def cmd_radius(cfg: RunConfig) -> int:
    r_in, _ = _load_split(cfg)
    rho = resolve_rho(cfg, r_in)
    delta, info = choose_delta(cfg, r_in, rho, cfg.kappa)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    payload = info if info is not None else {"delta_star": delta, "source": "override"}
    payload["rho"] = rho
    _write_json(out / f"radius_k{cfg.kappa}.json", payload, cfg.config_hash())
    print(f"delta_star = {delta:.8g} (kappa={cfg.kappa})")
    return 0


def cmd_solve(cfg: RunConfig) -> int:
    r_in, _ = _load_split(cfg)
    rho = resolve_rho(cfg, r_in)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    chash = cfg.config_hash()
    failures = []
    for name in cfg.strategies:
        report, extras = solve_strategy(name, cfg, r_in, rho)
        payload = report.to_json_dict()
        payload["rho"] = rho
        payload.update(extras)
        _write_json(out / f"solve_{name}.json", payload, chash)
        line = f"{name}: status={report.status} objective={report.objective:.8g}"
        print(line)
        if report.status != STATUS_OPTIMAL:
            failures.append(name)
    if failures:
        print(f"solver failure in: {', '.join(failures)}", file=sys.stderr)
        return 3
    return 0


def _build_schedule(name: str, cfg: RunConfig, returns_all: ReturnsMatrix, rho: float) -> StrategySchedule:
    """Publish targets at the out-of-sample start and on a fixed cadence.

    Each published target re-solves the strategy on the trailing
    ``in_sample_len`` window ending the day before publication.
    """
    n_out = returns_all.n_obs - cfg.in_sample_len
    publish_days = [0]
    if not cfg.static_weights:
        publish_days += list(range(cfg.reestimate_every, n_out, cfg.reestimate_every))
    targets = []
    for day in publish_days:
        window = ReturnsMatrix(
            dates=returns_all.dates[day : cfg.in_sample_len + day],
            tickers=returns_all.tickers,
            returns=returns_all.returns[day : cfg.in_sample_len + day],
        )
        report, _ = solve_strategy(name, cfg, window, rho)
        if report.status != STATUS_OPTIMAL or report.portfolio is None:
            if not targets:
                raise SolverFailure(f"{name}: initial solve failed with status {report.status}")
            continue  # keep the previous target when a re-estimation fails
        targets.append((day, report.portfolio.weights))
    return StrategySchedule(targets=tuple(targets), lookback=cfg.in_sample_len)


def cmd_backtest(cfg: RunConfig) -> int:
    r_in, r_out = _load_split(cfg)
    returns_all = ReturnsMatrix(
        dates=r_in.dates + r_out.dates,
        tickers=r_in.tickers,
        returns=np.vstack([r_in.returns, r_out.returns]),
    )
    rho = resolve_rho(cfg, r_in)
    tail = TailSpec(cfg.tail_mass)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    chash = cfg.config_hash()

    metric_rows = []
    for name in cfg.strategies:
        schedule = _build_schedule(name, cfg, returns_all, rho)
        result = run_backtest(
            schedule, r_out, threshold=cfg.threshold, tc_rate=cfg.tc_rate, charge_tc=cfg.charge_tc
        )
        bundle = compute_metrics(result.daily_returns, tail)

        # the wealth path has a day-0 anchor: stamp it with the last
        # in-sample date (the position is established before trading starts)
        dates = (r_in.dates[-1],) + r_out.dates
        write_table_csv(out / f"wealth_{name}.csv", dates, ("wealth",), result.wealth[:, None], chash)
        write_table_csv(out / f"weights_{name}.csv", dates, r_out.tickers, result.weights_path, chash)
        if bundle.rolling_sharpe.size:
            rs_dates = r_out.dates[len(r_out.dates) - bundle.rolling_sharpe.size :]
            write_table_csv(
                out / f"rolling_sharpe_{name}.csv",
                rs_dates,
                ("rolling_sharpe",),
                bundle.rolling_sharpe[:, None],
                chash,
            )
        _write_json(
            out / f"backtest_{name}.json",
            {
                "strategy": name,
                "rebalances": list(result.rebalance_days),
                "total_tc": result.total_tc,
                "charged_tc": result.charged_tc,
                "final_wealth": float(result.wealth[-1]),
            },
            chash,
        )
        row = {"Strategy": name, **bundle.to_row(), "Rebalances": len(result.rebalance_days), "Total TC": result.total_tc}
        metric_rows.append(row)
        print(f"{name}: final wealth {result.wealth[-1]:.4f}, "
              f"{len(result.rebalance_days)} rebalances, TC {result.total_tc:.6f}")

    header = list(metric_rows[0].keys())
    with open(out / "metrics.csv", "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# config_hash: {chash}\n")
        fh.write(",".join(header) + "\n")
        for row in metric_rows:
            fh.write(",".join(_format_cell(row[h]) for h in header) + "\n")
    return 0


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def cmd_compare(cfg: RunConfig) -> int:
    rc = cmd_solve(cfg)
    if rc != 0:
        return rc
    return cmd_backtest(cfg)


def _add_common_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="JSON file of RunConfig fields; flags override it")
    parser.add_argument("--data", help="price CSV path")
    parser.add_argument("--output", help="output directory")
    parser.add_argument("--in-sample-len", type=int, dest="in_sample_len")
    parser.add_argument("--tail-mass", type=float, dest="tail_mass")
    parser.add_argument("--rho", type=float)
    parser.add_argument("--kappa", type=int)
    parser.add_argument("--confidence", type=float)
    parser.add_argument("--mc-samples", type=int, dest="mc_samples")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--smoothing-t", type=float, dest="smoothing_t")
    parser.add_argument("--threshold", type=float)
    parser.add_argument("--tc-rate", type=float, dest="tc_rate")
    parser.add_argument("--tc", dest="charge_tc", action="store_true", default=None)
    parser.add_argument("--no-tc", dest="charge_tc", action="store_false", default=None)
    parser.add_argument("--strategies", nargs="+", choices=ALL_STRATEGIES)
    parser.add_argument("--long-only", dest="long_only", action="store_true", default=None)
    parser.add_argument("--no-long-only", dest="long_only", action="store_false", default=None)
    parser.add_argument("--delta", type=float, help="fixed ambiguity radius, skips selection")
    parser.add_argument("--box-width", type=float, dest="box_width")
    parser.add_argument("--bootstrap-resamples", type=int, dest="bootstrap_resamples")
    parser.add_argument("--static-weights", dest="static_weights", action="store_true", default=None)
    parser.add_argument("--reestimate-every", type=int, dest="reestimate_every")


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            file_fields = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
        if not isinstance(file_fields, dict):
            raise ConfigError("config file must hold a JSON object")
        known = set(RunConfig.__dataclass_fields__)
        unknown = set(file_fields) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "strategies" in file_fields:
            file_fields["strategies"] = tuple(file_fields["strategies"])
        cfg = replace(cfg, **file_fields)
    overrides = {
        key: value
        for key, value in vars(args).items()
        if key in RunConfig.__dataclass_fields__ and value is not None
    }
    if "strategies" in overrides:
        overrides["strategies"] = tuple(overrides["strategies"])
    cfg = replace(cfg, **overrides)
    return cfg.validate()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="robustcvar",
        description="Wasserstein-robust mean-CVaR portfolio toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "ingest": cmd_ingest,
        "radius": cmd_radius,
        "solve": cmd_solve,
        "backtest": cmd_backtest,
        "compare": cmd_compare,
    }
    for name in commands:
        sp = sub.add_parser(name)
        _add_common_flags(sp)
    args = parser.parse_args(argv)

    try:
        cfg = build_config(args)
        if not cfg.data:
            raise ConfigError("--data (or a config file with 'data') is required")
        return commands[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
