"""Command-line interface.

Subcommands:

* ``simulate`` — simulate a path batch from a model+grid config and write
  the flat binary (plus a JSON sidecar describing grid/seed/measure, which
  the binary itself does not store).
* ``run`` — run a full experiment from a config JSON and emit the result
  files into the output directory.
* ``reproduce bm|cev|affine`` — run the built-in experiment presets;
  ``--desk-scale`` shrinks path count and grid to workstation-friendly
  sizes.
* ``oracle-check`` — compare every closed-form reference oracle against
  a Monte Carlo estimate and fail on disagreement.

Exit codes: 0 on success, 2 for configuration errors (including unreadable
or malformed config files), 3 for numerical failures.
"""

from __future__ import annotations

import functools
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import click
import numpy as np
import threadpoolctl

from .errors import ConfigError, NumericalError
from .harness import (
    REPRODUCE_NAMES,
    config_from_json,
    emit_results,
    reproduce_config,
    run_experiment,
)
from .models import (
    TimeGrid,
    model_dim,
    model_from_json,
    model_to_json,
    sample_affine_model,
    save_path_batch,
    simulate_paths,
    zero_drift,
)
from .oracle import (
    QuadratureSpec,
    asian_put_value_delta,
    basket_put_value_delta,
    bm_call_delta,
    mc_bump_delta,
    mc_reference_price,
)
from .payoffs import AsianPut, BasketPut, EuropeanCall

# Keep thread-limit controllers alive for the lifetime of the process.
_THREAD_LIMITS: list = []


def _limit_threads(threads: int | None) -> None:
    if threads is None:
        return
    if threads < 1:
        raise ConfigError(f"--threads must be >= 1, got {threads}")
    pools = threadpoolctl.threadpool_info()
    if not pools:
        return
    # --threads is a cap: never raise a pool above its initialized size
    # (growing OpenBLAS's thread pool after first use is not supported and
    # can crash inside LAPACK).
    cap = min(int(threads), min(p["num_threads"] for p in pools))
    _THREAD_LIMITS.append(threadpoolctl.threadpool_limits(limits=cap))


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(2)
        except NumericalError as exc:
            click.echo(f"numerical error: {exc}", err=True)
            sys.exit(3)

    return wrapper


def _read_json(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return doc


@click.group()
def main():
    """Chaotic hedging: chaos regression of payoffs with closed-form hedges."""


@main.command()
@click.option("--config", "config_path", required=True, metavar="PATH",
              help="JSON with keys model, grid {T, K}, n_paths and optional seed, measure.")
@click.option("--out", "out_dir", required=True, metavar="DIR",
              help="Directory for paths.bin and its paths.json sidecar.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--threads", type=int, default=None, help="Cap BLAS/OpenMP threads.")
@_handle_errors
def simulate(config_path, out_dir, seed, threads):
    """Simulate a path batch and write it as a flat binary."""
    _limit_threads(threads)
    doc = _read_json(config_path)
    try:
        model = model_from_json(doc["model"])
        grid = TimeGrid(T=float(doc["grid"]["T"]), K=int(doc["grid"]["K"]))
        n_paths = int(doc["n_paths"])
    except KeyError as exc:
        raise ConfigError(f"simulate config is missing key {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"simulate config has a malformed value: {exc}") from exc
    seed = int(doc.get("seed", 0)) if seed is None else int(seed)
    measure = doc.get("measure", "Physical")

    batch = simulate_paths(model, grid, n_paths, seed, measure=measure)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    binary = out / "paths.bin"
    save_path_batch(batch, binary)
    sidecar = out / "paths.json"
    sidecar.write_text(json.dumps({
        "model": model_to_json(model),
        "grid": {"T": grid.T, "K": grid.K},
        "n_paths": n_paths,
        "seed": seed,
        "measure": measure,
    }, indent=2, sort_keys=True) + "\n")
    click.echo(f"wrote {binary}")
    click.echo(f"wrote {sidecar}")


@main.command()
@click.option("--config", "config_path", required=True, metavar="PATH",
              help="Experiment config JSON (see config_to_json).")
@click.option("--out", "out_dir", default=None, metavar="DIR",
              help="Output directory; overrides the config's output_dir.")
@click.option("--seed", type=int, default=None, help="Override the path-simulation seed.")
@click.option("--threads", type=int, default=None, help="Cap BLAS/OpenMP threads.")
@_handle_errors
def run(config_path, out_dir, seed, threads):
    """Run an experiment from a config JSON and emit the result files."""
    _limit_threads(threads)
    config = config_from_json(_read_json(config_path))
    if seed is not None:
        config = replace(config, seeds=replace(config.seeds, paths=int(seed)))
    report = run_experiment(config)
    files = emit_results(report, out_dir)
    for f in files:
        click.echo(f"wrote {f}")


@main.command()
@click.argument("name", type=click.Choice(REPRODUCE_NAMES))
@click.option("--desk-scale", is_flag=True,
              help="Shrink path count and grid to workstation-friendly sizes.")
@click.option("--out", "out_dir", default=None, metavar="DIR",
              help="Output directory (default results/NAME or results/NAME_desk).")
@click.option("--seed", type=int, default=None, help="Override the path-simulation seed.")
@click.option("--threads", type=int, default=None, help="Cap BLAS/OpenMP threads.")
@_handle_errors
def reproduce(name, desk_scale, out_dir, seed, threads):
    """Run a built-in experiment preset (bm, cev, or affine)."""
    _limit_threads(threads)
    if out_dir is None:
        out_dir = f"results/{name}_desk" if desk_scale else f"results/{name}"
    config = reproduce_config(name, desk_scale=desk_scale, output_dir=out_dir, seed=seed)
    report = run_experiment(config)
    files = emit_results(report)
    for f in files:
        click.echo(f"wrote {f}")


@dataclass(frozen=True)
class OracleCheck:
    name: str
    oracle: float
    monte_carlo: float
    tolerance: float

    @property
    def error(self) -> float:
        return abs(self.oracle - self.monte_carlo)

    @property
    def passed(self) -> bool:
        return self.error <= self.tolerance


def oracle_checks(n_paths: int = 20_000, seed: int = 17) -> list[OracleCheck]:
    """Closed-form oracle values versus Monte Carlo estimates.

    Value checks use max(0.5% of price, 3 standard errors); delta checks
    use central-difference bumps under common random numbers with a 5%
    relative band, wide enough for the O(bump^2) bias at the chosen bumps.
    """
    from .models import BrownianMotion, Cev

    quad = QuadratureSpec(u_max=40.0, n_nodes=256)
    grid = TimeGrid(T=1.0, K=250)
    checks = []

    bm = BrownianMotion(dims=1)
    call = EuropeanCall(strike=-0.5)
    delta = float(bm_call_delta(0.0, 0.0, call.strike, grid.T))
    bump, bump_se = mc_bump_delta(bm, call, n_paths, grid, seed, bump=0.05)
    checks.append(OracleCheck("bm-call-delta", delta, bump,
                              max(0.05 * abs(bump), 3.0 * bump_se)))

    cev = zero_drift(Cev(x0=100.0, alpha=-0.02, sigma0=0.4))
    asian = AsianPut(strike=102.0)
    value, delta = asian_put_value_delta(cev, 100.0, 0.0, 0.0, 102.0, grid.T, quad)
    price, se = mc_reference_price(cev, asian, n_paths, grid, seed)
    checks.append(OracleCheck("cev-asian-value", value, price,
                              max(0.005 * abs(price), 3.0 * se)))
    bump, bump_se = mc_bump_delta(cev, asian, n_paths, grid, seed, bump=0.5)
    checks.append(OracleCheck("cev-asian-delta", float(delta), bump,
                              max(0.05 * abs(bump), 3.0 * bump_se)))

    affine = zero_drift(sample_affine_model(2, 2025))
    w = np.array([1.0, -0.95])
    basket = BasketPut(strike=0.8, weights=w)
    value, deltas = basket_put_value_delta(affine, affine.x0, 0.0, 0.8, w, grid.T, quad)
    price, se = mc_reference_price(affine, basket, n_paths, grid, seed)
    checks.append(OracleCheck("affine-basket-value", value, price,
                              max(0.005 * abs(price), 3.0 * se)))
    for i in range(model_dim(affine)):
        bump, bump_se = mc_bump_delta(affine, basket, n_paths, grid, seed,
                                      bump=0.1, component=i)
        checks.append(OracleCheck(f"affine-basket-delta-{i}", float(deltas[i]), bump,
                                  max(0.05 * abs(bump), 3.0 * bump_se)))
    return checks


@main.command("oracle-check")
@click.option("--paths", "n_paths", type=int, default=20_000, show_default=True,
              help="Monte Carlo sample size per check.")
@click.option("--seed", type=int, default=17, show_default=True)
@click.option("--threads", type=int, default=None, help="Cap BLAS/OpenMP threads.")
@_handle_errors
def oracle_check(n_paths, seed, threads):
    """Compare the reference oracles against Monte Carlo estimates."""
    _limit_threads(threads)
    if n_paths < 2:
        raise ConfigError(f"--paths must be at least 2, got {n_paths}")
    failures = 0
    for check in oracle_checks(n_paths=n_paths, seed=seed):
        status = "ok  " if check.passed else "FAIL"
        failures += not check.passed
        click.echo(
            f"{status} {check.name:<22} oracle={check.oracle:+.6f} "
            f"mc={check.monte_carlo:+.6f} err={check.error:.2e} tol={check.tolerance:.2e}"
        )
    if failures:
        raise NumericalError(f"{failures} oracle check(s) outside tolerance")
    click.echo("all oracle checks passed")


if __name__ == "__main__":
    main()
