"""Command-line entry point: ``gncoset construct|simulate|sweep|train|decode``.

Exit codes: 0 success, 2 invalid input, 3 I/O failure.  CSV outputs start
with the experiment config echoed as ``#`` comment lines.
"""
from __future__ import annotations

import functools
import sys
from pathlib import Path

import click
import numpy as np
import yaml

from .channel import BLER_CSV_HEADER, ChannelParams, estimate_bler
from .code import format_code_spec, load_code_spec
from .config import CodeConfig, ConfigError, ExperimentConfig, load_config, named_schedule
from .decoder import Graph, format_schedule, parallel_decode
from .ga import SnrFitness, train

TRAJECTORY_HEADER = "generation,best_fitness_db,median_fitness_db,evaluations,best_bracketed"


class InvalidInput(click.ClickException):
    exit_code = 2


class IoFailure(click.ClickException):
    exit_code = 3


def _guarded(func):
    """Map library exceptions onto the documented exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except click.ClickException:
            raise
        except OSError as exc:
            raise IoFailure(str(exc)) from None
        except (ValueError, TypeError, KeyError) as exc:
            raise InvalidInput(str(exc)) from None

    return wrapper


def _header(command: str, cfg: ExperimentConfig | None = None, **extra) -> str:
    lines = [f"gncoset {command}"]
    if cfg is not None:
        lines += yaml.safe_dump(cfg.echo(), sort_keys=True).splitlines()
    lines += [f"{k}: {v}" for k, v in extra.items()]
    return "".join(f"# {line}\n" for line in lines)


def _emit(text: str, out) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)


def _load(config, seed, workers) -> ExperimentConfig:
    cfg = load_config(config)
    if seed is not None:
        cfg.sim.seed = seed
    if workers is not None:
        cfg.sim.workers = workers
    if cfg.sim.workers < 1:
        raise ConfigError("workers must be >= 1")
    return cfg


def _schedule_for(cfg: ExperimentConfig, sched):
    if sched.t_max > cfg.decoder.t_max:
        sched = sched.truncated(cfg.decoder.t_max)
    if sched.t_max != cfg.decoder.t_max:
        raise ConfigError(f"schedule has {sched.t_max} iterations, decoder.t_max is {cfg.decoder.t_max}")
    return sched


def _sim_rows(cfg: ExperimentConfig, spec, sched) -> list:
    d = cfg.decoder
    rows = []
    for snr in cfg.channel.points():
        p = estimate_bler(spec, sched, d.t_max, ChannelParams(snr), cfg.sim.stop(), cfg.sim.seed,
                          workers=cfg.sim.workers, start_graph=d.graph(), early_exit=d.early_exit,
                          kernel=d.kernel)
        rows.append(p.csv_row())
    return rows


config_option = click.option("--config", "config", required=True,
                             type=click.Path(dir_okay=False), help="YAML experiment config.")
seed_option = click.option("--seed", type=int, default=None, help="Overrides sim.seed.")
workers_option = click.option("--workers", type=int, default=None,
                              help="Worker threads; never changes results.")
out_option = click.option("-o", "--out", type=click.Path(dir_okay=False), default=None,
                          help="Output file (default stdout).")


@click.group()
def main():
    """Parallel SC decoding of G_N-coset codes with learned damping."""


@main.command()
@click.option("--config", type=click.Path(dir_okay=False), default=None)
@click.option("--n", "n", type=int, default=None, help="log2 of the code length.")
@click.option("--K", "K", type=int, default=None, help="Number of information bits.")
@click.option("--design-snr-db", type=float, default=None)
@click.option("--construction", type=click.Choice(["ga", "product"]), default=None)
@out_option
@_guarded
def construct(config, n, K, design_snr_db, construction, out):
    """Build an information set and write it in the n=/K=/A= format."""
    code = load_config(config).code if config else CodeConfig(construction="ga")
    for key, value in dict(n=n, K=K, design_snr_db=design_snr_db, construction=construction).items():
        if value is not None:
            setattr(code, key, value)
    if code.construction == "file":
        raise ConfigError("construct needs construction ga or product")
    spec = code.build()
    _emit(format_code_spec(spec), out)


@main.command()
@config_option
@seed_option
@workers_option
@out_option
@_guarded
def simulate(config, seed, workers, out):
    """BLER and SC activation rate at each configured Es/N0."""
    cfg = _load(config, seed, workers)
    spec = cfg.code.build()
    sched = _schedule_for(cfg, cfg.decoder.build_schedule())
    rows = _sim_rows(cfg, spec, sched)
    _emit(_header("simulate", cfg) + BLER_CSV_HEADER + "\n" + "".join(r + "\n" for r in rows), out)


@main.command()
@config_option
@seed_option
@workers_option
@out_option
@_guarded
def sweep(config, seed, workers, out):
    """Es/N0 x schedule grid; schedules come from the top-level ``schedules`` list."""
    cfg = _load(config, seed, workers)
    spec = cfg.code.build()
    lines = [_header("sweep", cfg), "schedule," + BLER_CSV_HEADER + "\n"]
    for name in cfg.schedules:
        sched = _schedule_for(cfg, named_schedule(name, cfg.decoder.t_max))
        label = Path(name).name
        lines += [f"{label},{row}\n" for row in _sim_rows(cfg, spec, sched)]
    _emit("".join(lines), out)


@main.command("train")
@config_option
@seed_option
@workers_option
@click.option("--schedule-out", type=click.Path(dir_okay=False), required=True)
@click.option("--trajectory-out", type=click.Path(dir_okay=False), default=None,
              help="Trajectory CSV (default stdout).")
@_guarded
def train_cmd(config, seed, workers, schedule_out, trajectory_out):
    """Learn a damping schedule with the genetic algorithm."""
    cfg = _load(config, seed, workers)
    spec = cfg.code.build()
    ga_cfg = cfg.ga_config(spec)
    fitness = SnrFitness(ga_cfg.fitness, ga_cfg.t_max)
    rows = []

    def record(row, pop):
        rows.append(f"{row[0]},{row[1]!r},{row[2]!r},{row[3]},{int(pop.best.bracketed)}\n")

    res = train(ga_cfg, np.random.default_rng(cfg.sim.seed), fitness, callback=record)
    extra = {"unbracketed_evaluations": fitness.unbracketed}
    if fitness.unbracketed:
        click.echo(f"warning: {fitness.unbracketed} of {fitness.evaluations} fitness evaluations "
                   "did not bracket the target BLER", err=True)
    _emit(_header("train", cfg, best_fitness_db=repr(res.best.fitness), **extra)
          + format_schedule(res.best.schedule), schedule_out)
    _emit(_header("train", cfg, **extra) + TRAJECTORY_HEADER + "\n" + "".join(rows), trajectory_out)


def _read_llrs(path) -> np.ndarray:
    values = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            values.append(float(line))
    return np.asarray(values)


def _hex_bits(bits) -> str:
    """Bits MSB first, zero-padded on the right to a multiple of 4."""
    bits = np.asarray(bits, dtype=np.uint8)
    pad = (-bits.size) % 4
    nibbles = np.concatenate([bits, np.zeros(pad, np.uint8)]).reshape(-1, 4)
    return "".join(f"{int(v):x}" for v in nibbles @ np.array([8, 4, 2, 1]))


@main.command()
@click.option("--spec", "spec_path", type=click.Path(dir_okay=False), required=True)
@click.option("--llr", "llr_path", type=click.Path(dir_okay=False), required=True,
              help="Channel LLRs, one value per line.")
@click.option("--schedule", default="table2", show_default=True,
              help="table2, zero or a schedule file.")
@click.option("--t-max", type=int, default=8, show_default=True)
@click.option("--es-n0-db", type=float, required=True, help="Es/N0 the LLRs were generated at.")
@click.option("--start-graph", type=click.Choice(["rows", "cols"]), default="rows", show_default=True)
@click.option("--early-exit", is_flag=True)
@click.option("--kernel", type=click.Choice(["minsum", "exact"]), default="minsum", show_default=True)
@_guarded
def decode(spec_path, llr_path, schedule, t_max, es_n0_db, start_graph, early_exit, kernel):
    """Decode one frame and print the info bits (hex) and activation trace."""
    spec = load_code_spec(spec_path)
    llrs = _read_llrs(llr_path)
    if llrs.size != spec.N:
        raise InvalidInput(f"LLR file has {llrs.size} values, code length is {spec.N}")
    sched = named_schedule(schedule, t_max)
    if sched.t_max > t_max:
        sched = sched.truncated(t_max)
    res = parallel_decode(llrs, spec, sched, t_max, ChannelParams(es_n0_db).sigma2,
                          Graph[start_graph.upper()], early_exit, kernel)
    out = [f"info_hex={_hex_bits(res.info)}", f"K={spec.K}",
           f"sc_activations={res.sc_activations}", f"components_skipped={res.components_skipped}",
           "iteration,graph,activations,skipped"]
    out += [f"{t},{g.name.lower()},{a},{s}" for t, (g, a, s) in enumerate(res.per_iteration_trace, 1)]
    click.echo("\n".join(out))


if __name__ == "__main__":
    sys.exit(main())
