"""Experiment configuration read from YAML.

Example::

    code:
      n: 8
      K: 220
      construction: product      # ga | product | file
      design_snr_db: 6.8
    decoder:
      t_max: 8
      schedule: table2           # table2 | zero | file
      start_graph: rows
    channel:
      snr_range: [4.0, 6.0, 0.5] # or snr_list_db: [...]
    sim:
      max_frames: 100000
      target_block_errors: 50
      seed: 1
    ga:
      max_generations: 100
      target_bler: 0.01

Relative paths are resolved against the directory of the config file.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from .channel import StopRule
from .code import (
    CodeSpec,
    construct_gaussian_approx,
    construct_product_gaussian_approx,
    load_code_spec,
)
from .decoder import DampingSchedule, Graph, default_schedule, load_schedule
from .ga import FitnessConfig, GaConfig


class ConfigError(ValueError):
    pass


@dataclass
class CodeConfig:
    n: int = 8
    K: int = 220
    construction: str = "product"
    design_snr_db: float = 6.8
    spec_path: str | None = None

    def build(self) -> CodeSpec:
        if self.construction == "file":
            if not self.spec_path:
                raise ConfigError("code.construction=file needs code.spec_path")
            return load_code_spec(self.spec_path)
        if self.spec_path:
            raise ConfigError("code.spec_path is only valid with construction=file")
        if self.construction == "ga":
            return construct_gaussian_approx(self.n, self.K, self.design_snr_db)
        if self.construction == "product":
            return construct_product_gaussian_approx(self.n, self.K, self.design_snr_db)
        raise ConfigError(f"unknown construction {self.construction!r}")


@dataclass
class DecoderConfig:
    t_max: int = 8
    schedule: str = "table2"
    schedule_path: str | None = None
    start_graph: str = "rows"
    early_exit: bool = False
    kernel: str = "minsum"

    def graph(self) -> Graph:
        try:
            return Graph[self.start_graph.upper()]
        except KeyError:
            raise ConfigError(f"start_graph must be rows or cols, got {self.start_graph!r}") from None

    def build_schedule(self) -> DampingSchedule:
        if self.schedule == "file":
            if not self.schedule_path:
                raise ConfigError("decoder.schedule=file needs decoder.schedule_path")
            return load_schedule(self.schedule_path)
        if self.schedule_path:
            raise ConfigError("decoder.schedule_path is only valid with schedule=file")
        return named_schedule(self.schedule, self.t_max)


def named_schedule(name: str, t_max: int) -> DampingSchedule:
    if name == "table2":
        return default_schedule()
    if name == "zero":
        return DampingSchedule.zeros(t_max)
    return load_schedule(name)


@dataclass
class ChannelConfig:
    snr_list_db: list | None = None
    snr_range: list | None = None

    def points(self) -> list:
        if (self.snr_list_db is None) == (self.snr_range is None):
            raise ConfigError("give exactly one of channel.snr_list_db and channel.snr_range")
        if self.snr_list_db is not None:
            return [float(s) for s in self.snr_list_db]
        if len(self.snr_range) != 3:
            raise ConfigError("channel.snr_range is [start, stop, step]")
        start, stop, step = (float(v) for v in self.snr_range)
        if step <= 0 or stop < start:
            raise ConfigError("channel.snr_range needs step > 0 and stop >= start")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(count)]


@dataclass
class SimConfig:
    max_frames: int = 100_000
    target_block_errors: int = 50
    seed: int = 0
    workers: int = 1

    def stop(self) -> StopRule:
        return StopRule(self.max_frames, self.target_block_errors)


@dataclass
class GaSection:
    population_size: int = 32
    v_sup: float = 2.0
    sample_focus: float = 0.01
    p_mutate: float = 0.07
    sigma_mutate: float = 0.3
    max_generations: int = 3000
    clip_negative: bool = True
    target_bler: float = 1e-3
    snr_lo: float = 0.0
    snr_hi: float = 10.0
    tol_db: float = 0.02
    max_frames: int = 20_000
    target_block_errors: int = 50


@dataclass
class ExperimentConfig:
    code: CodeConfig = field(default_factory=CodeConfig)
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    ga: GaSection = field(default_factory=GaSection)
    schedules: list = field(default_factory=lambda: ["table2"])

    def echo(self) -> dict:
        """Config as echoed into output headers; worker count is left out
        because it never changes results."""
        d = asdict(self)
        d["sim"].pop("workers")
        return d

    def ga_config(self, spec: CodeSpec) -> GaConfig:
        g = self.ga
        fitness = FitnessConfig(
            spec, target_bler=g.target_bler, snr_lo=g.snr_lo, snr_hi=g.snr_hi, tol_db=g.tol_db,
            seed=self.sim.seed, stop=StopRule(g.max_frames, g.target_block_errors),
            start_graph=self.decoder.graph(), kernel=self.decoder.kernel, workers=self.sim.workers,
        )
        return GaConfig(
            population_size=g.population_size, v_sup=g.v_sup, sample_focus=g.sample_focus,
            p_mutate=g.p_mutate, sigma_mutate=g.sigma_mutate, t_max=self.decoder.t_max,
            max_generations=g.max_generations, clip_negative=g.clip_negative, fitness=fitness,
        )


_SECTIONS = {f.name: f for f in fields(ExperimentConfig)}


def _section(cls, data, name):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {', '.join(sorted(unknown))}")
    return cls(**data)


def _resolve(path, base: Path):
    if path is None:
        return None
    p = Path(path)
    return str(p if p.is_absolute() else base / p)


def parse_config(data: dict | None, base_dir=".") -> ExperimentConfig:
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {', '.join(sorted(unknown))}")
    base = Path(base_dir)
    cfg = ExperimentConfig(
        code=_section(CodeConfig, data.get("code"), "code"),
        decoder=_section(DecoderConfig, data.get("decoder"), "decoder"),
        channel=_section(ChannelConfig, data.get("channel"), "channel"),
        sim=_section(SimConfig, data.get("sim"), "sim"),
        ga=_section(GaSection, data.get("ga"), "ga"),
        schedules=list(data.get("schedules", ["table2"])),
    )
    cfg.code.spec_path = _resolve(cfg.code.spec_path, base)
    cfg.decoder.schedule_path = _resolve(cfg.decoder.schedule_path, base)
    cfg.schedules = [s if s in ("table2", "zero") else _resolve(s, base) for s in cfg.schedules]
    for ref in [cfg.code.spec_path, cfg.decoder.schedule_path] + [
            s for s in cfg.schedules if s not in ("table2", "zero")]:
        if ref is not None and not Path(ref).is_file():
            raise FileNotFoundError(ref)
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    text = path.read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    return parse_config(data, path.parent)
