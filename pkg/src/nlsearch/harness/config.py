"""Experiment configuration and its validation."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ..errors import DomainError
from ..linear_stage import TruthTable
from ..nonlinear import MODELS, make_model

MODES = ("algo1", "algo2-continuous", "algo2-discrete", "verify", "sweep")
SWEEPABLE = ("n", "s", "eps", "eta", "alpha")


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 3
    oracle_hex: str | None = None
    s: int = 1
    seed: int = 0
    model: str = "gated"
    eps: float = 1.0
    eta: float = 0.01
    alpha: float = 1e3
    t_final: float | None = None
    dt: float | None = None
    format: str = "json"
    mode: str = "algo1"
    allow_any_s: bool = False
    sweep_axis: str | None = None
    sweep_values: tuple = field(default_factory=tuple)

    def validate(self) -> "ExperimentConfig":
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}")
        if not 1 <= self.n <= 20:
            raise DomainError(f"n must lie in 1..20, got {self.n}")
        if self.model not in MODELS:
            raise DomainError(f"model must be one of {sorted(MODELS)}")
        if self.format not in ("json", "csv"):
            raise DomainError("format must be json or csv")
        if self.t_final is not None and not self.t_final > 0:
            raise DomainError("t_final must be positive")
        if self.dt is not None and not self.dt > 0:
            raise DomainError("dt must be positive")
        if self.oracle_hex is None and not 0 <= self.s <= 2**self.n:
            raise DomainError(f"s={self.s} outside [0, {2**self.n}]")
        self.build_model()
        if self.mode == "sweep":
            if self.sweep_axis not in SWEEPABLE:
                raise DomainError(f"sweep needs exactly one axis among {SWEEPABLE}")
            if not self.sweep_values:
                raise DomainError("sweep axis has no values")
            for v in self.sweep_values:
                self.at(v).validate()
        return self

    def at(self, value) -> "ExperimentConfig":
        """The single-run configuration for one value of the swept axis."""
        mode = "algo2-continuous" if self.model == "alpha" else "algo1"
        if self.sweep_axis in ("n", "s"):
            value = int(value)
        return replace(self, mode=mode, sweep_axis=None, sweep_values=(), **{self.sweep_axis: value})

    def build_model(self):
        return make_model(self.model, self.eps, self.eta, self.alpha, n=self.n)

    def truth_table(self) -> TruthTable:
        if self.oracle_hex is not None:
            return TruthTable.from_hex(self.n, self.oracle_hex)
        return TruthTable.random(self.n, self.s, np.random.default_rng(self.seed))

    def echo(self) -> dict:
        d = asdict(self)
        d["sweep_values"] = list(self.sweep_values)
        return d
