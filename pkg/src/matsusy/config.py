"""Scenario configuration: JSON schema, model (de)serialization, builtins."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .core import Model, NuClass, QEntry
from .errors import ConfigError

SCHEMA_VERSION = "1"
TASK_ORDER = ("verify", "spectrum", "groundstate", "ladder")

Variant = Literal["tan_pole", "tanh", "coth", "const_plus", "const_minus", "inv_pole", "zero"]


class NuSpec(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    variant: Literal["positive", "negative", "zero"]
    lam: Optional[float] = Field(default=None, alias="lambda")


class EntrySpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    variant: Variant
    gamma: Optional[float] = None


class ModelSpec(BaseModel):
    """Model description; ``phi_upper`` lists the upper triangle of the
    hermitian matrix row by row (``i <= j``) as ``[re, im]`` pairs."""

    model_config = ConfigDict(extra="forbid")

    nu: NuSpec
    entries: list[EntrySpec]
    mu: float
    phi_upper: list[tuple[float, float]]

    @model_validator(mode="after")
    def _check(self):
        self.to_model()
        return self

    def to_model(self) -> Model:
        n = len(self.entries)
        if len(self.phi_upper) != n * (n + 1) // 2:
            raise ValueError(f"phi_upper needs {n * (n + 1) // 2} entries for n={n}, got {len(self.phi_upper)}")
        phi = np.zeros((n, n), dtype=complex)
        it = iter(self.phi_upper)
        for i in range(n):
            for j in range(i, n):
                re, im = next(it)
                if i == j and im != 0:
                    raise ValueError(f"diagonal phi[{i}][{i}] must be real")
                phi[i, j] = complex(re, im)
                phi[j, i] = complex(re, -im)
        nu = NuClass(self.nu.variant, self.nu.lam)
        entries = tuple(QEntry(e.variant, e.gamma) for e in self.entries)
        return Model(nu, entries, self.mu, phi)

    @classmethod
    def from_model(cls, model: Model) -> "ModelSpec":
        n = model.n
        upper = [(float(model.phi[i, j].real), float(model.phi[i, j].imag))
                 for i in range(n) for j in range(i, n)]
        return cls(
            nu=NuSpec(variant=model.nu.variant.value, lam=model.nu.lam),
            entries=[EntrySpec(variant=e.variant.value, gamma=e.gamma) for e in model.entries],
            mu=model.mu,
            phi_upper=upper,
        )


class DomainSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    a: float
    b: float
    npoints: int = Field(ge=16)

    @model_validator(mode="after")
    def _order(self):
        if not self.a < self.b:
            raise ValueError("domain needs a < b")
        return self


class Tolerances(BaseModel):
    model_config = ConfigDict(extra="forbid")

    identity: float = 1e-9          # C_k constancy and prediction
    partner: float = 1e-10          # V_k^+ vs V_{k+1}^- + C_k
    fd_step: float = 1e-3           # finite-difference step for residual checks
    fd_order_low: float = 3.2       # accepted window for the h -> h/2 error ratio
    fd_order_high: float = 4.8
    zero_mode: float = 1e-6         # |a_k psi| / |psi|
    rayleigh: float = 1e-3          # zero-mode Rayleigh quotient vs lowest eigenvalue
    spectrum_rel: float = 2e-2      # eigenvalue vs ladder, relative to max(|E|, 1)
    ladder: float = 2e-2            # excited-state Rayleigh quotient vs ladder, absolute
    orthogonality: float = 1e-4


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: Literal["1"] = SCHEMA_VERSION
    name: str = "scenario"
    model: ModelSpec
    k: float
    shift: float = 0.0
    domain: DomainSpec
    tasks: list[Literal["verify", "spectrum", "groundstate", "ladder"]] = Field(
        default_factory=lambda: list(TASK_ORDER), min_length=1)
    levels: int = Field(default=4, ge=1)
    tolerances: Tolerances = Field(default_factory=Tolerances)

    def to_model(self) -> Model:
        return self.model.to_model()


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def parse_config(text: str | dict) -> ScenarioConfig:
    try:
        if isinstance(text, dict):
            return ScenarioConfig.model_validate(text)
        return ScenarioConfig.model_validate_json(text)
    except (ValidationError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def dump_config(cfg: ScenarioConfig) -> str:
    return cfg.model_dump_json(indent=2, by_alias=True)


def example_model(mu_ex: float, phi_ex: float) -> Model:
    """Two-channel rational model with ``Q = diag(-1/x, 0)`` and
    ``P = [[mu_ex x/2 - 1/(2x), -phi_ex/sqrt(x)], [-phi_ex/sqrt(x), mu_ex x]]``.

    It is the ``nu = 0`` family taken with ``mu = -mu_ex``, ``gamma_1 = 0``,
    ``phi_11 = -1/2``, ``phi_12 = -phi_ex`` and ``phi_22 = 0``.
    """
    phi = np.array([[-0.5, -phi_ex], [-phi_ex, 0.0]], dtype=complex)
    return Model(NuClass.zero(), (QEntry("inv_pole", 0.0), QEntry("zero")), -mu_ex, phi)


def builtin_example(mu_ex: float = 1.0, phi_ex: float = 0.5, k: float = 0.3) -> ScenarioConfig:
    """The ``example-ps`` scenario; the constant shift is ``mu_ex``."""
    if not (math.isfinite(mu_ex) and mu_ex > 0):
        raise ConfigError("mu_ex must be positive")
    if not (math.isfinite(k) and k > 0):
        raise ConfigError("k must be positive")
    if not math.isfinite(phi_ex):
        raise ConfigError("phi_ex must be finite")
    model = example_model(mu_ex, phi_ex)
    return ScenarioConfig(
        name="example-ps",
        model=ModelSpec.from_model(model),
        k=k,
        shift=mu_ex,
        domain=DomainSpec(a=1e-3, b=12 / math.sqrt(mu_ex), npoints=1500),
        levels=4,
    )


def config_to_json(cfg: ScenarioConfig) -> dict:
    return json.loads(dump_config(cfg))
