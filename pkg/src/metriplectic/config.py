"""Run configuration: a YAML document validated strictly (unknown keys rejected)."""

import hashlib
import json
from typing import List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator


class ConfigError(ValueError):
    """Invalid configuration; ``path`` is the dotted location of the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridConfig(_Strict):
    dims: List[int]
    lengths: Optional[List[float]] = None

    @model_validator(mode="after")
    def _shape(self):
        if not 1 <= len(self.dims) <= 3:
            raise ValueError("dims must list 1 to 3 axes")
        if any(n < 4 for n in self.dims):
            raise ValueError("each axis needs at least 4 nodes")
        if self.lengths is not None:
            if len(self.lengths) != len(self.dims):
                raise ValueError("lengths must match dims")
            if any(not x > 0 for x in self.lengths):
                raise ValueError("lengths must be positive")
        return self


class EOSConfig(_Strict):
    gamma: float = Field(1.4, gt=1.0)
    c_v: float = Field(1.0, gt=0.0)
    rho_ref: float = Field(1.0, gt=0.0)
    T_ref: float = Field(1.0, gt=0.0)
    s_ref: float = Field(1.0, gt=0.0)


class TransportConfig(_Strict):
    eta: float = Field(0.0, ge=0.0)
    zeta: float = Field(0.0, ge=0.0)
    kappa: Union[float, List[List[float]]] = 0.0
    lambda_: float = Field(1.0, gt=0.0, alias="lambda")

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    @field_validator("kappa")
    @classmethod
    def _kappa(cls, k):
        if isinstance(k, list):
            if len(k) != 3 or any(len(r) != 3 for r in k):
                raise ValueError("tensor kappa must be 3x3")
            if any(k[i][j] != k[j][i] for i in range(3) for j in range(3)):
                raise ValueError("tensor kappa must be symmetric (kappa_ij == kappa_ji)")
        elif k < 0:
            raise ValueError("kappa must be nonnegative")
        return k


class ProfileConfig(_Strict):
    kind: Literal["linear", "polynomial"] = "linear"
    coefficients: Optional[List[float]] = None

    @model_validator(mode="after")
    def _coeffs(self):
        c = self.coefficients
        if self.kind == "linear" and c is not None and len(c) != 1:
            raise ValueError("linear profile takes a single slope coefficient")
        if self.kind == "polynomial":
            if not c:
                raise ValueError("polynomial profile needs coefficients")
            if len(c) > 5:
                raise ValueError("polynomial profile degree must be at most 4")
        return self


class InitialConfig(_Strict):
    preset: Literal["uniform", "shear", "entropy_bump", "random"] = "uniform"
    amplitude: float = 0.1
    seed: Optional[int] = None


class IntegratorConfig(_Strict):
    dt: Union[Literal["auto"], float] = "auto"
    t_end: float = Field(1.0, gt=0.0)
    output_every: int = Field(1, ge=1)
    cfl: float = Field(0.4, gt=0.0)
    dfl: float = Field(0.25, gt=0.0)

    @field_validator("dt")
    @classmethod
    def _dt(cls, dt):
        if dt != "auto" and not dt > 0:
            raise ValueError("dt must be positive or 'auto'")
        return dt


class OutputConfig(_Strict):
    directory: str = "out"
    snapshot_every: int = Field(0, ge=0)


class CheckConfig(_Strict):
    n_samples: int = Field(50, ge=1)
    refine: List[int] = [8, 16, 32]


class RunConfig(_Strict):
    grid: GridConfig
    eos: EOSConfig = EOSConfig()
    transport: TransportConfig = TransportConfig()
    entropy_profile: ProfileConfig = ProfileConfig()
    initial_condition: InitialConfig = InitialConfig()
    integrator: IntegratorConfig = IntegratorConfig()
    heat_mode: Literal["bracket-consistent", "eq14"] = "bracket-consistent"
    output: OutputConfig = OutputConfig()
    check: CheckConfig = CheckConfig()
    seed: int = 0

    def digest(self):
        """SHA-256 of the canonical JSON form of the validated config."""
        blob = json.dumps(self.model_dump(mode="json", by_alias=True), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    # --- builders --------------------------------------------------------------

    def build_grid(self):
        from .grid import Grid

        lengths = self.grid.lengths or [1.0] * len(self.grid.dims)
        return Grid(tuple(self.grid.dims), tuple(lengths))

    def build_eos(self):
        from .thermo import EquationOfState

        return EquationOfState(**self.eos.model_dump())

    def build_transport(self):
        from .thermo import TransportCoefficients

        t = self.transport
        kappa = tuple(tuple(r) for r in t.kappa) if isinstance(t.kappa, list) else t.kappa
        return TransportCoefficients(eta=t.eta, zeta=t.zeta, kappa=kappa, lam=t.lambda_)

    def build_profile(self):
        from .functionals import EntropyProfile

        p = self.entropy_profile
        if p.kind == "linear":
            slope = p.coefficients[0] if p.coefficients else self.transport.lambda_
            return EntropyProfile.linear(slope)
        return EntropyProfile.polynomial(p.coefficients)

    def build_model(self):
        from .dynamics import Model

        return Model(self.build_eos(), self.build_transport(), self.build_profile(), self.heat_mode)


_TYPE_TAGS = ("float", "int", "str", "bool")


def _format_error(exc):
    err = exc.errors()[0]
    loc = []
    for part in err["loc"]:
        if isinstance(part, int):
            if loc:
                loc[-1] = f"{loc[-1]}[{part}]"
        elif part in _TYPE_TAGS or "[" in part or "(" in part:
            continue  # union branch tags
        else:
            loc.append(part)
    return ConfigError(".".join(loc), err["msg"])


def parse_config(data):
    if not isinstance(data, dict):
        raise ConfigError("", "config must be a mapping")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise _format_error(exc) from None


def load_config(path):
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError("", f"cannot read config: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError("", f"malformed YAML: {exc}") from None
    return parse_config(data)
