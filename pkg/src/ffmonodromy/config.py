"""Run configuration for the command-line experiments."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

from .errors import ValidationError

EXPERIMENTS = ("monodromy", "monodromy-nh", "compose", "embed3", "dh", "bs", "affine", "classify", "census")


@dataclass
class Tolerances:
    integer_snap: float = 1e-3
    delta: float = 1e-3
    quadrature: float = 1e-12
    degeneracy: float = 1e-8

    def validate(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValidationError(f"tolerance {f.name} must be positive")


@dataclass
class RunConfig:
    experiment: str
    system: str = "pendulum"
    potential: Optional[list] = None
    R: Optional[float] = None
    # loops
    center: Optional[list] = None
    radius: float = 0.3
    points: int = 64
    polygon: Optional[list] = None
    orientation: int = 1
    # dh
    cutoff: float = 1.5
    floor: Optional[object] = "auto"
    c_max: float = 0.2
    n_samples: int = 41
    mc_samples: int = 0
    # bs
    hbar: float = 0.05
    h_range: list = field(default_factory=lambda: [0.4, 1.6])
    j_range: list = field(default_factory=lambda: [-0.6, 0.6])
    hole_radius: float = 0.15
    loop_radius: float = 0.35
    # combinatorial
    k: int = 1
    winding: int = 1
    signs: list = field(default_factory=list)
    matrix: Optional[list] = None
    matrix_b: Optional[list] = None
    basis_a: str = "standard"
    basis_b: str = "standard"
    pole: str = "north"
    value: Optional[list] = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    seed: int = 0
    out: Optional[str] = None
    trace: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.tolerances, dict):
            self.tolerances = Tolerances(**self.tolerances)

    def validate(self) -> "RunConfig":
        if self.experiment not in EXPERIMENTS:
            raise ValidationError(f"unknown experiment {self.experiment!r}")
        self.tolerances.validate()
        if self.points < 4:
            raise ValidationError("a loop needs at least 4 points")
        if self.radius <= 0 or self.hbar <= 0 or self.c_max <= 0:
            raise ValidationError(f"radius={self.radius}, hbar={self.hbar}, c_max={self.c_max}: all must be positive")
        if self.orientation not in (1, -1):
            raise ValidationError("orientation must be +1 or -1")
        if self.pole not in ("north", "south"):
            raise ValidationError("pole must be north or south")
        return self

    def system_params(self) -> dict:
        params = {}
        if self.potential is not None:
            params["potential"] = tuple(float(x) for x in self.potential)
        if self.R is not None:
            params["R"] = float(self.R)
        return params

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d.pop("trace")
        return d

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)
