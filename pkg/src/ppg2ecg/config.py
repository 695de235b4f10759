from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from .errors import InvalidConfig
from .signal_model import SCHEMES

PEAK_SOURCES = ("annotations", "detector", "auto")


@dataclass(frozen=True)
class PipelineConfig:
    """Hyperparameters of the subject-dependent reconstruction pipeline."""

    scheme: str = "R2R"
    L: int = 300
    L_x: int = 12
    L_y: int = 100
    lambda_detrend: float = 500.0
    gamma: float = 10.0
    k: int = 5
    train_fraction: float = 0.8
    peak_source: str = "auto"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise InvalidConfig(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.peak_source not in PEAK_SOURCES:
            raise InvalidConfig(f"peak_source must be one of {PEAK_SOURCES}")
        if not 2 <= self.L:
            raise InvalidConfig("L must be at least 2")
        if not 1 <= self.L_x <= self.L_y <= self.L:
            raise InvalidConfig(f"need 1 <= L_x <= L_y <= L, got {self.L_x}, {self.L_y}, {self.L}")
        if not self.lambda_detrend > 0:
            raise InvalidConfig("lambda_detrend must be positive")
        if not self.gamma >= 0:
            raise InvalidConfig("gamma must be nonnegative")
        if self.k < 0:
            raise InvalidConfig("k must be nonnegative")
        if not 0 < self.train_fraction < 1:
            raise InvalidConfig("train_fraction must lie in (0, 1)")

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidConfig(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)
