"""Named parameter presets shipped with the CLI."""
from __future__ import annotations

from dataclasses import dataclass

from .core import ModelParams

__all__ = ["Preset", "MODEL_PRESETS"]


@dataclass(frozen=True)
class Preset:
    params: ModelParams
    t: float


MODEL_PRESETS = {
    "model1": Preset(ModelParams(mu_minus=-0.1, mu_plus=0.1, beta=0.3), t=2.0),
    "model2": Preset(ModelParams(mu_minus=2.0, mu_plus=-4.0, beta=0.7), t=2.0),
    "model3": Preset(ModelParams(mu_minus=1.0, mu_plus=3.0, beta=-0.1), t=1.0),
    "model4": Preset(ModelParams(mu_minus=-2.0, mu_plus=-3.0, beta=0.9), t=3.0),
}
