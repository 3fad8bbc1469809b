from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist


@dataclass(frozen=True)
class SampleSpec:
    population: int
    confidence: float = 0.99
    margin: float = 0.05
    proportion: float = 0.5

    def __post_init__(self):
        if self.population < 1:
            raise ValueError("population must be a positive integer")
        for name in ("confidence", "margin", "proportion"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name}={value} must lie strictly between 0 and 1")


def sample_size(spec: SampleSpec) -> int:
    """Cochran's sample size with finite-population correction, rounded up."""
    z = NormalDist().inv_cdf(1 - (1 - spec.confidence) / 2)
    p = spec.proportion
    n0 = z * z * p * (1 - p) / (spec.margin * spec.margin)
    n = n0 / (1 + (n0 - 1) / spec.population)
    # guard against 384.0000000001-style float noise before rounding up
    return math.ceil(round(n, 9))
