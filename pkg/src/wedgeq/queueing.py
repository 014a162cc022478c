"""Single-server waiting-time formulas.

A server of capacity ``C`` works through attention-hours at rate C per hour,
so a task needing T attention-hours occupies it for T / C wall-clock hours.
With Poisson arrivals at rate lambda the mean queueing delay is exact:

    Wq = lambda * q / (2 C (C - lambda m))

where (m, q) are the first two raw moments of the attention requirement.
For renewal arrivals with squared CV ``c2_a`` the same quantity is
approximated by scaling the exact result by (c2_a + c2_s) / (1 + c2_s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import StabilityError, ValidationError
from .service_model import RouteMoments

# Loads within this margin of 1 are treated as unstable: beyond it the
# waiting-time formulas lose all significance anyway.
EPS_RHO = 1e-9


@dataclass(frozen=True)
class QueueInputs:
    """Arrival rate, server capacity, service moments, arrival variability."""

    lam: float
    capacity: float
    service: RouteMoments
    c2_a: float = 1.0

    def __post_init__(self):
        for field in ("lam", "capacity", "c2_a"):
            value = getattr(self, field)
            if not math.isfinite(value):
                raise ValidationError(f"{field} must be finite, got {value!r}", field=field)
        if self.lam <= 0.0:
            raise ValidationError(f"lam must be > 0, got {self.lam}", field="lam")
        if self.capacity <= 0.0:
            raise ValidationError(f"capacity must be > 0, got {self.capacity}", field="capacity")
        if self.c2_a < 0.0:
            raise ValidationError(f"c2_a must be >= 0, got {self.c2_a}", field="c2_a")
        if self.service.mean <= 0.0:
            raise ValidationError(
                "service mean must be > 0 for waiting-time analysis", field="service.mean"
            )


@dataclass(frozen=True)
class WaitResult:
    """Mean queueing delay and its context."""

    rho: float
    wq: float
    total_sojourn: float
    method: str
    approximate: bool


def utilization(inputs: QueueInputs) -> float:
    """Offered load rho = lambda * m / C (no stability requirement)."""
    return inputs.lam * inputs.service.mean / inputs.capacity


def _checked_utilization(inputs: QueueInputs) -> float:
    rho = utilization(inputs)
    if rho >= 1.0 - EPS_RHO:
        raise StabilityError(
            f"offered load rho={rho:.6g} is at or beyond capacity; "
            "the queue has no stationary waiting time",
            rho=rho,
        )
    return rho


def wq_pk(inputs: QueueInputs) -> WaitResult:
    """Exact mean delay for Poisson arrivals (raw-moment form)."""
    rho = _checked_utilization(inputs)
    m = inputs.service.mean
    q = inputs.service.m2
    wq = inputs.lam * q / (2.0 * inputs.capacity * (inputs.capacity - inputs.lam * m))
    return WaitResult(
        rho=rho,
        wq=wq,
        total_sojourn=wq + m / inputs.capacity,
        method="pollaczek-khinchine",
        approximate=False,
    )


def wq_kingman(inputs: QueueInputs) -> WaitResult:
    """Heavy-traffic approximation for renewal arrivals with squared CV c2_a.

    Computed as the exact Poisson-arrival delay rescaled by
    (c2_a + c2_s) / (1 + c2_s), so c2_a == 1 reproduces ``wq_pk`` bit for
    bit and c2_a == c2_s == 0 gives exactly zero delay.
    """
    base = wq_pk(inputs)
    c2_s = inputs.service.c2
    wq = base.wq * (inputs.c2_a + c2_s) / (1.0 + c2_s)
    return WaitResult(
        rho=base.rho,
        wq=wq,
        total_sojourn=wq + inputs.service.mean / inputs.capacity,
        method="kingman",
        approximate=True,
    )
