"""Admissible boundary penalizations and their scaling law.

The canonical family is beta_eps(t) = t/eps for t < 0 and 0 for t >= 0:
a nonpositive, nondecreasing, concave, uniformly Lipschitz reaction whose
strength grows as eps -> 0.  Composing with a dilation t -> sigma*t stays
in the family with parameter eps/sigma.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CANONICAL_LINEAR = "canonical-linear"


@dataclass(frozen=True)
class Penalization:
    epsilon: float
    kind: str = CANONICAL_LINEAR

    def __post_init__(self):
        if self.kind != CANONICAL_LINEAR:
            raise ValueError(f"unknown penalization kind: {self.kind}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t < 0.0, t / self.epsilon, 0.0)
        return out if out.ndim else float(out)

    def derivative(self, t):
        """Slope of the reaction; right-derivative convention 0 at t = 0."""
        t = np.asarray(t, dtype=float)
        out = np.where(t < 0.0, 1.0 / self.epsilon, 0.0)
        return out if out.ndim else float(out)

    __call__ = evaluate


def beta_eval(p: Penalization, t):
    return p.evaluate(t)


def beta_prime(p: Penalization, t):
    return p.derivative(t)


def rescale(p: Penalization, sigma: float) -> Penalization:
    """Parameter of the dilated reaction t -> beta_eps(sigma t).

    The identity beta_eval(p, sigma*t) == beta_eval(rescale(p, sigma), t)
    holds exactly for every t.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return Penalization(epsilon=p.epsilon / sigma, kind=p.kind)


@dataclass
class AdmissibilityReport:
    """Pass/fail per admissibility item, with a witness sample on failure."""

    items: dict = field(default_factory=dict)
    lipschitz_constant: float = np.inf

    ITEM_NAMES = (
        "uniform_lipschitz",
        "nonpositive",
        "vanishes_on_nonnegative",
        "nondecreasing",
        "concave",
    )

    @property
    def all_passed(self) -> bool:
        return all(passed for passed, _ in self.items.values())

    def failures(self):
        return {k: w for k, (passed, w) in self.items.items() if not passed}


def admissibility_check(beta, sample_range=(-2.0, 2.0), samples: int = 101,
                        slack: float = 1e-12) -> AdmissibilityReport:
    """Audit a penalization on a uniform sample set.

    beta may be a Penalization or any callable t -> beta(t).  Checks, with
    finite differences on the samples: a finite uniform Lipschitz ratio,
    beta <= 0, beta(t >= 0) = 0, nondecreasing values, and nonpositive
    second differences (concavity).  Failures carry the witness sample.
    """
    if samples < 3:
        raise ValueError("need at least 3 samples")
    fn = beta.evaluate if isinstance(beta, Penalization) else beta
    t = np.linspace(sample_range[0], sample_range[1], samples)
    v = np.array([float(fn(ti)) for ti in t])
    dt = t[1] - t[0]
    scale = max(1.0, float(np.max(np.abs(v))))

    report = AdmissibilityReport()
    ratios = np.abs(np.diff(v)) / dt
    lip = float(np.max(ratios)) if ratios.size else 0.0
    report.lipschitz_constant = lip
    report.items["uniform_lipschitz"] = (bool(np.all(np.isfinite(ratios))), None)

    bad = np.flatnonzero(v > slack * scale)
    report.items["nonpositive"] = (bad.size == 0, t[bad[0]] if bad.size else None)

    nonneg = t >= 0.0
    bad = np.flatnonzero(nonneg & (np.abs(v) > slack * scale))
    report.items["vanishes_on_nonnegative"] = (bad.size == 0,
                                               t[bad[0]] if bad.size else None)

    drops = np.flatnonzero(np.diff(v) < -slack * scale)
    report.items["nondecreasing"] = (drops.size == 0,
                                     t[drops[0]] if drops.size else None)

    second = v[2:] - 2.0 * v[1:-1] + v[:-2]
    bumps = np.flatnonzero(second > slack * scale * 4.0)
    report.items["concave"] = (bumps.size == 0,
                               t[bumps[0] + 1] if bumps.size else None)
    return report
