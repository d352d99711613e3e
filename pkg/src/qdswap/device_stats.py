"""Device populations: (truncated) Gaussian parameter laws, fitting, resonance odds."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import truncnorm

from .cascade import QdParams


@dataclass(frozen=True)
class GaussianSpec:
    mu: float
    sigma: float
    lower: float | None = None
    upper: float | None = None

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError("sigma must be non-negative")
        if self.lower is not None and self.upper is not None and not self.lower < self.upper:
            raise ValueError("lower bound must be below upper bound")
        if self.sigma == 0 and not self._inside(self.mu):
            raise ValueError("a zero-width distribution needs mu inside its bounds")

    @property
    def truncated(self) -> bool:
        return self.lower is not None or self.upper is not None

    def _inside(self, x) -> bool:
        lo = -math.inf if self.lower is None else self.lower
        hi = math.inf if self.upper is None else self.upper
        return lo <= x <= hi

    def _std_bounds(self) -> tuple[float, float]:
        a = -math.inf if self.lower is None else (self.lower - self.mu) / self.sigma
        b = math.inf if self.upper is None else (self.upper - self.mu) / self.sigma
        return a, b

    def pdf(self, x):
        if self.sigma == 0:
            raise ValueError("density undefined for sigma = 0")
        x = np.asarray(x, dtype=float)
        z = (x - self.mu) / self.sigma
        p = np.exp(-0.5 * z**2) / (math.sqrt(2.0 * math.pi) * self.sigma)
        if not self.truncated:
            return p
        a, b = self._std_bounds()
        mass = ndtr(b) - ndtr(a)
        return np.where((z >= a) & (z <= b), p / mass, 0.0)

    def mean(self) -> float:
        if self.sigma == 0 or not self.truncated:
            return float(self.mu)
        a, b = self._std_bounds()
        return float(truncnorm.mean(a, b, loc=self.mu, scale=self.sigma))

    def ppf(self, u):
        """Inverse CDF; exact inside the truncation interval."""
        u = np.asarray(u, dtype=float)
        if self.sigma == 0:
            return np.full(u.shape, float(self.mu))
        if not self.truncated:
            return self.mu + self.sigma * ndtri(u)
        a, b = self._std_bounds()
        return truncnorm.ppf(u, a, b, loc=self.mu, scale=self.sigma)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.ppf(rng.random(n))

    def with_sigma(self, sigma: float) -> GaussianSpec:
        return replace(self, sigma=sigma)


def _positive(mu: float, sigma: float) -> GaussianSpec:
    # strictly positive quantities are cut at 1% of their mean
    return GaussianSpec(mu, sigma, lower=0.01 * mu)


@dataclass(frozen=True)
class ParamDistributions:
    """Population of emitters; defaults are the model's initial values.

    Units: wavelength nm, fss ueV, lifetimes and dephasing time ns.
    """

    wavelength_x: GaussianSpec = field(default_factory=lambda: GaussianSpec(777.85, 2.19))
    fss: GaussianSpec = field(default_factory=lambda: GaussianSpec(11.0, 6.5, lower=0.0))
    t1_x: GaussianSpec = field(default_factory=lambda: _positive(0.300, 0.050))
    t1_xx: GaussianSpec = field(default_factory=lambda: _positive(0.150, 0.025))
    t2_star: GaussianSpec = field(default_factory=lambda: _positive(0.5, 0.25))

    FIELDS = ("wavelength_x", "fss", "t1_x", "t1_xx", "t2_star")

    def zero_sigma(self) -> ParamDistributions:
        return replace(self, **{f: getattr(self, f).with_sigma(0.0) for f in self.FIELDS})

    def sample(self, rng: np.random.Generator, n: int) -> QdParams:
        """Draw ``n`` devices; one uniform array per field, always in FIELDS order."""
        values = {f: getattr(self, f).sample(rng, n) for f in self.FIELDS}
        return QdParams(**values, on_fraction=np.ones(n))

    def means(self) -> QdParams:
        return QdParams(**{f: getattr(self, f).mean() for f in self.FIELDS})


def gaussian_pdf(spec: GaussianSpec, x):
    return spec.pdf(x)


def fit_gaussian(samples) -> GaussianSpec:
    """Maximum-likelihood normal fit (population standard deviation, ddof=0).

    Truncation is ignored even if the data came from a truncated law.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("need at least two samples to fit a Gaussian")
    return GaussianSpec(float(x.mean()), float(x.std()))


def resonance_probability(a: GaussianSpec, b: GaussianSpec, tune_a: float, tune_b: float) -> float:
    """Probability that two random emitters can be tuned onto each other.

    Resonance means the tuning intervals overlap, |lambda_A - lambda_B| <= tune_a + tune_b;
    the wavelength difference is normal with mean mu_A - mu_B and variance
    sigma_A^2 + sigma_B^2. Truncation bounds of the specs are ignored.
    """
    if tune_a < 0 or tune_b < 0:
        raise ValueError("tuning ranges must be non-negative")
    delta = tune_a + tune_b
    dmu = a.mu - b.mu
    sd = math.hypot(a.sigma, b.sigma)
    if sd == 0:
        return 1.0 if abs(dmu) <= delta else 0.0
    return float(ndtr((delta - dmu) / sd) - ndtr((-delta - dmu) / sd))


def load_samples_csv(path) -> tuple[np.ndarray, str]:
    """Read one value per line after a header naming the quantity and its unit.

    Returns ``(values, header)``.
    """
    with Path(path).open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and r[0].strip()]
    if not rows:
        raise ValueError(f"{path}: empty sample file")
    header = rows[0][0].strip()
    try:
        values = np.array([float(r[0]) for r in rows[1:]])
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric sample ({exc})") from None
    return values, header
