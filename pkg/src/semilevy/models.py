"""Catalog of Levy process building blocks.

Every model pairs an exact increment sampler with a closed-form
characteristic exponent psi, normalized so that

    E[exp(i <z, L_t>)] = exp(t * psi(z)),   psi(0) = 0,   Re psi <= 0.

Increments are drawn exactly in law (no Euler stepping), so path and walk
statistics built on top carry no discretization bias.  Models are immutable
and safe to share between threads; every sampling call takes the numpy
Generator it should consume, there is no hidden global state.

Jump distributions for the compound Poisson model come from a small closed
catalog (point mass, uniform box, Gaussian, two-sided exponential) so that
their Fourier transforms and moments stay in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

import numpy as np

from .util import arrays_equal

__all__ = [
    "DimensionMismatch",
    "PointMass",
    "UniformJump",
    "GaussianJump",
    "LaplaceJump",
    "JumpDistribution",
    "LevyModel",
    "BrownianDrift",
    "SymmetricStable",
    "CompoundPoisson",
    "PureDrift",
    "SumModel",
    "char_exponent",
    "sample_increment",
    "mean",
    "covariance",
    "scale_time",
]

# tolerance of the positive-semidefinite acceptance check for covariances
PSD_TOL = 1e-10


class DimensionMismatch(ValueError):
    """An argument's dimension disagrees with the model's."""


def _vector(x, name: str = "value") -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise ValueError(f"{name} must be a scalar or a 1-d vector")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite")
    return v.copy()


def _psd_matrix(m, dim: int, name: str = "cov") -> np.ndarray:
    """Validate a covariance: symmetric positive semi-definite to PSD_TOL."""
    a = np.asarray(m, dtype=float)
    if a.ndim == 0:
        a = float(a) * np.eye(dim)
    elif a.ndim == 1:
        if a.shape[0] != dim:
            raise DimensionMismatch(f"{name} diagonal has length {a.shape[0]}, expected {dim}")
        a = np.diag(a)
    if a.shape != (dim, dim):
        raise DimensionMismatch(f"{name} must be {dim}x{dim}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a - a.T).max() > PSD_TOL * scale:
        raise ValueError(f"{name} must be symmetric")
    a = 0.5 * (a + a.T)
    w = np.linalg.eigvalsh(a)
    if w.min() < -PSD_TOL * scale:
        raise ValueError(f"{name} must be positive semi-definite (min eigenvalue {w.min():g})")
    return a


def _factor(a: np.ndarray) -> np.ndarray:
    # sampling factor L with L @ L.T = a; eigen-based so singular PSD works
    w, v = np.linalg.eigh(a)
    return v * np.sqrt(np.clip(w, 0.0, None))


def _as_points(z, dim: int) -> tuple[np.ndarray, bool]:
    """Normalize z to an (m, dim) array; also report whether input was a single point."""
    pts = np.asarray(z, dtype=float)
    if pts.ndim == 0:
        if dim != 1:
            raise DimensionMismatch(f"scalar z given to a model of dimension {dim}")
        return pts.reshape(1, 1), True
    if pts.ndim == 1:
        if pts.shape[0] != dim:
            raise DimensionMismatch(f"z has dimension {pts.shape[0]}, model has {dim}")
        return pts.reshape(1, dim), True
    if pts.ndim == 2:
        if pts.shape[1] != dim:
            raise DimensionMismatch(f"z points have dimension {pts.shape[1]}, model has {dim}")
        return pts, False
    raise ValueError("z must be a scalar, a d-vector, or an (m, d) array of points")


# ---------------------------------------------------------------------------
# jump catalog
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PointMass:
    """Deterministic jump of a fixed size."""

    x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _vector(self.x, "x"))

    @property
    def dim(self) -> int:
        return self.x.shape[0]

    def char_function(self, pts: np.ndarray) -> np.ndarray:
        return np.exp(1j * (pts @ self.x))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.broadcast_to(self.x, (size, self.dim)).copy()

    def mean(self) -> np.ndarray:
        return self.x.copy()

    def second_moment(self) -> np.ndarray:
        return np.outer(self.x, self.x)

    def __eq__(self, other):
        return isinstance(other, PointMass) and arrays_equal(self.x, other.x)


@dataclass(frozen=True, eq=False)
class UniformJump:
    """Uniform jump on the box [lo, hi], coordinates independent."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = _vector(self.lo, "lo")
        hi = _vector(self.hi, "hi")
        if lo.shape != hi.shape:
            raise DimensionMismatch("lo and hi must have the same length")
        if np.any(hi < lo):
            raise ValueError("hi must be >= lo componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    def char_function(self, pts: np.ndarray) -> np.ndarray:
        mid = 0.5 * (self.lo + self.hi)
        width = self.hi - self.lo
        # per coordinate: exp(i z mu) * sin(z w / 2) / (z w / 2)
        smooth = np.sinc(pts * width / (2.0 * np.pi))
        return np.exp(1j * (pts @ mid)) * np.prod(smooth, axis=1)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(size, self.dim))

    def mean(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def second_moment(self) -> np.ndarray:
        mid = self.mean()
        var = (self.hi - self.lo) ** 2 / 12.0
        return np.diag(var) + np.outer(mid, mid)

    def __eq__(self, other):
        return (
            isinstance(other, UniformJump)
            and arrays_equal(self.lo, other.lo)
            and arrays_equal(self.hi, other.hi)
        )


@dataclass(frozen=True, eq=False)
class GaussianJump:
    """Gaussian jump with mean mu and covariance cov."""

    mu: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mu = _vector(self.mu, "mu")
        cov = _psd_matrix(self.cov, mu.shape[0], "cov")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mu.shape[0]

    @cached_property
    def _chol(self) -> np.ndarray:
        return _factor(self.cov)

    def char_function(self, pts: np.ndarray) -> np.ndarray:
        quad = np.einsum("ij,jk,ik->i", pts, self.cov, pts)
        return np.exp(1j * (pts @ self.mu) - 0.5 * quad)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.mu + rng.standard_normal((size, self.dim)) @ self._chol.T

    def mean(self) -> np.ndarray:
        return self.mu.copy()

    def second_moment(self) -> np.ndarray:
        return self.cov + np.outer(self.mu, self.mu)

    def __eq__(self, other):
        return (
            isinstance(other, GaussianJump)
            and arrays_equal(self.mu, other.mu)
            and arrays_equal(self.cov, other.cov)
        )


@dataclass(frozen=True, eq=False)
class LaplaceJump:
    """Two-sided exponential jump, coordinates independent.

    Coordinate j has density exp(-|x - loc_j| / scale_j) / (2 scale_j).
    """

    loc: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        loc = _vector(self.loc, "loc")
        scale = _vector(self.scale, "scale")
        if scale.shape == (1,) and loc.shape[0] > 1:
            scale = np.full_like(loc, scale[0])
        if loc.shape != scale.shape:
            raise DimensionMismatch("loc and scale must have the same length")
        if np.any(scale <= 0):
            raise ValueError("scale must be positive")
        object.__setattr__(self, "loc", loc)
        object.__setattr__(self, "scale", scale)

    @property
    def dim(self) -> int:
        return self.loc.shape[0]

    def char_function(self, pts: np.ndarray) -> np.ndarray:
        factors = 1.0 / (1.0 + (pts * self.scale) ** 2)
        return np.exp(1j * (pts @ self.loc)) * np.prod(factors, axis=1)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.laplace(self.loc, self.scale, size=(size, self.dim))

    def mean(self) -> np.ndarray:
        return self.loc.copy()

    def second_moment(self) -> np.ndarray:
        return np.diag(2.0 * self.scale**2) + np.outer(self.loc, self.loc)

    def __eq__(self, other):
        return (
            isinstance(other, LaplaceJump)
            and arrays_equal(self.loc, other.loc)
            and arrays_equal(self.scale, other.scale)
        )


JumpDistribution = Union[PointMass, UniformJump, GaussianJump, LaplaceJump]


# ---------------------------------------------------------------------------
# stable variate generation
# ---------------------------------------------------------------------------


def _standard_symmetric_stable(alpha: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """Symmetric alpha-stable draw with characteristic function exp(-|z|**alpha).

    Trigonometric transform of a uniform angle and an exponential variate;
    exact in law for alpha in (0, 2).
    """
    phi = rng.uniform(-np.pi / 2.0, np.pi / 2.0, size)
    if alpha == 1.0:
        return np.tan(phi)
    w = rng.exponential(1.0, size)
    return (
        np.sin(alpha * phi)
        / np.cos(phi) ** (1.0 / alpha)
        * (np.cos((1.0 - alpha) * phi) / w) ** ((1.0 - alpha) / alpha)
    )


def _positive_stable(a: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """Positive a-stable draw with Laplace transform exp(-u**a), a in (0, 1)."""
    u = rng.uniform(0.0, np.pi, size)
    w = rng.exponential(1.0, size)
    su = np.maximum(np.sin(u), 1e-300)
    ratio = np.sin(a * u) ** a * np.sin((1.0 - a) * u) ** (1.0 - a) / su
    return ratio ** (1.0 / a) / w ** ((1.0 - a) / a)


# ---------------------------------------------------------------------------
# model catalog
# ---------------------------------------------------------------------------


class LevyModel:
    """Base class of the catalog; subclasses fill in the sampling/transform hooks."""

    dim: int

    # -- public surface ------------------------------------------------

    def char_exponent(self, z):
        """psi(z) with E[exp(i<z, L_t>)] = exp(t psi(z)).

        Accepts a scalar (dim 1), a d-vector, or an (m, d) array of points;
        returns a complex scalar or an (m,) complex array accordingly.
        """
        pts, single = _as_points(z, self.dim)
        vals = self._exponent(pts)
        return complex(vals[0]) if single else vals

    def sample_increment(self, dt: float, rng: np.random.Generator, size: Optional[int] = None):
        """Exact draw(s) of L_{t+dt} - L_t; a (d,) vector, or (size, d) when size is given."""
        if not dt > 0:
            raise ValueError("dt must be positive")
        n = 1 if size is None else int(size)
        draws = self._sample_batch(np.full(n, float(dt)), rng)
        return draws[0] if size is None else draws

    def mean(self, t: float) -> Optional[np.ndarray]:
        """t * E[L_1] when the first absolute moment is finite, else None.

        None is a value, not an error: it encodes E[|L_1|] = infinity and
        downstream criteria branch on it.
        """
        mu = self._unit_mean()
        return None if mu is None else mu * float(t)

    def covariance(self, t: float) -> Optional[np.ndarray]:
        """Covariance matrix of L_t when second moments are finite, else None."""
        c = self._unit_cov()
        return None if c is None else c * float(t)

    def scaled(self, s: float) -> "LevyModel":
        """Model with exponent s * psi, i.e. the process run at speed s."""
        raise NotImplementedError

    # -- hooks -----------------------------------------------------------

    def _exponent(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _sample_batch(self, dts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Independent increments with durations dts (k,); returns (k, d)."""
        raise NotImplementedError

    def _unit_mean(self) -> Optional[np.ndarray]:
        raise NotImplementedError

    def _unit_cov(self) -> Optional[np.ndarray]:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class BrownianDrift(LevyModel):
    """Brownian motion with drift vector and covariance matrix."""

    drift: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        drift = _vector(self.drift, "drift")
        cov = _psd_matrix(self.cov, drift.shape[0], "cov")
        object.__setattr__(self, "drift", drift)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.drift.shape[0]

    @cached_property
    def _chol(self) -> np.ndarray:
        return _factor(self.cov)

    def _exponent(self, pts):
        quad = np.einsum("ij,jk,ik->i", pts, self.cov, pts)
        return 1j * (pts @ self.drift) - 0.5 * quad

    def _sample_batch(self, dts, rng):
        noise = rng.standard_normal((dts.shape[0], self.dim)) @ self._chol.T
        return dts[:, None] * self.drift + np.sqrt(dts)[:, None] * noise

    def _unit_mean(self):
        return self.drift.copy()

    def _unit_cov(self):
        return self.cov.copy()

    def scaled(self, s):
        return BrownianDrift(self.drift * s, self.cov * s)

    def __eq__(self, other):
        return (
            isinstance(other, BrownianDrift)
            and arrays_equal(self.drift, other.drift)
            and arrays_equal(self.cov, other.cov)
        )


@dataclass(frozen=True, eq=False)
class SymmetricStable(LevyModel):
    """Rotation-invariant symmetric stable process, psi(z) = -scale * |z|**alpha.

    alpha = 1 is the symmetric Cauchy process; alpha = 2 is Brownian motion
    with per-coordinate variance 2 * scale * t and is sampled on the Gaussian
    path.  The first absolute moment is finite only for alpha > 1.
    """

    alpha: float
    scale: float = 1.0
    dim: int = 1

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError("alpha must be in (0, 2]")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")

    def _exponent(self, pts):
        norms = np.linalg.norm(pts, axis=1)
        return -self.scale * norms**self.alpha + 0j

    def _sample_batch(self, dts, rng):
        k = dts.shape[0]
        if self.alpha == 2.0:
            return np.sqrt(2.0 * self.scale * dts)[:, None] * rng.standard_normal((k, self.dim))
        s = (self.scale * dts) ** (1.0 / self.alpha)
        if self.dim == 1:
            return (s * _standard_symmetric_stable(self.alpha, rng, k))[:, None]
        # subordination: sqrt(2 A) N(0, I) is standard isotropic alpha-stable
        # when A is positive (alpha/2)-stable with transform exp(-u**(alpha/2))
        sub = _positive_stable(self.alpha / 2.0, rng, k)
        noise = rng.standard_normal((k, self.dim))
        return (s * np.sqrt(2.0 * sub))[:, None] * noise

    def _unit_mean(self):
        if self.alpha > 1.0:
            return np.zeros(self.dim)
        return None

    def _unit_cov(self):
        if self.alpha == 2.0:
            return 2.0 * self.scale * np.eye(self.dim)
        return None

    def scaled(self, s):
        return SymmetricStable(self.alpha, self.scale * s, self.dim)

    def __eq__(self, other):
        return (
            isinstance(other, SymmetricStable)
            and self.alpha == other.alpha
            and self.scale == other.scale
            and self.dim == other.dim
        )


@dataclass(frozen=True, eq=False)
class CompoundPoisson(LevyModel):
    """Compound Poisson process: jumps from `jump` arriving at rate `rate`."""

    rate: float
    jump: JumpDistribution

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be positive")

    @property
    def dim(self) -> int:
        return self.jump.dim

    def _exponent(self, pts):
        return self.rate * (self.jump.char_function(pts) - 1.0)

    def _sample_batch(self, dts, rng):
        counts = rng.poisson(self.rate * dts)
        total = int(counts.sum())
        if total == 0:
            return np.zeros((dts.shape[0], self.dim))
        jumps = self.jump.sample(rng, total)
        cum = np.vstack([np.zeros((1, self.dim)), np.cumsum(jumps, axis=0)])
        ends = np.cumsum(counts)
        starts = ends - counts
        return cum[ends] - cum[starts]

    def _unit_mean(self):
        return self.rate * self.jump.mean()

    def _unit_cov(self):
        return self.rate * self.jump.second_moment()

    def scaled(self, s):
        return CompoundPoisson(self.rate * s, self.jump)

    def __eq__(self, other):
        return (
            isinstance(other, CompoundPoisson)
            and self.rate == other.rate
            and self.jump == other.jump
        )


@dataclass(frozen=True, eq=False)
class PureDrift(LevyModel):
    """Deterministic linear drift, L_t = gamma * t."""

    gamma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gamma", _vector(self.gamma, "gamma"))

    @property
    def dim(self) -> int:
        return self.gamma.shape[0]

    def _exponent(self, pts):
        return 1j * (pts @ self.gamma)

    def _sample_batch(self, dts, rng):
        return dts[:, None] * self.gamma

    def _unit_mean(self):
        return self.gamma.copy()

    def _unit_cov(self):
        return np.zeros((self.dim, self.dim))

    def scaled(self, s):
        return PureDrift(self.gamma * s)

    def __eq__(self, other):
        return isinstance(other, PureDrift) and arrays_equal(self.gamma, other.gamma)


@dataclass(frozen=True, eq=False)
class SumModel(LevyModel):
    """Independent sum of catalog models sharing one dimension."""

    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("SumModel needs at least one component")
        dims = {c.dim for c in comps}
        if len(dims) != 1:
            raise DimensionMismatch(f"components disagree on dimension: {sorted(dims)}")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def _exponent(self, pts):
        out = np.zeros(pts.shape[0], dtype=complex)
        for c in self.components:
            out += c._exponent(pts)
        return out

    def _sample_batch(self, dts, rng):
        out = np.zeros((dts.shape[0], self.dim))
        for c in self.components:
            out += c._sample_batch(dts, rng)
        return out

    def _unit_mean(self):
        total = np.zeros(self.dim)
        for c in self.components:
            mu = c._unit_mean()
            if mu is None:
                return None
            total += mu
        return total

    def _unit_cov(self):
        total = np.zeros((self.dim, self.dim))
        for c in self.components:
            cov = c._unit_cov()
            if cov is None:
                return None
            total += cov
        return total

    def scaled(self, s):
        return SumModel(tuple(c.scaled(s) for c in self.components))

    def __eq__(self, other):
        return isinstance(other, SumModel) and self.components == other.components


# ---------------------------------------------------------------------------
# functional aliases
# ---------------------------------------------------------------------------


def char_exponent(model: LevyModel, z):
    """Characteristic exponent psi(z) of the model."""
    return model.char_exponent(z)


def sample_increment(model: LevyModel, dt: float, rng: np.random.Generator, size: Optional[int] = None):
    """Exact increment draw(s) of duration dt."""
    return model.sample_increment(dt, rng, size)


def mean(model: LevyModel, t: float) -> Optional[np.ndarray]:
    """E[L_t], or None when the first absolute moment is infinite."""
    return model.mean(t)


def covariance(model: LevyModel, t: float) -> Optional[np.ndarray]:
    """Cov(L_t), or None when second moments are infinite."""
    return model.covariance(t)


def scale_time(model: LevyModel, s: float) -> LevyModel:
    """Model whose exponent is s * psi, i.e. the original run at speed s."""
    if not s > 0:
        raise ValueError("time scale must be positive")
    return model.scaled(float(s))
