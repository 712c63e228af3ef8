"""Resolvent statistics: diagonal entries, Stieltjes traces, regime rescalings.

The central objects are the entry [G]_11 of G = (zI - M)^{-1} and the
normalized trace g^N(z) = (1/N) Tr G. The exact generative sampler uses the
finite-N variance law: draw t, then zeta ~ N_C(0, (1+t)/N), and return
1/(z + zeta), which reproduces the law of [G]_11 without touching a matrix.

Regime specifications couple a spectral point schedule |z|(N) to the affine
rescaling that makes the statistic converge:

    Bulk           fixed |z| < 1      Omega = ([G]_11 - conj(z)) / sqrt(1-|z|^2)
    InsideWindow   |z|^2 = 1 - g(N)   ([G]_11 - conj(z)) / sqrt(g(N))
    EdgeWindow     |z|^2 = 1 + a/vN   X = N^{1/4} ([G]_11 - 1/z)
    OutsideWindow  |z|^2 = 1 + f(N)   sqrt(N f(N) |z|^2) ([G]_11 - 1/z)
    Outside        fixed |z| > 1      sqrt(N |z|^2 (|z|^2 - 1)) ([G]_11 - 1/z)

Centering for the edge windows is 1/z (the two candidate centerings agree
at the resolved scaling order; reports carry the one used).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np
from scipy import linalg as sla

from . import densities
from .ensembles import EnsembleSpec
from .seeding import rng_from

__all__ = [
    "SolveRejectedError",
    "RegimeMismatchError",
    "PowerSchedule",
    "Bulk",
    "InsideWindow",
    "EdgeWindow",
    "OutsideWindow",
    "Outside",
    "RegimeSpec",
    "regime_point",
    "SampleBatch",
    "G11",
    "SCALED_G11",
    "STIELTJES",
    "SCALED_STIELTJES",
    "VARIANCE_T",
    "g11",
    "resolvent_diagonal",
    "stieltjes_trace",
    "sample_t_finiteN",
    "sample_g11_exact",
    "scaled_statistic",
    "stieltjes_fluctuation",
]


class SolveRejectedError(RuntimeError):
    """Resolvent solve rejected: singular to working precision or inaccurate."""


class RegimeMismatchError(ValueError):
    """Batch's spectral point is inconsistent with the regime specification."""


# statistic kinds carried by SampleBatch
G11 = "g11"
SCALED_G11 = "scaled_g11"
STIELTJES = "stieltjes_trace"
SCALED_STIELTJES = "scaled_stieltjes"
VARIANCE_T = "variance_t"


# ---------------------------------------------------------------------------
# regimes


@dataclass(frozen=True)
class PowerSchedule:
    """N -> coef * N**exponent, the shape every window schedule here takes."""

    coef: float
    exponent: float

    def __call__(self, N: int) -> float:
        return self.coef * float(N) ** self.exponent


@dataclass(frozen=True)
class Bulk:
    z: complex

    def __post_init__(self):
        if not abs(self.z) < 1.0:
            raise ValueError("Bulk regime requires |z| < 1")


@dataclass(frozen=True)
class InsideWindow:
    g: PowerSchedule
    phase: float = 0.0


@dataclass(frozen=True)
class EdgeWindow:
    alpha: float
    phase: float = 0.0


@dataclass(frozen=True)
class OutsideWindow:
    f: PowerSchedule
    phase: float = 0.0


@dataclass(frozen=True)
class Outside:
    z: complex

    def __post_init__(self):
        if not abs(self.z) > 1.0:
            raise ValueError("Outside regime requires |z| > 1")


RegimeSpec = Union[Bulk, InsideWindow, EdgeWindow, OutsideWindow, Outside]


def regime_point(regime: RegimeSpec, N: int) -> complex:
    """The spectral point z the regime prescribes at matrix size N."""
    if isinstance(regime, (Bulk, Outside)):
        return complex(regime.z)
    if isinstance(regime, InsideWindow):
        g = regime.g(N)
        if not 0.0 < g < 1.0:
            raise ValueError(f"InsideWindow needs 0 < g(N) < 1, got {g}")
        return math.sqrt(1.0 - g) * np.exp(1j * regime.phase)
    if isinstance(regime, EdgeWindow):
        m2 = 1.0 + regime.alpha / math.sqrt(N)
        if m2 <= 0.0:
            raise ValueError("EdgeWindow pushed |z|^2 below 0 at this N")
        return math.sqrt(m2) * np.exp(1j * regime.phase)
    if isinstance(regime, OutsideWindow):
        f = regime.f(N)
        if f <= 0.0:
            raise ValueError(f"OutsideWindow needs f(N) > 0, got {f}")
        return math.sqrt(1.0 + f) * np.exp(1j * regime.phase)
    raise TypeError(f"unsupported regime {regime!r}")


def _center_scale(regime: RegimeSpec, N: int, z: complex):
    """(center, scale) of the regime's affine statistic scale*(G - center)."""
    if isinstance(regime, Bulk):
        return np.conj(z), 1.0 / math.sqrt(1.0 - abs(z) ** 2)
    if isinstance(regime, InsideWindow):
        return np.conj(z), 1.0 / math.sqrt(regime.g(N))
    if isinstance(regime, EdgeWindow):
        return 1.0 / z, float(N) ** 0.25
    if isinstance(regime, OutsideWindow):
        return 1.0 / z, math.sqrt(N * regime.f(N) * abs(z) ** 2)
    if isinstance(regime, Outside):
        m2 = abs(z) ** 2
        return 1.0 / z, math.sqrt(N * m2 * (m2 - 1.0))
    raise TypeError(f"unsupported regime {regime!r}")


def _check_consistency(regime: RegimeSpec, N: int, z: complex):
    if isinstance(regime, EdgeWindow):
        # the eps(N) << N^{-1/2} window shares alpha = 0; allow o(N^{-1/2})
        # slack rather than demanding the exact alpha schedule
        slack = 0.75 / math.sqrt(N)
        if abs(abs(z) ** 2 - 1.0 - regime.alpha / math.sqrt(N)) > slack:
            raise RegimeMismatchError(
                f"batch at z={z} is not in the alpha={regime.alpha} edge window"
            )
        return
    expected = regime_point(regime, N)
    if abs(z - expected) > 1e-12 * (1.0 + abs(expected)):
        raise RegimeMismatchError(
            f"batch at z={z} does not match regime point {expected}"
        )


# ---------------------------------------------------------------------------
# batches


@dataclass
class SampleBatch:
    """Tagged collection of samples of one statistic.

    values has length = requested count minus samples rejected on every
    retry (n_rejected counts individual rejected solves, including ones
    that were successfully resampled).
    """

    statistic: str
    values: np.ndarray
    N: int
    z: complex
    seed: int
    ensemble: Optional[EnsembleSpec] = None
    regime: Optional[RegimeSpec] = None
    indices: range = field(default_factory=lambda: range(0))
    n_rejected: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.size and not np.all(np.isfinite(self.values)):
            raise ValueError("batch values must be finite")


# ---------------------------------------------------------------------------
# resolvent entries and traces


def _shifted(M: np.ndarray, z: complex) -> np.ndarray:
    a = -np.asarray(M, dtype=complex)
    idx = np.arange(a.shape[0])
    a[idx, idx] += z
    return a


def g11(M: np.ndarray, z: complex) -> complex:
    """[(zI - M)^{-1}]_{11} by a partial-pivot LU solve of one column.

    Raises SolveRejectedError when the solve is singular to working
    precision or its residual exceeds 1e-6 relative to the problem scale;
    callers resample with a fresh seed and record the rejection.
    """
    a = _shifted(M, z)
    b = np.zeros(a.shape[0], dtype=complex)
    b[0] = 1.0
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SolveRejectedError(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise SolveRejectedError("non-finite solution")
    resid = np.max(np.abs(a @ x - b))
    scale = 1.0 + np.max(np.abs(a)) * np.max(np.abs(x))
    if resid > 1e-6 * scale:
        raise SolveRejectedError(f"residual {resid:.2e} above tolerance")
    return complex(x[0])


def resolvent_diagonal(M: np.ndarray, z: complex) -> np.ndarray:
    """All diagonal entries of (zI - M)^{-1}: one LU factorization, N solves."""
    a = _shifted(M, z)
    n = a.shape[0]
    try:
        lu, piv = sla.lu_factor(a, check_finite=False)
    except ValueError as exc:
        raise SolveRejectedError(str(exc)) from exc
    pivots = np.abs(np.diagonal(lu))
    if pivots.min() < 1e-300:
        raise SolveRejectedError("pivot below 1e-300")
    inv = sla.lu_solve((lu, piv), np.eye(n, dtype=complex), check_finite=False)
    if not np.all(np.isfinite(inv)):
        raise SolveRejectedError("non-finite inverse")
    # spot residual on the first column
    resid = np.max(np.abs(a @ inv[:, 0] - np.eye(n, 1, dtype=complex).ravel()))
    if resid > 1e-6 * (1.0 + np.max(np.abs(a)) * np.max(np.abs(inv[:, 0]))):
        raise SolveRejectedError(f"residual {resid:.2e} above tolerance")
    return np.diagonal(inv).copy()


def stieltjes_trace(M: np.ndarray, z: complex) -> complex:
    """g^N(z) = (1/N) Tr (zI - M)^{-1}, the mean of the resolvent diagonal."""
    return complex(resolvent_diagonal(M, z).mean())


# ---------------------------------------------------------------------------
# exact generative sampler


def sample_t_finiteN(N: int, r: float, count: int, seed: int) -> np.ndarray:
    """Draws of the random variance t at size N and |z| = r."""
    return densities.sample(densities.FiniteNVarianceLaw(N, r), count, seed)


def sample_g11_exact(N: int, z: complex, count: int, seed: int) -> SampleBatch:
    """Exact sampler of the finite-N law of [G]_11 at spectral point z.

    Draws t from the finite-N variance law, zeta ~ N_C(0, (1+t)/N), and
    returns 1/(z + zeta). Degenerate |z + zeta| below 1e-300 is rejected
    and redrawn (probability ~ 0; counted in n_rejected).
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    z = complex(z)
    rng = rng_from(seed)
    law = densities.FiniteNVarianceLaw(N, abs(z))
    table = densities._quantile_table(law)
    values = np.empty(count, dtype=complex)
    filled = 0
    rejected = 0
    while filled < count:
        k = count - filled
        t = table.draw(rng, k)
        zeta = np.sqrt((1.0 + t) / N) * (
            rng.standard_normal(k) + 1j * rng.standard_normal(k)
        ) / math.sqrt(2.0)
        denom = z + zeta
        good = np.abs(denom) > 1e-300
        rejected += int(k - good.sum())
        take = denom[good]
        values[filled : filled + take.size] = 1.0 / take
        filled += take.size
        if rejected > 10 + count:
            raise SolveRejectedError("exact sampler rejecting persistently")
    return SampleBatch(
        statistic=G11,
        values=values,
        N=N,
        z=z,
        seed=seed,
        indices=range(count),
        n_rejected=rejected,
    )


# ---------------------------------------------------------------------------
# regime rescalings


def scaled_statistic(batch: SampleBatch, regime: RegimeSpec) -> SampleBatch:
    """Apply the regime's affine rescaling to a batch of raw [G]_11 values."""
    if batch.statistic != G11:
        raise ValueError(f"scaled_statistic needs a {G11!r} batch")
    _check_consistency(regime, batch.N, batch.z)
    center, scale = _center_scale(regime, batch.N, batch.z)
    out = replace(batch)
    out.statistic = SCALED_G11
    out.regime = regime
    out.values = scale * (batch.values - center)
    return out


def stieltjes_fluctuation(
    batch: SampleBatch, g_limit: complex, rho: float
) -> SampleBatch:
    """Z = sqrt(N) (g^N(z) - g_limit) / sqrt(pi rho) per trace sample."""
    if batch.statistic != STIELTJES:
        raise ValueError(f"stieltjes_fluctuation needs a {STIELTJES!r} batch")
    if not rho > 0.0:
        raise ValueError("rho must be positive")
    out = replace(batch)
    out.statistic = SCALED_STIELTJES
    out.values = (
        math.sqrt(batch.N) * (batch.values - complex(g_limit)) / math.sqrt(math.pi * rho)
    )
    return out
