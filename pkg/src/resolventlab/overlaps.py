"""Eigenvector self-overlaps of non-normal matrices.

For M = P D P^{-1} with right eigenvectors |R_n> (columns of P) and left
eigenvectors <L_n| (rows of P^{-1}), the biorthogonal normalization
<L_n|R_n> = 1 holds by construction and the self-overlap is

    O_nn = <L_n|L_n> <R_n|R_n> = ||L_n||^2 ||R_n||^2 >= 1.

O_nn is gauge invariant (rescaling a column of P rescales the matching row
of P^{-1} inversely) and measures the non-orthogonality of the eigenbasis:
identically 1 for normal matrices, of order N in the bulk for Ginibre.

The conditional statistics here (mean and rescaled samples of O_nn/N for
eigenvalues near a point z, the disk-counting density estimator, and the
combination beta = pi * rho(z) * E(O_nn/N | z)) are the estimation pipeline
both conjectures run on.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import linalg as sla

__all__ = [
    "DegenerateSpectrumError",
    "EmptySelectionError",
    "EigenSystem",
    "OverlapRecord",
    "DensityEstimate",
    "eigensystem",
    "self_overlaps",
    "empirical_density",
    "conditional_overlap_mean",
    "conditional_overlap_samples",
    "estimate_beta",
    "write_overlap_csv",
    "read_overlap_csv",
]


class DegenerateSpectrumError(RuntimeError):
    """Eigendecomposition failed or is too ill-conditioned to trust."""


class EmptySelectionError(ValueError):
    """No eigenvalues within the selection radius; enlarge the pool or radius."""


@dataclass
class EigenSystem:
    """Full nonsymmetric eigendecomposition with biorthogonal left vectors."""

    eigenvalues: np.ndarray  # (N,)
    right: np.ndarray  # P, columns are right eigenvectors
    left: np.ndarray  # P^{-1}, rows are left eigenvectors

    @property
    def N(self) -> int:
        return len(self.eigenvalues)


@dataclass(frozen=True)
class OverlapRecord:
    eigenvalue: complex
    self_overlap: float  # O_nn >= 1
    N: int
    draw_seed: int = 0


@dataclass(frozen=True)
class DensityEstimate:
    value: float
    count: int
    low_statistics: bool


def eigensystem(M: np.ndarray, residual_tol: float = 1e-6) -> EigenSystem:
    """Dense nonsymmetric eigendecomposition; left vectors via inverting P.

    Rejects (DegenerateSpectrumError) when the inversion fails, when the
    biorthogonality residual ||P^{-1} P - I||_max exceeds residual_tol, or
    when P D P^{-1} does not reconstruct M to the same relative tolerance.
    The reconstruction check matters: for an exactly defective input eig can
    return a P whose float inverse happens to satisfy P^{-1} P = I to
    machine precision while the similarity itself is wrong.
    """
    M = np.asarray(M, dtype=complex)
    try:
        w, p = sla.eig(M, check_finite=False)
    except Exception as exc:  # LinAlgError or convergence failure
        raise DegenerateSpectrumError(str(exc)) from exc
    try:
        pinv = np.linalg.inv(p)
    except np.linalg.LinAlgError as exc:
        raise DegenerateSpectrumError(str(exc)) from exc
    n = len(w)
    resid = np.max(np.abs(pinv @ p - np.eye(n)))
    if not np.isfinite(resid) or resid > residual_tol:
        raise DegenerateSpectrumError(
            f"biorthogonality residual {resid:.2e} above {residual_tol:.0e}"
        )
    scale = max(float(np.max(np.abs(M))), 1e-300)
    recon = np.max(np.abs(p @ (w[:, None] * pinv) - M)) / scale
    if not np.isfinite(recon) or recon > residual_tol:
        raise DegenerateSpectrumError(
            f"reconstruction residual {recon:.2e} above {residual_tol:.0e}"
        )
    return EigenSystem(eigenvalues=w, right=p, left=pinv)


def self_overlaps(
    es: EigenSystem, draw_seed: int = 0
) -> list[OverlapRecord]:
    """O_nn = ||L_n||^2 ||R_n||^2 for every eigenvalue, as records."""
    right_norms = np.sum(np.abs(es.right) ** 2, axis=0)
    left_norms = np.sum(np.abs(es.left) ** 2, axis=1)
    overlaps = right_norms * left_norms
    return [
        OverlapRecord(
            eigenvalue=complex(lam),
            self_overlap=float(o),
            N=es.N,
            draw_seed=draw_seed,
        )
        for lam, o in zip(es.eigenvalues, overlaps)
    ]


# ---------------------------------------------------------------------------
# conditional statistics


def empirical_density(
    eigs: np.ndarray, z: complex, radius: float
) -> DensityEstimate:
    """Disk-counting estimator of the mean spectral density at z.

    eigs is the pooled eigenvalue list of one or more draws (the estimator
    only needs the total count): rho-hat = #{|lambda - z| <= radius} /
    (len(eigs) * pi * radius^2). Zero count returns value 0 with the
    low-statistics flag set instead of raising.
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    eigs = np.asarray(eigs).ravel()
    if eigs.size == 0:
        raise ValueError("empty eigenvalue pool")
    count = int(np.count_nonzero(np.abs(eigs - z) <= radius))
    value = count / (eigs.size * math.pi * radius * radius)
    return DensityEstimate(value=value, count=count, low_statistics=count == 0)


def _select(records: Sequence[OverlapRecord], z: complex, radius: Optional[float]):
    if not records:
        raise EmptySelectionError("no overlap records supplied")
    sizes = {rec.N for rec in records}
    if len(sizes) != 1:
        raise ValueError("records mix matrix sizes; pool per size")
    n_mat = sizes.pop()
    if radius is None:
        radius = float(n_mat) ** -0.25
    lam = np.array([rec.eigenvalue for rec in records])
    overlap = np.array([rec.self_overlap for rec in records])
    mask = np.abs(lam - z) <= radius
    if not np.any(mask):
        raise EmptySelectionError(
            f"no eigenvalues within {radius:.3g} of z={z}; "
            "enlarge the pool of draws or the selection radius"
        )
    return overlap[mask], n_mat


def conditional_overlap_mean(
    records: Sequence[OverlapRecord], z: complex, radius: Optional[float] = None
) -> float:
    """Mean of O_nn/N over eigenvalues within radius of z (default N^-0.25)."""
    selected, n_mat = _select(records, z, radius)
    return float(np.mean(selected)) / n_mat


def conditional_overlap_samples(
    records: Sequence[OverlapRecord], z: complex, radius: Optional[float] = None
) -> np.ndarray:
    """Samples of O_nn / (N (1 - |z|^2)) near a bulk point z, |z| < 1.

    This is the rescaling whose Ginibre limit is inverse-gamma(2, 1) with
    cdf (1 + 1/x) exp(-1/x); every sample is >= 1/(N(1-|z|^2)) since
    O_nn >= 1.
    """
    if not abs(z) < 1.0:
        raise ValueError("rescaled overlap samples need a bulk point |z| < 1")
    selected, n_mat = _select(records, z, radius)
    return selected / (n_mat * (1.0 - abs(z) ** 2))


def estimate_beta(
    records: Sequence[OverlapRecord],
    eigs_pool: np.ndarray,
    z: complex,
    density_radius: float = 0.1,
    overlap_radius: Optional[float] = None,
) -> float:
    """beta-hat = pi * rho-hat(z) * mean(O_nn/N | lambda near z).

    The scale parameter of the conjectured heavy-tailed law of [G]_11 for a
    general rotationally invariant ensemble, estimated entirely from
    spectra: disk-counting density times conditional rescaled overlap mean.
    """
    density = empirical_density(eigs_pool, z, density_radius)
    if density.low_statistics:
        raise EmptySelectionError(
            f"no eigenvalues within {density_radius} of z={z} in the density pool"
        )
    mean_overlap = conditional_overlap_mean(records, z, overlap_radius)
    return math.pi * density.value * mean_overlap


# ---------------------------------------------------------------------------
# persistence

_CSV_FIELDS = ("re_lambda", "im_lambda", "self_overlap", "N", "draw_seed")


def write_overlap_csv(path, records: Iterable[OverlapRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_FIELDS)
        for rec in records:
            writer.writerow(
                (
                    repr(rec.eigenvalue.real),
                    repr(rec.eigenvalue.imag),
                    repr(rec.self_overlap),
                    rec.N,
                    rec.draw_seed,
                )
            )


def read_overlap_csv(path) -> list[OverlapRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != _CSV_FIELDS:
            raise ValueError(f"{path} is not an overlap pool (header {header})")
        return [
            OverlapRecord(
                eigenvalue=complex(float(re), float(im)),
                self_overlap=float(o),
                N=int(n),
                draw_seed=int(s),
            )
            for re, im, o, n, s in reader
        ]
