"""Heavy-tail-aware comparison statistics.

Everything the experiments report flows through here: sup-norm (KS)
distances against closed-form or empirical CDFs, power-law tail fits on
the survival function over an upper-quantile window, the three reciprocal
symmetry checks, empirical characteristic functions, and histogram tables
for CSV emission.

Planar laws are compared through two 1-D statistics, modulus and argument:
every target law in this package is rotationally symmetric about a known
center, so the modulus carries the radial law and the argument tests
isotropy. The argument comparison uses the Kuiper statistic, which is
invariant under rotations of the circle.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

__all__ = [
    "ks_one_sample",
    "ks_two_sample",
    "kuiper_two_sample",
    "TailFit",
    "tail_fit",
    "SymmetryReport",
    "inversion_symmetry",
    "SYMMETRY_MAPS",
    "empirical_char_fn",
    "HistogramTable",
    "histogram",
    "write_histogram_csv",
    "write_samples_csv",
    "read_samples_csv",
]


def ks_one_sample(values, cdf: Callable) -> float:
    """sup |ECDF - cdf| for a real sample against a monotone CDF."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("ks_one_sample needs a nonempty sample")
    v = np.sort(values)
    f = np.asarray(cdf(v), dtype=float)
    n = v.size
    grid = np.arange(1, n + 1) / n
    return float(max(np.max(grid - f), np.max(f - (grid - 1.0 / n))))


def _two_sample_diffs(a, b):
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("two-sample statistics need nonempty samples")
    support = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, support, side="right") / a.size
    cdf_b = np.searchsorted(b, support, side="right") / b.size
    return cdf_a - cdf_b


def ks_two_sample(a, b) -> float:
    """Standard two-sample sup statistic sup |F_a - F_b|."""
    return float(np.max(np.abs(_two_sample_diffs(a, b))))


def kuiper_two_sample(a, b) -> float:
    """Kuiper statistic V = sup(F_a - F_b) + sup(F_b - F_a).

    For samples on a circle (values taken mod the circumference), V is
    invariant under a common rotation of both samples, which the plain KS
    statistic is not.
    """
    diffs = _two_sample_diffs(a, b)
    return float(max(np.max(diffs), 0.0) + max(np.max(-diffs), 0.0))


# ---------------------------------------------------------------------------
# tail fits


@dataclass(frozen=True)
class TailFit:
    """Least-squares power-law fit of a survival tail.

    Fit of log S(r) vs log r over the [q_lo, q_hi] quantile window of the
    modulus. slope is the power (a quadratic tail gives -2);
    log_amplitude is ln A in S ~ A/r^2, read off at the window's log
    midpoint so it stays meaningful when the slope is slightly off -2.
    """

    slope: float
    log_amplitude: float
    window: Tuple[float, float]
    stderr_slope: float
    n_points: int

    @property
    def amplitude(self) -> float:
        return math.exp(self.log_amplitude)


def tail_fit(values, center: complex = 0j, q_lo: float = 0.95, q_hi: float = 0.999) -> TailFit:
    """Power-law fit of P(|W - center| >= r) over a quantile window.

    Reliable from roughly 5000 samples up at the default window; smaller
    batches still fit (some verification targets run at 2000 draws) as
    long as the window keeps >= 20 positive-radius points, but the slope
    standard error grows accordingly.
    """
    if not 0.0 < q_lo < q_hi < 1.0:
        raise ValueError("need 0 < q_lo < q_hi < 1")
    values = np.asarray(values)
    n = values.size
    r = np.sort(np.abs(values - center))
    # survival strictly above r_i is (n - i - 1)/n for 0-based i
    i_lo = int(math.ceil(q_lo * n))
    i_hi = int(math.floor(q_hi * n))
    idx = np.arange(i_lo, i_hi)
    idx = idx[r[idx] > 0.0]
    if idx.size < 20:
        raise ValueError("too few tail points in the fit window")
    log_r = np.log(r[idx])
    log_s = np.log((n - idx) / n)
    slope, intercept = np.polyfit(log_r, log_s, 1)
    resid = log_s - (slope * log_r + intercept)
    dof = max(idx.size - 2, 1)
    var_slope = (resid @ resid) / dof / np.sum((log_r - log_r.mean()) ** 2)
    log_amplitude = intercept + (slope + 2.0) * float(log_r.mean())
    return TailFit(
        slope=float(slope),
        log_amplitude=float(log_amplitude),
        window=(q_lo, q_hi),
        stderr_slope=float(math.sqrt(var_slope)),
        n_points=int(idx.size),
    )


# ---------------------------------------------------------------------------
# reciprocal symmetry checks

SYMMETRY_MAPS = {
    "identity": lambda v: v,
    "reciprocal": lambda v: 1.0 / v,
    "reciprocal_conjugate": lambda v: np.conj(1.0 / v),
    "sqrt2_reciprocal": lambda v: math.sqrt(2.0) / v,
}


@dataclass(frozen=True)
class SymmetryReport:
    ks_modulus: float
    ks_argument: float
    n: int
    map_kind: str
    n_dropped: int
    warn_dropped: bool


def inversion_symmetry(values, map_kind: str) -> SymmetryReport:
    """Two-sample distance between a batch and its reciprocal-type image.

    Modulus: plain KS. Argument: Kuiper statistic on angles/(2 pi) mod 1.
    Values with |v| <= 1e-12 are dropped before mapping and counted;
    warn_dropped is set when more than 1% were dropped.
    """
    if map_kind not in SYMMETRY_MAPS:
        raise ValueError(f"unknown map {map_kind!r}; use one of {sorted(SYMMETRY_MAPS)}")
    values = np.asarray(values, dtype=complex)
    total = values.size
    if total == 0:
        raise ValueError("inversion_symmetry needs a nonempty sample")
    keep = np.abs(values) > 1e-12
    v = values[keep]
    dropped = int(total - v.size)
    if v.size == 0:
        raise ValueError("all values were dropped as numerically zero")
    mapped = SYMMETRY_MAPS[map_kind](v)
    if map_kind == "identity":
        ks_mod = 0.0
        ks_arg = 0.0
    else:
        ks_mod = ks_two_sample(np.abs(v), np.abs(mapped))
        ks_arg = kuiper_two_sample(
            np.mod(np.angle(v) / (2.0 * math.pi), 1.0),
            np.mod(np.angle(mapped) / (2.0 * math.pi), 1.0),
        )
    return SymmetryReport(
        ks_modulus=ks_mod,
        ks_argument=ks_arg,
        n=int(v.size),
        map_kind=map_kind,
        n_dropped=dropped,
        warn_dropped=dropped > 0.01 * total,
    )


# ---------------------------------------------------------------------------
# characteristic function


def empirical_char_fn(values, omega: complex) -> complex:
    """mean of exp(i Re(conj(omega) v)); exactly 1 at omega = 0."""
    values = np.asarray(values, dtype=complex)
    if values.size == 0:
        raise ValueError("empirical_char_fn needs a nonempty sample")
    if omega == 0:
        return 1.0 + 0.0j
    phases = np.real(np.conj(omega) * values)
    return complex(np.mean(np.exp(1j * phases)))


# ---------------------------------------------------------------------------
# histograms


@dataclass(frozen=True)
class HistogramTable:
    """Bin table; density normalizes counts to unit mass over the binned range."""

    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    scale: str
    center: complex
    n: int


def histogram(values, bins: int, scale: str = "linear", center: complex = 0j) -> HistogramTable:
    """Linear histogram of real values or log-radial histogram about center.

    log_radial bins |v - center| on a geometric grid; empty bins are kept
    as zero rows so tails are emitted, not dropped.
    """
    if bins < 2:
        raise ValueError("need at least 2 bins")
    values = np.asarray(values)
    if values.size == 0:
        raise ValueError("histogram needs a nonempty sample")
    if scale == "linear":
        data = np.asarray(values, dtype=float)
        counts, edges = np.histogram(data, bins=bins)
    elif scale == "log_radial":
        r = np.abs(np.asarray(values, dtype=complex) - center)
        r = r[r > 0.0]
        if r.size == 0:
            raise ValueError("all moduli are zero; no radial histogram")
        lo, hi = r.min(), r.max()
        if lo == hi:  # single distinct radius: give it a finite-width bin
            lo, hi = lo / 2.0, hi * 2.0
        edges = np.geomspace(lo, hi, bins + 1)
        edges[-1] *= 1.0 + 1e-12  # keep the max in the last bin
        counts, edges = np.histogram(r, bins=edges)
    else:
        raise ValueError(f"unknown scale {scale!r}")
    widths = np.diff(edges)
    total = counts.sum()
    density = counts / (total * widths) if total else counts.astype(float)
    return HistogramTable(
        edges=edges,
        counts=counts,
        density=density,
        scale=scale,
        center=center,
        n=int(values.size),
    )


def write_histogram_csv(path, table: HistogramTable) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        fh.write(
            f"# histogram scale={table.scale} n={table.n} "
            f"center={table.center.real!r},{table.center.imag!r}\n"
        )
        writer.writerow(("bin_lo", "bin_hi", "count", "density"))
        for lo, hi, c, d in zip(
            table.edges[:-1], table.edges[1:], table.counts, table.density
        ):
            writer.writerow((repr(float(lo)), repr(float(hi)), int(c), repr(float(d))))


# ---------------------------------------------------------------------------
# sample persistence (shared by harness and CLI)


def write_samples_csv(path, values, statistic: str = "") -> None:
    """columns: index, re, im (im omitted-as-zero for real batches)."""
    values = np.asarray(values)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if statistic:
            fh.write(f"# statistic={statistic} n={values.size}\n")
        writer.writerow(("index", "re", "im"))
        for i, v in enumerate(values):
            c = complex(v)
            writer.writerow((i, repr(c.real), repr(c.imag)))


def read_samples_csv(path) -> np.ndarray:
    """Reads a samples CSV back into a complex array."""
    rows = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                continue
            rows.append(line)
    reader = csv.reader(rows)
    header = next(reader)
    try:
        i_re, i_im = header.index("re"), header.index("im")
    except ValueError as exc:
        raise ValueError(f"{path} lacks re/im columns") from exc
    out = [complex(float(row[i_re]), float(row[i_im])) for row in reader]
    return np.asarray(out, dtype=complex)
