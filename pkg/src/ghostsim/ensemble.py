"""Speckle-ensemble Monte Carlo for the two-arm correlation.

Each realization draws a delta-correlated circular complex Gaussian field on
the source grid (thermal light resolved well below its coherence time),
propagates it through both arms, and records the bucket signal i1 and the
scanned intensity i2(x2). The normalized intensity-fluctuation correlation

    delta_g2(x2) = cov(i1, i2(x2)) / (mean(i1) * mean(i2(x2)))

is what carries the image. The covariance is computed in two passes (means
first, then centered products): the fluctuation signal can sit percent-level
above the background and a one-pass update would lose it to cancellation.

Determinism contract: the deviates of realization r are a pure function of
(master_seed, r), generated from a counter-based Philox stream keyed by that
pair. Worker count and scheduling cannot change any result bit.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox

from .errors import DegenerateStatisticsError, GridMismatchError, InvalidArgumentError
from .grid import ComplexField, TransverseGrid
from .optics import (
    OpticalGeometry,
    SourceSpec,
    TransmissionMask,
    apply_mask,
    fresnel_propagate,
)

__all__ = [
    "EnsembleConfig",
    "IntensityRecord",
    "CorrelationProfile",
    "draw_source_realization",
    "simulate_realization",
    "delta_g2_montecarlo",
]

_U64 = np.uint64
_BATCHES = 16  # batch-means count when n_realizations allows it


@dataclass(frozen=True)
class EnsembleConfig:
    """Grids, seeding, and detector geometry for a Monte Carlo run.

    bucket_window is the (lo, hi) interval of the object grid integrated by
    the bucket detector. detector_aperture is the full width of the scanning
    detector's collecting window; zero means an ideal point sampler. When an
    aperture is used, detector_field_grid must hold the fine grid the arm-2
    field is propagated onto before window averaging; it has to cover every
    aperture window and to sample the chirp finely enough.
    """

    n_realizations: int
    master_seed: int
    source_grid: TransverseGrid
    object_grid: TransverseGrid
    detector_grid: TransverseGrid
    bucket_window: tuple[float, float]
    detector_aperture: float = 0.0
    detector_field_grid: TransverseGrid | None = None

    def __post_init__(self) -> None:
        if self.n_realizations < 2:
            raise InvalidArgumentError("n_realizations must be at least 2")
        if not 0 <= self.master_seed < 2**64:
            raise InvalidArgumentError("master_seed must fit in an unsigned 64-bit int")
        lo, hi = self.bucket_window
        if not (hi > lo):
            raise InvalidArgumentError("bucket_window must have positive width")
        og = self.object_grid
        if lo < og.x_min - 1e-15 or hi > og.x_max + 1e-15:
            raise InvalidArgumentError("bucket_window must lie inside the object grid")
        if self.detector_aperture < 0:
            raise InvalidArgumentError("detector_aperture must be >= 0")
        if self.detector_aperture > 0:
            fg = self.detector_field_grid
            if fg is None:
                raise InvalidArgumentError(
                    "detector_aperture > 0 requires a detector_field_grid"
                )
            half = 0.5 * self.detector_aperture
            if (
                fg.x_min > self.detector_grid.x_min - half + 1e-15
                or fg.x_max < self.detector_grid.x_max + half - 1e-15
            ):
                raise InvalidArgumentError(
                    "detector_field_grid must cover every aperture window"
                )


@dataclass(frozen=True)
class IntensityRecord:
    """Bucket signal and scanned intensity of one realization."""

    i1: float
    i2: np.ndarray


@dataclass
class CorrelationProfile:
    """Correlation estimate on the detector scan.

    normalization is "fluctuation" for delta_g2 or "raw_g2" for
    1 + delta_g2 (the Gaussian-statistics, Siegert, form). For analytic
    profiles n_realizations is 0 and std_err is identically zero.
    """

    x2: np.ndarray
    delta_g2: np.ndarray
    std_err: np.ndarray
    n_realizations: int
    normalization: str = "fluctuation"
    metadata: dict = field(default_factory=dict)


def _realization_rng(master_seed: int, realization_index: int) -> Generator:
    key = np.array([master_seed, realization_index], dtype=_U64)
    return Generator(Philox(key=key))


def draw_source_realization(
    source: SourceSpec,
    grid: TransverseGrid,
    realization_index: int,
    master_seed: int,
) -> ComplexField:
    """One delta-correlated thermal field: amplitude_i = sqrt(I_s(x_i)) * g_i.

    g_i are unit-variance circular complex Gaussians. The sequence for
    (master_seed, realization_index) never depends on how work is scheduled.
    """
    if realization_index < 0:
        raise InvalidArgumentError("realization_index must be >= 0")
    rng = _realization_rng(master_seed, realization_index)
    n = grid.n_points
    z = rng.standard_normal(2 * n)
    g = (z[0::2] + 1j * z[1::2]) * np.sqrt(0.5)
    amp = np.sqrt(source.profile.intensity(grid.x)) * g
    return ComplexField(grid, amp)


def simulate_realization(
    source_field: ComplexField,
    mask: TransmissionMask,
    geom: OpticalGeometry,
    cfg: EnsembleConfig,
    wavelength: float,
) -> IntensityRecord:
    """Propagate one source realization through both arms."""
    f1 = fresnel_propagate(source_field, geom.z1, wavelength, cfg.object_grid)
    f1 = apply_mask(f1, mask)
    i0, i1_ = cfg.object_grid.index_range(*cfg.bucket_window)
    a = f1.amplitude[i0:i1_]
    bucket = float(np.sum(a.real**2 + a.imag**2) * cfg.object_grid.dx)

    if cfg.detector_aperture == 0.0:
        f2 = fresnel_propagate(source_field, geom.z2, wavelength, cfg.detector_grid)
        a2 = f2.amplitude
        i2 = a2.real**2 + a2.imag**2
    else:
        fg = cfg.detector_field_grid
        f2 = fresnel_propagate(source_field, geom.z2, wavelength, fg)
        a2 = f2.amplitude
        intensity = a2.real**2 + a2.imag**2
        csum = np.concatenate(([0.0], np.cumsum(intensity)))
        half = 0.5 * cfg.detector_aperture
        x2 = cfg.detector_grid.x
        lo = np.searchsorted(fg.x, x2 - half, side="left")
        hi = np.searchsorted(fg.x, x2 + half, side="right")
        counts = hi - lo
        if np.any(counts <= 0):
            raise InvalidArgumentError("an aperture window contains no field samples")
        i2 = (csum[hi] - csum[lo]) / counts
    return IntensityRecord(bucket, i2)


def _mc_records(
    mask: TransmissionMask,
    source: SourceSpec,
    geom: OpticalGeometry,
    cfg: EnsembleConfig,
    n_workers: int,
) -> tuple[np.ndarray, np.ndarray]:
    n = cfg.n_realizations
    i1 = np.empty(n)
    i2 = np.empty((n, cfg.detector_grid.n_points))

    def work(indices: range) -> None:
        for r in indices:
            f = draw_source_realization(source, cfg.source_grid, r, cfg.master_seed)
            rec = simulate_realization(f, mask, geom, cfg, source.wavelength)
            i1[r] = rec.i1
            i2[r] = rec.i2

    if n_workers <= 1:
        work(range(n))
    else:
        chunk = -(-n // n_workers)
        ranges = [range(s, min(n, s + chunk)) for s in range(0, n, chunk)]
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(work, ranges))
    return i1, i2


def _delta_from_records(i1: np.ndarray, i2: np.ndarray) -> np.ndarray:
    m1 = i1.mean()
    m2 = i2.mean(axis=0)
    if m1 <= 0 or np.any(m2 <= 0):
        raise DegenerateStatisticsError(
            "mean intensity vanished; cannot normalize the correlation"
        )
    d1 = i1 - m1
    cov = (d1 @ (i2 - m2)) / (i1.size - 1)
    return cov / (m1 * m2)


def delta_g2_montecarlo(
    mask: TransmissionMask,
    source: SourceSpec,
    geom: OpticalGeometry,
    cfg: EnsembleConfig,
    normalization: str = "fluctuation",
    n_workers: int = 1,
) -> CorrelationProfile:
    """Estimate delta_g2(x2) over the configured ensemble.

    std_err comes from batch means over 16 index-contiguous batches when
    n_realizations >= 32, else from delete-one jackknife; metadata records
    which. Raises DegenerateStatisticsError when no light ever reaches the
    bucket (e.g. an opaque mask).
    """
    if normalization not in ("fluctuation", "raw_g2"):
        raise InvalidArgumentError("normalization must be 'fluctuation' or 'raw_g2'")
    if mask.grid != cfg.object_grid:
        raise GridMismatchError("mask must live on the configured object grid")
    n = cfg.n_realizations
    i1, i2 = _mc_records(mask, source, geom, cfg, n_workers)
    if not np.any(i1 > 0):
        raise DegenerateStatisticsError("bucket detector saw no light in any realization")

    delta = _delta_from_records(i1, i2)

    if n >= 2 * _BATCHES:
        edges = np.linspace(0, n, _BATCHES + 1).astype(int)
        ests = np.stack(
            [
                _delta_from_records(i1[a:b], i2[a:b])
                for a, b in zip(edges[:-1], edges[1:])
            ]
        )
        std_err = ests.std(axis=0, ddof=1) / np.sqrt(_BATCHES)
        method = f"batch-means-{_BATCHES}"
    elif n == 2:
        # a two-sample covariance has no spread estimate at all
        std_err = np.full(delta.shape, np.inf)
        method = "undefined"
    else:
        # delete-one jackknife from sufficient sums
        s1 = i1.sum()
        s2 = i2.sum(axis=0)
        p = i1 @ i2
        m1_i = (s1 - i1)[:, None] / (n - 1)
        m2_i = (s2[None, :] - i2) / (n - 1)
        cov_i = (p[None, :] - i1[:, None] * i2 - (n - 1) * m1_i * m2_i) / (n - 2)
        if np.any(m1_i <= 0) or np.any(m2_i <= 0):
            raise DegenerateStatisticsError("jackknife subsample lost all light")
        d_i = cov_i / (m1_i * m2_i)
        std_err = np.sqrt((n - 1) / n * np.sum((d_i - d_i.mean(axis=0)) ** 2, axis=0))
        method = "jackknife"

    values = delta + 1.0 if normalization == "raw_g2" else delta
    return CorrelationProfile(
        x2=cfg.detector_grid.x,
        delta_g2=values,
        std_err=std_err,
        n_realizations=n,
        normalization=normalization,
        metadata={"stderr_method": method, "master_seed": cfg.master_seed},
    )
