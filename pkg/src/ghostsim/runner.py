"""Scenario execution: grids, dispatch, and metrics.

Auto-sized grids follow two rules: windows cover 4x the mask extent plus
the coherence-kernel width (and, for sweeps, the geometric defocus spread
of the source), and every grid spacing satisfies the Fresnel sampling
criterion with a few percent of margin. Explicit spans/steps/points from
the scenario override the defaults.

All randomness is keyed by (seed, stream index), so results are identical
for any worker count.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analytic import delta_g2_analytic
from .coincidence import (
    CoincidenceHistogram,
    DetectorSpec,
    estimate_coherence_time,
    estimate_g2,
    simulate_intensity_trace,
    start_stop_histogram,
    thin_photons,
)
from .ensemble import CorrelationProfile, EnsembleConfig, delta_g2_montecarlo
from .errors import GhostSimError, InvalidArgumentError, NotMeasurableError
from .grid import TransverseGrid, make_grid
from .scenario import ScenarioConfig

__all__ = ["MetricsReport", "run_scenario", "sweep_matrix", "profile_metrics"]

_GOLDEN = 0x9E3779B97F4A7C15
_MAX_POINTS = 1 << 20


def _substream(seed: int, index: int) -> int:
    return (seed + index * _GOLDEN) % (1 << 64)


@dataclass
class MetricsReport:
    """Observables of a finished run. runtime_seconds stays in memory only;
    the exported metrics.json must be byte-stable across reruns."""

    method: str
    runtime_seconds: float
    visibility: Optional[float] = None
    peak_positions: list = field(default_factory=list)
    peak_separation: Optional[float] = None
    fwhm_per_peak: list = field(default_factory=list)
    g2_zero: Optional[float] = None
    contrast: Optional[float] = None
    tau_coherence_s: Optional[float] = None

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "visibility": self.visibility,
            "peak_positions": list(self.peak_positions),
            "peak_separation": self.peak_separation,
            "fwhm_per_peak": list(self.fwhm_per_peak),
            "g2_zero": self.g2_zero,
            "contrast": self.contrast,
            "tau_coherence_s": self.tau_coherence_s,
        }


def profile_metrics(profile: CorrelationProfile) -> dict:
    """Peak observables of a correlation profile.

    Peaks are strict local maxima reaching at least half the global
    maximum; maxima separated only by dips shallower than 20% of the lower
    of the pair count as one feature (kernel side lobes ripple across the
    top of an extended feature's image). peak_separation is the distance
    between the two largest peaks. FWHM brackets each peak by linear
    interpolation of the half-maximum crossings and is None when a side
    never crosses.
    """
    d = np.asarray(profile.delta_g2, dtype=float)
    x = np.asarray(profile.x2, dtype=float)
    dmax = float(d.max()) if d.size else 0.0
    out = {"visibility": dmax / (2.0 + dmax) if dmax > 0 else 0.0,
           "peak_positions": [], "peak_separation": None, "fwhm_per_peak": []}
    if d.size < 3 or dmax <= 0:
        return out
    interior = (d[1:-1] > d[:-2]) & (d[1:-1] >= d[2:])
    cand = np.nonzero(interior)[0] + 1
    cand = cand[d[cand] >= 0.5 * dmax]
    if cand.size == 0:
        return out
    merged = [int(cand[0])]
    for i in cand[1:]:
        i = int(i)
        prev = merged[-1]
        valley = float(d[prev:i + 1].min())
        if valley > 0.8 * min(d[prev], d[i]):
            if d[i] > d[prev]:
                merged[-1] = i
        else:
            merged.append(i)
    cand = np.array(merged)
    out["peak_positions"] = [float(x[i]) for i in cand]
    out["fwhm_per_peak"] = [_fwhm(x, d, int(i)) for i in cand]
    if cand.size >= 2:
        order = cand[np.argsort(d[cand])[::-1][:2]]
        out["peak_separation"] = float(abs(x[order[0]] - x[order[1]]))
    return out


def _fwhm(x: np.ndarray, d: np.ndarray, i: int) -> Optional[float]:
    half = 0.5 * d[i]
    left = right = None
    for j in range(i, 0, -1):
        if d[j - 1] < half <= d[j]:
            frac = (half - d[j - 1]) / (d[j] - d[j - 1])
            left = x[j - 1] + frac * (x[j] - x[j - 1])
            break
    for j in range(i, d.size - 1):
        if d[j + 1] < half <= d[j]:
            frac = (d[j] - half) / (d[j] - d[j + 1])
            right = x[j] + frac * (x[j + 1] - x[j])
            break
    if left is None or right is None:
        return None
    return float(right - left)


@dataclass(frozen=True)
class _Grids:
    source: TransverseGrid
    object: TransverseGrid
    detector: TransverseGrid
    detector_field: Optional[TransverseGrid]
    bucket: tuple


def _points(span: float, dx: float, minimum: int = 16) -> int:
    n = max(minimum, int(np.ceil(span / dx)) + 1)
    if n > _MAX_POINTS:
        raise InvalidArgumentError(
            f"auto-sized grid needs {n} points (> {_MAX_POINTS}); "
            "the geometry is too demanding for this configuration"
        )
    return n


def _spatial_grids(cfg: ScenarioConfig, z2_values) -> _Grids:
    source = cfg.source()
    lam = cfg.wavelength
    z1 = cfg.z1
    a = source.effective_half_width()
    lo, hi = source.profile.support()
    span_src = hi - lo
    extent = cfg.mask_extent()
    kernel_w = lam * z1 / (2.0 * a)
    z_lo, z_hi = min(z2_values), max(z2_values)
    defocus = 2.0 * a * max(abs(z / z1 - 1.0) for z in z2_values)

    obj_half = (0.5 * cfg.object_span if cfg.object_span
                else 2.0 * extent + 3.0 * kernel_w)
    aperture = cfg.detector_aperture or 0.0
    if cfg.detector_span:
        det_half = 0.5 * cfg.detector_span
    else:
        det_half = (2.0 * extent * max(1.0, z_hi / z1)
                    + 3.0 * kernel_w + aperture + defocus)

    span_obj = 2.0 * obj_half
    span_det = 2.0 * det_half
    span_field = span_det + aperture
    # Fresnel sampling bounds, with margin, for both propagation legs;
    # the source span enters both unions because the analytic kernel
    # integrates over the source plane directly.
    union1 = max(span_src, span_obj)
    union2 = max(span_src, span_obj, span_field)
    bound1 = 0.98 * lam * z1 / (2.0 * union1)
    bound2 = 0.98 * lam * z_lo / (2.0 * union2)

    feature = min(v for v in (cfg.mask_diameter_1, cfg.mask_diameter_2,
                              cfg.mask_slit_width, cfg.mask_half_width,
                              extent) if v)
    # pure-analytic runs integrate a smooth |K|^2 over the mask and get by
    # with half the node density the Monte Carlo speckle statistics need
    kernel_frac = 4.0 if cfg.method == "analytic" else 8.0
    dx_obj = min(bound1, bound2, kernel_w / kernel_frac, feature / 8.0)
    n_obj = cfg.object_points or _points(span_obj, dx_obj, minimum=64)
    object_grid = make_grid(-obj_half, obj_half, n_obj)

    n_src = _points(span_src, bound1, minimum=64)
    source_grid = make_grid(lo, hi, n_src)

    if cfg.detector_step:
        m = int(np.floor(det_half / cfg.detector_step + 1e-9))
        detector = make_grid(-m * cfg.detector_step, m * cfg.detector_step,
                             2 * m + 1)
    elif cfg.detector_points:
        detector = make_grid(-det_half, det_half, cfg.detector_points)
    else:
        dx_det = min(bound2, kernel_w / 6.0)
        detector = make_grid(-det_half, det_half, _points(span_det, dx_det))

    detector_field = None
    if aperture > 0:
        dx_f = min(bound2, kernel_w / 8.0, aperture / 8.0)
        f_half = det_half + 0.5 * aperture + 2.0 * dx_f
        detector_field = make_grid(-f_half, f_half,
                                   _points(2.0 * f_half, dx_f))

    if cfg.bucket_half_width:
        bucket = (-cfg.bucket_half_width, cfg.bucket_half_width)
    else:
        bucket = (object_grid.x_min, object_grid.x_max)
    return _Grids(source_grid, object_grid, detector, detector_field, bucket)


def _ensemble_config(cfg: ScenarioConfig, grids: _Grids, seed: int) -> EnsembleConfig:
    return EnsembleConfig(
        n_realizations=cfg.n_realizations,
        master_seed=seed,
        source_grid=grids.source,
        object_grid=grids.object,
        detector_grid=grids.detector,
        bucket_window=grids.bucket,
        detector_aperture=cfg.detector_aperture or 0.0,
        detector_field_grid=grids.detector_field,
    )


def _annotate(exc: GhostSimError, kind: str) -> GhostSimError:
    try:
        return type(exc)(f"{kind} scenario: {exc}")
    except TypeError:  # exceptions with structured constructors
        return exc


def _run_focused(cfg: ScenarioConfig, workers: int):
    grids = _spatial_grids(cfg, [cfg.z2])
    source = cfg.source()
    geom = cfg.geometry()
    mask = cfg.build_mask(grids.object)
    profiles = []
    if cfg.method in ("montecarlo", "both"):
        mc = delta_g2_montecarlo(mask, source, geom,
                                 _ensemble_config(cfg, grids, cfg.seed),
                                 n_workers=workers)
        mc.metadata.update(role="montecarlo", z1=cfg.z1, z2=cfg.z2,
                           seed=cfg.seed)
        profiles.append(mc)
    if cfg.method in ("analytic", "both"):
        an = delta_g2_analytic(mask, source, geom, grids.detector)
        an.metadata.update(role="analytic", z1=cfg.z1, z2=cfg.z2)
        profiles.append(an)
    if cfg.method == "both":
        diff = CorrelationProfile(
            x2=profiles[0].x2.copy(),
            delta_g2=profiles[0].delta_g2 - profiles[1].delta_g2,
            std_err=profiles[0].std_err.copy(),
            n_realizations=profiles[0].n_realizations,
            metadata={"role": "difference", "z1": cfg.z1, "z2": cfg.z2},
        )
        profiles.append(diff)
    return profiles


def _run_sweep(cfg: ScenarioConfig, workers: int):
    z2_values = np.linspace(cfg.z2_min, cfg.z2_max, cfg.z2_steps)
    grids = _spatial_grids(cfg, z2_values)
    source = cfg.source()
    mask = cfg.build_mask(grids.object)

    def one_row(index: int) -> CorrelationProfile:
        z2 = float(z2_values[index])
        geom = cfg.geometry(z2=z2)
        if cfg.method == "analytic":
            # survey accuracy; defocused rows would otherwise burn most of
            # the run refining kernel digits far below the profile scale
            row = delta_g2_analytic(mask, source, geom, grids.detector,
                                    map_rtol=1e-5)
        else:
            ecfg = _ensemble_config(cfg, grids,
                                    _substream(cfg.seed, index + 1))
            row = delta_g2_montecarlo(mask, source, geom, ecfg)
        row.metadata.update(role="sweep", z1=cfg.z1, z2=z2, row=index)
        return row

    n = len(z2_values)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            profiles = list(pool.map(one_row, range(n)))
    else:
        profiles = [one_row(i) for i in range(n)]
    focus = int(np.argmin(np.abs(z2_values - cfg.z1)))
    profiles[focus].metadata["is_focus_row"] = True
    return profiles


def _run_hbt(cfg: ScenarioConfig, workers: int):
    start_det = DetectorSpec(mean_rate=cfg.start_rate,
                             jitter_sigma=cfg.jitter_sigma,
                             dead_time=cfg.dead_time)
    stop_det = DetectorSpec(mean_rate=cfg.stop_rate,
                            jitter_sigma=cfg.jitter_sigma,
                            dead_time=cfg.dead_time)
    tau0 = cfg.coherence_time

    def one_batch(b: int) -> CoincidenceHistogram:
        trace = simulate_intensity_trace(tau0, cfg.hbt_batch_duration,
                                         cfg.hbt_dt,
                                         seed=_substream(cfg.seed, 3 * b))
        starts = thin_photons(trace, cfg.hbt_dt, start_det,
                              seed=_substream(cfg.seed, 3 * b + 1))
        stops = thin_photons(trace, cfg.hbt_dt, stop_det,
                             seed=_substream(cfg.seed, 3 * b + 2))
        return start_stop_histogram(starts, stops, cfg.hbt_bin_width,
                                    cfg.hbt_window)

    n = cfg.hbt_batches
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(one_batch, range(n)))
    else:
        batches = [one_batch(b) for b in range(n)]
    total = batches[0]
    for h in batches[1:]:
        total = total.add(h)
    return [total]


def sweep_matrix(profiles) -> tuple:
    """(z2 array, x2 array, delta_g2 matrix of shape (n_z2, n_x2))."""
    rows = [p for p in profiles if p.metadata.get("role") == "sweep"]
    if not rows:
        raise InvalidArgumentError("no sweep rows among the profiles")
    z2 = np.array([p.metadata["z2"] for p in rows])
    return z2, rows[0].x2, np.vstack([p.delta_g2 for p in rows])


def primary_profile(profiles):
    """The profile that represents the run: the focus row of a sweep, the
    Monte Carlo profile of a 'both' run, else the first profile."""
    for p in profiles:
        if p.metadata.get("is_focus_row"):
            return p
    return profiles[0]


def run_scenario(cfg: ScenarioConfig, workers: int = 1):
    """Execute a scenario; returns (profiles, MetricsReport)."""
    if workers < 1:
        raise InvalidArgumentError("workers must be at least 1")
    t0 = time.perf_counter()
    try:
        if cfg.kind == "focused_image":
            profiles = _run_focused(cfg, workers)
        elif cfg.kind == "z2_sweep":
            profiles = _run_sweep(cfg, workers)
        elif cfg.kind == "hbt":
            profiles = _run_hbt(cfg, workers)
        else:
            raise InvalidArgumentError(f"unknown scenario kind {cfg.kind!r}")
    except NotMeasurableError:
        raise
    except GhostSimError as exc:
        raise _annotate(exc, cfg.kind) from exc

    report = MetricsReport(method=cfg.method, runtime_seconds=0.0)
    if cfg.kind == "hbt":
        hist = profiles[0]
        est = estimate_g2(hist)
        report.g2_zero = float(est.g2_zero)
        report.contrast = float(est.contrast)
        try:
            report.tau_coherence_s = float(estimate_coherence_time(hist))
        except NotMeasurableError:
            report.tau_coherence_s = None
    else:
        stats = profile_metrics(primary_profile(profiles))
        report.visibility = stats["visibility"]
        report.peak_positions = stats["peak_positions"]
        report.peak_separation = stats["peak_separation"]
        report.fwhm_per_peak = stats["fwhm_per_peak"]
    report.runtime_seconds = time.perf_counter() - t0
    return profiles, report
