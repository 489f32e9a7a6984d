"""Fidelity traces, windowed maxima, revival detection, parameter sweeps,
and the semi-classical predictors for the breathing-memory regime."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .disorder import EnsembleSpec, ensemble_average_fidelity
from .model import ChainSpec, FieldProfile, build_hamiltonian
from .propagator import default_time_step, diagonalize, site_amplitude_series, time_grid

SWEEP_AXES = ("chain_length", "storage_site", "field_amplitude")


@dataclass(frozen=True)
class FidelityCurve:
    """Sampled fidelity F(t) (or ensemble average) with its provenance."""

    times: np.ndarray
    values: np.ndarray
    metadata: dict

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.times.size != self.values.size:
            raise ValueError("times and values must have equal length")
        if self.times.size == 0:
            raise ValueError("curve must be nonempty")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly ascending")
        if np.any(self.values < -1e-12) or np.any(self.values > 1.0 + 1e-12):
            raise ValueError("fidelity values outside [0, 1]")


@dataclass(frozen=True)
class SweepTable:
    """Rows (axis value, F_max, t_at_max) along one sweep axis."""

    axis: str
    values: np.ndarray
    f_max: np.ndarray
    t_at_max: np.ndarray

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"axis must be one of {SWEEP_AXES}")
        for name in ("values", "f_max", "t_at_max"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = self.values.size
        if self.f_max.size != n or self.t_at_max.size != n:
            raise ValueError("sweep columns must have equal length")
        if n > 1 and np.any(np.diff(self.values) <= 0):
            raise ValueError("axis values must be strictly ascending")

    def __len__(self) -> int:
        return self.values.size


def _curve_metadata(chain: ChainSpec, ensemble: EnsembleSpec | None, dt: float) -> dict:
    meta = {"chain": asdict(chain), "dt": dt}
    if ensemble is not None:
        meta["ensemble"] = asdict(ensemble)
    return meta


def fidelity_values(chain: ChainSpec, ensemble: EnsembleSpec | None, times: np.ndarray,
                    threads: int = 1) -> np.ndarray:
    """F(t) (clean chain) or Fbar(t) (ensemble) on an arbitrary grid.

    Magnitudes are clipped into [0, 1]; stepper overshoot is bounded by its
    tolerance and the clip keeps curve invariants exact.
    """
    if ensemble is None:
        spec = diagonalize(build_hamiltonian(chain))
        vals = np.abs(site_amplitude_series(spec, chain.target_site, times))
    else:
        vals = ensemble_average_fidelity(chain, ensemble, times, threads=threads)
    return np.clip(vals, 0.0, 1.0)


def _grid_step(chain: ChainSpec, ensemble: EnsembleSpec | None, dt: float | None) -> float:
    if dt is not None:
        if dt <= 0:
            raise ValueError("dt must be positive")
        return dt
    step = default_time_step(chain.profile.h_m)
    if ensemble is not None and ensemble.case.case_id == 4:
        # align the grid with the noise intervals: exact interval-boundary
        # reuse makes the stepper coefficients cacheable
        step = ensemble.case.tau / int(np.ceil(ensemble.case.tau / step))
    return step


def fidelity_trace(
    chain: ChainSpec,
    ensemble: EnsembleSpec | None = None,
    t_max: float = 200.0,
    dt: float | None = None,
    threads: int = 1,
) -> FidelityCurve:
    """Fidelity versus time on [0, t_max] with the default (or given) grid."""
    step = _grid_step(chain, ensemble, dt)
    times = time_grid(t_max, step)
    values = fidelity_values(chain, ensemble, times, threads=threads)
    return FidelityCurve(times, values, _curve_metadata(chain, ensemble, step))


def max_in_window(curve: FidelityCurve, window: tuple[float, float]) -> tuple[float, float]:
    """Maximum sampled value in the closed window and its earliest time."""
    t1, t2 = window
    if t2 < t1:
        raise ValueError("window must satisfy t1 <= t2")
    mask = (curve.times >= t1) & (curve.times <= t2)
    if not np.any(mask):
        raise ValueError(f"window [{t1}, {t2}] does not overlap the curve")
    vals = curve.values[mask]
    k = int(np.argmax(vals))
    return float(vals[k]), float(curve.times[mask][k])


def revival_times(curve: FidelityCurve, threshold: float = 0.9) -> list[float]:
    """Times of local maxima with value >= threshold.

    Maxima are three-point strict peaks on the sample grid; plateaus of
    equal samples bounded by lower neighbours report their midpoint.  A
    fully constant curve degenerates to its midpoint.
    """
    if not (0.0 < threshold < 1.0):
        raise ValueError("threshold must lie in (0, 1)")
    t, v = curve.times, curve.values
    n = t.size
    if n == 1 or np.all(v == v[0]):
        mid = 0.5 * (t[0] + t[-1])
        return [float(mid)] if v[0] >= threshold else []
    peaks = []
    i = 1
    while i < n - 1:
        if v[i] > v[i - 1]:
            k = i
            while k + 1 < n and v[k + 1] == v[i]:
                k += 1
            if k < n - 1 and v[k + 1] < v[i]:
                if v[i] >= threshold:
                    peaks.append(0.5 * float(t[i] + t[k]))
                i = k + 1
                continue
            i = k + 1
            continue
        i += 1
    return peaks


def _window_times(h_m: float, window: tuple[float, float], dt: float | None,
                  ensemble: EnsembleSpec | None) -> np.ndarray:
    t1, t2 = window
    if t2 <= t1:
        raise ValueError("window must satisfy t1 < t2")
    if dt is None:
        dt = default_time_step(h_m)
        if ensemble is not None and ensemble.case.case_id == 4:
            dt = ensemble.case.tau / int(np.ceil(ensemble.case.tau / dt))
    return np.arange(t1, t2 + 0.5 * dt, dt)


def sweep(
    base: ChainSpec,
    axis: str,
    values,
    ensemble: EnsembleSpec | None = None,
    window: tuple[float, float] = (100.0, 1000.0),
    dt: float | None = None,
    threads: int = 1,
) -> SweepTable:
    """Windowed maximum fidelity along one axis, one row per value.

    Clean storage-site sweeps reuse a single diagonalization; everything
    else rebuilds the chain per point.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}")
    vals = list(values)
    if not vals:
        raise ValueError("sweep needs at least one axis value")

    f_out, t_out = [], []
    if axis == "storage_site" and ensemble is None:
        times = _window_times(base.profile.h_m, window, dt, None)
        spec = diagonalize(build_hamiltonian(base))
        for site in vals:
            F = np.abs(site_amplitude_series(spec, int(site), times))
            k = int(np.argmax(F))
            f_out.append(min(float(F[k]), 1.0))
            t_out.append(float(times[k]))
    else:
        for x in vals:
            chain = _chain_at(base, axis, x)
            times = _window_times(chain.profile.h_m, window, dt, ensemble)
            F = fidelity_values(chain, ensemble, times, threads=threads)
            k = int(np.argmax(F))
            f_out.append(float(F[k]))
            t_out.append(float(times[k]))
    return SweepTable(axis, np.asarray(vals, dtype=float), f_out, t_out)


def _chain_at(base: ChainSpec, axis: str, value) -> ChainSpec:
    if axis == "chain_length":
        return ChainSpec(int(value), base.profile, base.J, base.target_site)
    if axis == "storage_site":
        return ChainSpec(base.N, base.profile, base.J, int(value))
    profile = FieldProfile(base.profile.kind, float(value), base.profile.custom_values)
    return ChainSpec(base.N, profile, base.J, base.target_site)


def drop_site(table: SweepTable, fraction: float = 0.96) -> int:
    """Numerically detected memory boundary of a storage-site sweep: the
    largest site whose windowed maximum retains at least ``fraction`` of
    the first (edge) site's value.  Sites beyond it have lost the
    breathing revival."""
    if table.axis != "storage_site":
        raise ValueError("drop_site needs a storage_site sweep")
    if not (0.0 < fraction < 1.0):
        raise ValueError("fraction must lie in (0, 1)")
    bar = fraction * table.f_max[0]
    good = np.nonzero(table.f_max >= bar)[0]
    return int(table.values[good[-1]])


def semiclassical_regime(h_m: float) -> bool:
    """Whether the field is strong enough for edge-site Bloch-like
    oscillations (the breathing-memory regime), h_m > 4."""
    if h_m < 0:
        raise ValueError("h_m must be nonnegative")
    return h_m > 4.0


def semiclassical_drop_site(h_m: float, N: int) -> int:
    """Estimated deepest usable storage site: the largest i0 with
    sqrt(h_m/4) (N+1-2 i0) > N-1.  A rough predictor; numerical sweeps
    land within a few sites of it."""
    if N < 2:
        raise ValueError("N must be >= 2")
    if not semiclassical_regime(h_m):
        raise ValueError(f"h_m = {h_m} is outside the breathing regime (needs h_m > 4)")
    bound = 0.5 * (N + 1 - (N - 1) / np.sqrt(h_m / 4.0))
    i0 = int(np.floor(bound))
    if i0 == bound:  # strict inequality: an exact integer bound is excluded
        i0 -= 1
    return i0
