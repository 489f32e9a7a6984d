"""Conversion between the dimensionless model (J = 1, hbar = 1) and
laboratory optical-lattice quantities.

The tight-binding tunneling energy follows the standard deep-lattice fit

    J = 1.43 s^0.98 exp(-2.07 sqrt(s)) E_R,      E_R = hbar^2 k_L^2 / (2 m),

where s is the lattice depth in recoil units and k_L the lattice laser
wave vector.  The parabolic on-site field of amplitude h_m corresponds to
a harmonic confinement of frequency

    omega = sqrt(8 J h_m / m) / (d (N - 1)),

and a dimensionless time t corresponds to (hbar/J) t seconds.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

HBAR = 1.054571817e-34          # J s
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg
RB87_MASS = 86.909180531 * ATOMIC_MASS_UNIT

#: validity range (in s) of the tunneling fit; outside it a warning is issued
FIT_RANGE = (5.0, 60.0)


@dataclass(frozen=True)
class LatticeContext:
    """Lattice depth s, laser wave vector k_L (1/m), atomic mass m (kg).

    The lattice spacing d defaults to pi/k_L (half the laser wavelength).
    """

    s: float
    k_L: float
    m: float
    hbar: float = HBAR
    d: float | None = None

    def __post_init__(self):
        for name in ("s", "k_L", "m", "hbar"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v}")
        if self.d is None:
            object.__setattr__(self, "d", np.pi / self.k_L)
        elif not (np.isfinite(self.d) and self.d > 0):
            raise ValueError(f"d must be positive, got {self.d}")


def rubidium87(s: float = 23.0, wavelength: float = 1064e-9) -> LatticeContext:
    """Reference context: 87Rb in a lattice of the given laser wavelength
    (default 1064 nm, i.e. 532 nm spacing)."""
    return LatticeContext(s=s, k_L=2.0 * np.pi / wavelength, m=RB87_MASS)


def recoil_energy(ctx: LatticeContext) -> float:
    """E_R = hbar^2 k_L^2 / (2 m) in joules."""
    return ctx.hbar**2 * ctx.k_L**2 / (2.0 * ctx.m)


class Tunneling(NamedTuple):
    joules: float
    recoils: float  # J / E_R


def tunneling_energy(ctx: LatticeContext) -> Tunneling:
    """Tunneling energy from the deep-lattice fit, in joules and in units
    of the recoil energy.  Warns when s leaves the fit's validity range."""
    if ctx.s <= 0:
        raise ValueError("s must be positive")
    if not (FIT_RANGE[0] <= ctx.s <= FIT_RANGE[1]):
        warnings.warn(
            f"s = {ctx.s} outside the tunneling fit range {FIT_RANGE}; extrapolating",
            stacklevel=2,
        )
    ratio = 1.43 * ctx.s**0.98 * np.exp(-2.07 * np.sqrt(ctx.s))
    return Tunneling(ratio * recoil_energy(ctx), ratio)


def trap_frequency(ctx: LatticeContext, h_m: float, N: int) -> float:
    """Harmonic-trap frequency (rad/s) realizing a parabolic field of
    dimensionless amplitude h_m on an N-site chain."""
    if N < 2:
        raise ValueError("N must be >= 2")
    if not (np.isfinite(h_m) and h_m > 0):
        raise ValueError("h_m must be positive")
    J = tunneling_energy(ctx).joules
    return float(np.sqrt(8.0 * J * h_m / ctx.m) / (ctx.d * (N - 1)))


def time_to_seconds(t: float, ctx: LatticeContext) -> float:
    """Dimensionless model time -> laboratory seconds, t * hbar / J."""
    return t * ctx.hbar / tunneling_energy(ctx).joules


def seconds_to_time(seconds: float, ctx: LatticeContext) -> float:
    """Laboratory seconds -> dimensionless model time."""
    return seconds * tunneling_energy(ctx).joules / ctx.hbar
