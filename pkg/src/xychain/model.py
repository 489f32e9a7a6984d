"""Single-excitation XY chain: field profiles, banded Hamiltonian, perturbations.

The chain Hamiltonian is

    H = -sum_i [ J (Sx_i Sx_{i+1} + Sy_i Sy_{i+1}) + h(i) Sz_i ]

with spin-1/2 operators (S = sigma/2) on an open chain of N sites.  H
conserves the number of up spins, so a state with a single excitation
stays inside the N-dimensional subspace spanned by the site states |i>.
In that basis the matrix elements are

    <i|H|i+1> = -J/2
    <i|H|i>   = sum_k h(k)/2 - h(i)

The constant sum_k h(k)/2 is physically irrelevant for site populations
but is kept so that phases relative to the zero-excitation state are
meaningful.  A next-nearest-neighbour coupling mu*J adds -mu*J/2 on the
second off-diagonal.

Five perturbation models are supported (see :class:`PerturbationCase`):
0 none, 1 random on-site shifts, 2 random coupling errors, 3 uniform
next-nearest-neighbour coupling, 4 couplings redrawn every time interval
tau.  All random draws are uniform on [-1, 1] times the case strength and
derive deterministically from (base seed, realization, interval).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FIELD_KINDS = ("zero", "parabola", "pst", "sine", "triangle", "custom")


@dataclass(frozen=True)
class FieldProfile:
    """On-site field family h(i), i = 1..N.

    kind
        One of ``zero``, ``parabola``, ``pst``, ``sine``, ``triangle``,
        ``custom``.  The formula profiles are mirror symmetric about the
        chain centre and have peak magnitude h_m (exactly on odd N, within
        one lattice site of it on even N):

        * ``parabola``: 4 h_m [(i-1)^2/(N-1)^2 - (i-1)/(N-1)], zero at the
          ends and -h_m at the centre.
        * ``pst``: 2 sqrt(i (N+1-i)/(N+1)), rescaled so its sampled peak
          equals h_m.
        * ``sine``: h_m sin((i-1) pi / (N-1)).
        * ``triangle``: h_m 2/(N+1) min(i, N+1-i).
    h_m
        Peak field magnitude, nonnegative.
    custom_values
        Exactly N user-chosen values; required iff kind is ``custom``.
    """

    kind: str = "zero"
    h_m: float = 0.0
    custom_values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}; expected one of {FIELD_KINDS}")
        if not np.isfinite(self.h_m) or self.h_m < 0:
            raise ValueError(f"h_m must be finite and nonnegative, got {self.h_m}")
        if (self.custom_values is not None) != (self.kind == "custom"):
            raise ValueError("custom_values is required for kind='custom' and forbidden otherwise")
        if self.custom_values is not None:
            object.__setattr__(self, "custom_values", tuple(float(v) for v in self.custom_values))


def build_field(profile: FieldProfile, N: int) -> np.ndarray:
    """Evaluate h(1..N) for the given profile.

    Formula kinds need N >= 2 (their expressions divide by N-1 or N+1);
    ``zero`` and ``custom`` are defined for any N >= 1.
    """
    if N < 1:
        raise ValueError("N must be positive")
    if profile.kind == "custom":
        if len(profile.custom_values) != N:
            raise ValueError(f"custom field has {len(profile.custom_values)} values, chain has {N} sites")
        h = np.asarray(profile.custom_values, dtype=float)
        if not np.all(np.isfinite(h)):
            raise ValueError("custom field contains non-finite values")
        return h
    if profile.kind == "zero":
        return np.zeros(N)
    if N < 2:
        raise ValueError(f"field kind {profile.kind!r} needs N >= 2")
    i = np.arange(1, N + 1, dtype=float)
    if profile.kind == "parabola":
        x = (i - 1.0) / (N - 1.0)
        return 4.0 * profile.h_m * (x * x - x)
    if profile.kind == "pst":
        raw = 2.0 * np.sqrt(i * (N + 1.0 - i) / (N + 1.0))
        return profile.h_m * raw / np.max(np.abs(raw))
    if profile.kind == "sine":
        return profile.h_m * np.sin((i - 1.0) * np.pi / (N - 1.0))
    # triangle
    return profile.h_m * 2.0 / (N + 1.0) * np.minimum(i, N + 1.0 - i)


@dataclass(frozen=True)
class ChainSpec:
    """Chain geometry and couplings: N sites, uniform coupling J, the
    storage (target) site in 1..N, and the on-site field profile."""

    N: int
    profile: FieldProfile = FieldProfile()
    J: float = 1.0
    target_site: int = 1

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        if not (1 <= self.target_site <= self.N):
            raise ValueError(f"target_site {self.target_site} outside 1..{self.N}")
        object.__setattr__(self, "target_site", int(self.target_site))
        if not np.isfinite(self.J):
            raise ValueError("J must be finite")
        if self.J == 0.0 and self.N > 1:
            raise ValueError("J must be nonzero for N > 1")

    def field(self) -> np.ndarray:
        return build_field(self.profile, self.N)


@dataclass(frozen=True)
class PerturbationCase:
    """One of the five defect/noise models with its strengths.

    case_id 0: unperturbed.
    case_id 1: on-site shifts epsilon*rand(i), frozen per realization.
    case_id 2: coupling shifts gamma*rand(i), frozen per realization.
    case_id 3: next-nearest-neighbour coupling mu*J (deterministic).
    case_id 4: coupling shifts eta*rand(i) redrawn every interval tau.

    Only the strengths relevant to case_id are consumed.
    """

    case_id: int
    epsilon: float = 0.0
    gamma: float = 0.0
    mu: float = 0.0
    eta: float = 0.0
    tau: float = 0.1

    def __post_init__(self):
        if self.case_id not in (0, 1, 2, 3, 4):
            raise ValueError(f"unknown case_id {self.case_id}")
        for name in ("epsilon", "gamma", "mu", "eta"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")
        if self.case_id == 4 and not (np.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"case 4 needs tau > 0, got {self.tau}")


CLEAN = PerturbationCase(0)


@dataclass(frozen=True)
class NoiseStream:
    """Deterministic random-stream address: (base_seed, realization).

    Generators are derived by counter-based splitting, so any
    (case, realization, interval) triple can be sampled independently and
    in any order with identical results.
    """

    base_seed: int
    realization: int = 0

    def __post_init__(self):
        if self.base_seed < 0 or self.realization < 0:
            raise ValueError("base_seed and realization must be nonnegative")

    def rng(self, case_id: int, interval: int = 0) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=self.base_seed, spawn_key=(case_id, self.realization, interval)
        )
        return np.random.default_rng(seq)


@dataclass(frozen=True)
class PerturbationSample:
    """Concrete perturbation draw entering one Hamiltonian build."""

    case_id: int
    site_shift: np.ndarray       # N on-site field shifts
    coupling_shift: np.ndarray   # N-1 coupling shifts
    nnn_strength: float          # next-nearest coupling mu*J


def sample_perturbation(
    case: PerturbationCase,
    spec: ChainSpec,
    stream: NoiseStream,
    interval_index: int = 0,
) -> PerturbationSample:
    """Draw one perturbation sample.

    Cases 1 and 2 depend only on (base_seed, realization); case 4 depends
    additionally on interval_index.  Cases 0 and 3 are deterministic.
    """
    N = spec.N
    site = np.zeros(N)
    coup = np.zeros(N - 1) if N > 1 else np.zeros(0)
    nnn = 0.0
    if case.case_id == 1:
        site = case.epsilon * stream.rng(1).uniform(-1.0, 1.0, N)
    elif case.case_id == 2:
        coup = case.gamma * stream.rng(2).uniform(-1.0, 1.0, max(N - 1, 0))
    elif case.case_id == 3:
        nnn = case.mu * spec.J
    elif case.case_id == 4:
        if interval_index < 0:
            raise ValueError("interval_index must be nonnegative")
        coup = case.eta * stream.rng(4, interval_index).uniform(-1.0, 1.0, max(N - 1, 0))
    return PerturbationSample(case.case_id, site, coup, nnn)


@dataclass(frozen=True)
class BandedHamiltonian:
    """Real symmetric matrix stored as diagonal plus one or two bands."""

    diag: np.ndarray             # N
    band1: np.ndarray            # N-1, elements <i|H|i+1>
    band2: np.ndarray | None = None  # N-2, elements <i|H|i+2>

    def __post_init__(self):
        object.__setattr__(self, "diag", np.asarray(self.diag, dtype=float))
        object.__setattr__(self, "band1", np.asarray(self.band1, dtype=float))
        if self.band2 is not None:
            object.__setattr__(self, "band2", np.asarray(self.band2, dtype=float))
        N = self.diag.size
        if self.band1.size != max(N - 1, 0):
            raise ValueError("band1 must have N-1 entries")
        if self.band2 is not None and self.band2.size != max(N - 2, 0):
            raise ValueError("band2 must have N-2 entries")
        for arr in (self.diag, self.band1) + (() if self.band2 is None else (self.band2,)):
            if not np.all(np.isfinite(arr)):
                raise ValueError("Hamiltonian entries must be finite")

    @property
    def N(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        H = np.diag(self.diag)
        if self.N > 1:
            H += np.diag(self.band1, 1) + np.diag(self.band1, -1)
        if self.band2 is not None and self.N > 2:
            H += np.diag(self.band2, 2) + np.diag(self.band2, -2)
        return H


def build_hamiltonian(
    spec: ChainSpec,
    field: np.ndarray | None = None,
    sample: PerturbationSample | None = None,
) -> BandedHamiltonian:
    """Assemble the single-excitation Hamiltonian.

    band1 = -(J + coupling_shift)/2, diag_i = sum_k h_eff(k)/2 - h_eff(i)
    with h_eff = field + site_shift, and band2 = -mu*J/2 when a
    next-nearest coupling is active.
    """
    h = spec.field() if field is None else np.asarray(field, dtype=float)
    if h.size != spec.N:
        raise ValueError(f"field has {h.size} entries, chain has {spec.N} sites")
    if not np.all(np.isfinite(h)):
        raise ValueError("field contains non-finite values")
    N = spec.N
    if sample is None:
        sample = PerturbationSample(0, np.zeros(N), np.zeros(max(N - 1, 0)), 0.0)
    if sample.site_shift.shape != (N,) or sample.coupling_shift.shape != (max(N - 1, 0),):
        raise ValueError("perturbation sample dimensions do not match the chain")
    h_eff = h + sample.site_shift
    diag = 0.5 * h_eff.sum() - h_eff
    band1 = -0.5 * (spec.J + sample.coupling_shift)
    band2 = None
    if sample.nnn_strength != 0.0 and N > 2:
        band2 = np.full(N - 2, -0.5 * sample.nnn_strength)
    return BandedHamiltonian(diag, band1, band2)


def vacuum_energy(field: np.ndarray) -> float:
    """Energy of the zero-excitation state |00...0> under the chain
    Hamiltonian; the phase reference for retrieving superpositions."""
    return 0.5 * float(np.sum(field))
