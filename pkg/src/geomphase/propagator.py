"""Time evolution in scaled time s = t/T: the exact spin-half propagator and
closed-form evolving states, plus a deterministic fixed-step RK4 integrator
for arbitrary Hamiltonian families (hbar = 1 throughout)."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._rk4 import rk4_interval
from .errors import InvalidAmplitudes, InvalidGamma, StepTooLarge
from .hamiltonian import (
    HamiltonianFamily,
    SpinHalfParams,
    PAULI_X,
    PAULI_Z,
    validate_family,
)

NORM_TOL = 1e-10

#: per-step phase advance above which the fixed-step scheme is rejected
MAX_PHASE_PER_STEP = 0.3

#: default coherent phase-error budget used to pick the step count
PHASE_ERROR_BUDGET = 1e-9


def check_state(psi: np.ndarray, tol: float = NORM_TOL) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > tol:
        raise ValueError(f"state norm {nrm} deviates from 1 beyond {tol}")
    return psi


@dataclass(frozen=True)
class ImperfectionSpec:
    """Initial-state amplitudes a_n in the instantaneous eigenbasis at s=0."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", a)
        if abs(np.sum(np.abs(a) ** 2) - 1.0) > 1e-12:
            raise InvalidAmplitudes(
                f"sum |a_n|^2 = {np.sum(np.abs(a) ** 2)} deviates from 1"
            )


@dataclass(frozen=True)
class GammaScaling:
    """T-dependent imperfection a_0 = sqrt(1 - Gamma/T), a_1 = sqrt(Gamma/T)."""

    gamma: float
    T: float

    def __post_init__(self) -> None:
        if self.gamma < 0 or self.T <= 0 or self.gamma / self.T > 1.0:
            raise InvalidGamma(
                f"need 0 <= Gamma/T <= 1, got Gamma={self.gamma}, T={self.T}"
            )

    def amplitudes(self) -> tuple[float, float]:
        r = self.gamma / self.T
        return math.sqrt(1.0 - r), math.sqrt(r)


@dataclass
class SampledPath:
    """Evolution path sampled on an s-grid.

    ``energy_integral``, when set by the integrator, is the fine-grid value
    of int_0^1 <psi|H|psi> ds (not scaled by T); it is far more accurate
    than any quadrature over the decimated output grid.
    """

    T: float
    grid: np.ndarray
    states: np.ndarray  # (M, N)
    family_label: str = ""
    energy_integral: Optional[float] = None
    max_norm_drift: Optional[float] = None

    def __post_init__(self) -> None:
        self.grid = np.asarray(self.grid, dtype=float)
        self.states = np.asarray(self.states, dtype=complex)
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("path grid must be strictly increasing")
        norms = np.linalg.norm(self.states, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-9:
            raise ValueError("path states must be unit-norm within 1e-9")

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def to_csv(self, path) -> None:
        dim = self.dim
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            header = ["s"]
            for n in range(dim):
                header += [f"re_{n}", f"im_{n}"]
            writer.writerow(header)
            for k in range(self.grid.size):
                row = [f"{self.grid[k]:.17g}"]
                for n in range(dim):
                    row += [
                        f"{self.states[k, n].real:.17g}",
                        f"{self.states[k, n].imag:.17g}",
                    ]
                writer.writerow(row)

    @classmethod
    def from_csv(cls, path, T: float, family_label: str = "") -> "SampledPath":
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        grid = data[:, 0]
        dim = (data.shape[1] - 1) // 2
        states = data[:, 1::2] + 1j * data[:, 2::2]
        return cls(T=T, grid=grid, states=states, family_label=family_label)


def _angular_params(params: SpinHalfParams, T: float) -> tuple[float, float]:
    omega = 2.0 * math.pi / T
    wbar = math.sqrt(
        params.omega0**2 + 2.0 * params.omega0 * omega * math.cos(params.theta) + omega**2
    )
    return omega, wbar


def exact_spin_half_propagator(
    params: SpinHalfParams, T: float, s: float
) -> np.ndarray:
    """Closed-form evolution operator of the rotating-field model.

    U_T(s) = exp(-i pi s sz) exp(i (wbar T s / 2)(n_x sx + n_z sz)) with
    omega = 2 pi / T and wbar the dressed frequency.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    omega, wbar = _angular_params(params, T)
    nx = params.omega0 * math.sin(params.theta) / wbar
    nz = (params.omega0 * math.cos(params.theta) + omega) / wbar
    phi = wbar * T * s / 2.0
    rot = math.cos(phi) * np.eye(2, dtype=complex) + 1j * math.sin(phi) * (
        nx * PAULI_X + nz * PAULI_Z
    )
    frame = np.diag([np.exp(-1j * math.pi * s), np.exp(1j * math.pi * s)])
    return frame @ rot


def exact_perfect_state(params: SpinHalfParams, T: float, s) -> np.ndarray:
    """Exact evolving state started from the ground eigenstate at s = 0.

    Vectorized over s: scalar s gives shape (2,), array s gives (len(s), 2).
    """
    if T <= 0:
        raise ValueError("T must be positive")
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    omega, wbar = _angular_params(params, T)
    half = params.theta / 2.0
    phi = wbar * T * s_arr / 2.0
    c, si = np.cos(phi), np.sin(phi)
    up = (c + 1j * (params.omega0 + omega) / wbar * si) * math.cos(half) * np.exp(
        -1j * math.pi * s_arr
    )
    dn = (c + 1j * (params.omega0 - omega) / wbar * si) * math.sin(half) * np.exp(
        1j * math.pi * s_arr
    )
    out = np.stack([up, dn], axis=-1)
    return out[0] if np.isscalar(s) or np.asarray(s).ndim == 0 else out


def exact_imperfect_state(
    params: SpinHalfParams, T: float, a0: complex, a1: complex, s
) -> np.ndarray:
    """Exact evolving state started from a0 |e0(0)> + a1 |e1(0)>."""
    if abs(abs(a0) ** 2 + abs(a1) ** 2 - 1.0) > NORM_TOL:
        raise InvalidAmplitudes(
            f"|a0|^2 + |a1|^2 = {abs(a0) ** 2 + abs(a1) ** 2} deviates from 1"
        )
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    omega, wbar = _angular_params(params, T)
    half = params.theta / 2.0
    phi = wbar * T * s_arr / 2.0
    c, si = np.cos(phi), np.sin(phi)
    em, ep = np.exp(-1j * math.pi * s_arr), np.exp(1j * math.pi * s_arr)
    wp = (params.omega0 + omega) / wbar
    wm = (params.omega0 - omega) / wbar
    up = a0 * (c + 1j * wp * si) * math.cos(half) * em + a1 * (
        c - 1j * wm * si
    ) * math.sin(half) * em
    dn = a0 * (c + 1j * wm * si) * math.sin(half) * ep - a1 * (
        c - 1j * wp * si
    ) * math.cos(half) * ep
    out = np.stack([up, dn], axis=-1)
    return out[0] if np.isscalar(s) or np.asarray(s).ndim == 0 else out


def _spectral_radius(family: HamiltonianFamily, samples: int = 201) -> float:
    mats = family.sample(np.linspace(0.0, 1.0, samples))
    return float(np.max(np.abs(np.linalg.eigvalsh(mats))))


def choose_steps(
    phase_total: float,
    grid_size: int,
    phase_error_budget: float = PHASE_ERROR_BUDGET,
) -> int:
    """Substeps per output interval for a total phase advance T * max||H||.

    Bounds the coherent RK4 phase error n * (phi/n)^5 / 120 by the budget and
    keeps at least 20 steps per oscillation period.
    """
    n_acc = (max(phase_total, 1e-30) ** 5 / (120.0 * phase_error_budget)) ** 0.25
    n_osc = 20.0 * phase_total / (2.0 * math.pi)
    total = max(int(math.ceil(max(n_acc, n_osc))), grid_size - 1)
    return int(math.ceil(total / (grid_size - 1)))


def integrate_schrodinger(
    family: HamiltonianFamily,
    T: float,
    psi0: np.ndarray,
    grid_size: int = 2001,
    substeps: Optional[int] = None,
    phase_error_budget: float = PHASE_ERROR_BUDGET,
    s_span: tuple[float, float] = (0.0, 1.0),
) -> SampledPath:
    """Fixed-step RK4 integration of i d/ds psi = T H(s) psi.

    States are recorded on a uniform output grid of ``grid_size`` points over
    ``s_span``; each output interval is integrated with ``substeps`` inner
    steps (chosen automatically from the phase-error budget when omitted).
    Deterministic for fixed inputs.
    """
    report = validate_family(family)
    if not report.passes:
        raise ValueError(f"family '{family.label}' failed validation: {report}")
    psi = check_state(psi0)
    if T <= 0:
        raise ValueError("T must be positive")
    s0, s1 = s_span
    span = s1 - s0
    hmax = _spectral_radius(family)
    if substeps is None:
        substeps = choose_steps(T * hmax * span, grid_size, phase_error_budget)
    grid = np.linspace(s0, s1, grid_size)
    h = span / ((grid_size - 1) * substeps)
    if T * hmax * h > MAX_PHASE_PER_STEP:
        raise StepTooLarge(
            f"phase advance per step T*||H||*h = {T * hmax * h:.3f} exceeds "
            f"{MAX_PHASE_PER_STEP}; increase substeps"
        )
    states = np.empty((grid_size, family.dim), dtype=complex)
    states[0] = psi
    energy_integral = 0.0
    max_drift = 0.0
    fine_offsets = 0.5 * h * np.arange(2 * substeps + 1)
    for k in range(grid_size - 1):
        hs = family.sample(grid[k] + fine_offsets)
        psi, dyn, drift = rk4_interval(hs, psi, h, T)
        states[k + 1] = psi
        energy_integral += dyn
        max_drift = max(max_drift, drift)
    return SampledPath(
        T=T,
        grid=grid,
        states=states,
        family_label=family.label,
        energy_integral=energy_integral,
        max_norm_drift=max_drift,
    )


def adiabatic_reference_state(frame, T: float, n: int, s: float) -> np.ndarray:
    """Adiabatic-approximation state exp(-i T int_0^s e_n) exp(i gamma_n(s)) |e_n(s)>.

    The energy integral uses trapezoidal quadrature on the frame grid; at
    off-grid s the integral, accumulator and eigenvector are interpolated
    linearly (the vector is renormalized after interpolation).
    """
    if not 0 <= n < frame.dim:
        raise IndexError(f"level {n} out of range for dim {frame.dim}")
    grid = frame.grid
    energy = frame.energies[:, n]
    cumint = np.concatenate(
        [[0.0], np.cumsum(0.5 * (energy[1:] + energy[:-1]) * np.diff(grid))]
    )
    eint = float(np.interp(s, grid, cumint))
    gam = float(np.interp(s, grid, frame.berry[:, n]))
    idx = min(int(np.searchsorted(grid, s, side="right")) - 1, grid.size - 2)
    idx = max(idx, 0)
    w = (s - grid[idx]) / (grid[idx + 1] - grid[idx])
    vec = (1.0 - w) * frame.vectors[idx, :, n] + w * frame.vectors[idx + 1, :, n]
    vec = vec / np.linalg.norm(vec)
    return np.exp(-1j * T * eint) * np.exp(1j * gam) * vec
