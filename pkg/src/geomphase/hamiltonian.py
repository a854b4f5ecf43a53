"""Hamiltonian families, the spin-half rotating-field model, and
gauge-smoothed instantaneous eigensystems.

A family is a map s in [0, 1] -> H(s) (Hermitian, N x N) with H(0) = H(1).
Eigenvector frames are smoothed by parallel-transport continuation with a
uniform phase twist that closes the frame cyclically, so that the stored
Berry accumulator is a smooth function of s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import GapTooSmall, NonHermitianInput

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

HERMITICITY_TOL = 1e-10
CYCLICITY_TOL = 1e-12


@dataclass(frozen=True)
class SpinHalfParams:
    """Rotating-field spin-half model: polar angle theta of the field axis
    and Larmor frequency omega0 in rad/us (5 GHz -> 5000 rad/us)."""

    theta: float
    omega0: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not self.omega0 > 0.0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")


def spin_half_hamiltonian(params: SpinHalfParams, s: float) -> np.ndarray:
    """H(s) = -(omega0/2) [sx sin(th)cos(2 pi s) + sy sin(th)sin(2 pi s) + sz cos(th)]."""
    st, ct = math.sin(params.theta), math.cos(params.theta)
    phi = 2.0 * math.pi * s
    return -(params.omega0 / 2.0) * (
        PAULI_X * (st * math.cos(phi))
        + PAULI_Y * (st * math.sin(phi))
        + PAULI_Z * ct
    )


def spin_half_hamiltonians(params: SpinHalfParams, s: np.ndarray) -> np.ndarray:
    """Vectorized spin_half_hamiltonian; returns shape (len(s), 2, 2)."""
    s = np.asarray(s, dtype=float)
    st, ct = math.sin(params.theta), math.cos(params.theta)
    phi = 2.0 * np.pi * s
    out = np.empty((s.size, 2, 2), dtype=complex)
    off = st * np.exp(-1j * phi)  # upper-right entry of (n . sigma)
    out[:, 0, 0] = ct
    out[:, 1, 1] = -ct
    out[:, 0, 1] = off
    out[:, 1, 0] = np.conj(off)
    out *= -(params.omega0 / 2.0)
    return out


def spin_half_eigensystem(params: SpinHalfParams, s: float):
    """Closed-form instantaneous eigensystem of the rotating-field model.

    Returns (e0, v0, e1, v1) with e0 = -omega0/2 (ground) and
    v0 = (cos(th/2), sin(th/2) e^{i 2 pi s}), v1 = (sin(th/2), -cos(th/2) e^{i 2 pi s}).
    """
    half = params.theta / 2.0
    ph = np.exp(1j * 2.0 * np.pi * s)
    v0 = np.array([math.cos(half), math.sin(half) * ph], dtype=complex)
    v1 = np.array([math.sin(half), -math.cos(half) * ph], dtype=complex)
    return -params.omega0 / 2.0, v0, params.omega0 / 2.0, v1


@dataclass
class HamiltonianFamily:
    """A cyclic family of Hermitian matrices parameterized by s in [0, 1].

    ``evaluate`` returns a single (dim, dim) matrix; ``evaluate_many``, if
    provided, maps an array of s values to shape (M, dim, dim) and is used
    by the integrator to avoid per-sample Python overhead.
    """

    dim: int
    evaluate: Callable[[float], np.ndarray]
    label: str = ""
    evaluate_many: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def sample(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.evaluate_many is not None:
            return np.asarray(self.evaluate_many(s), dtype=complex)
        out = np.empty((s.size, self.dim, self.dim), dtype=complex)
        for k, sk in enumerate(s.ravel()):
            out[k] = self.evaluate(float(sk))
        return out

    @classmethod
    def spin_half(cls, params: SpinHalfParams) -> "HamiltonianFamily":
        return cls(
            dim=2,
            evaluate=lambda s: spin_half_hamiltonian(params, s),
            label=f"spin_half(theta={params.theta:g}, omega0={params.omega0:g})",
            evaluate_many=lambda s: spin_half_hamiltonians(params, s),
        )

    @classmethod
    def from_samples(
        cls, grid: np.ndarray, matrices: np.ndarray, label: str = "sampled"
    ) -> "HamiltonianFamily":
        """Family interpolated entrywise piecewise-linearly between samples."""
        grid = np.asarray(grid, dtype=float)
        matrices = np.asarray(matrices, dtype=complex)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ValueError("sample grid must be strictly increasing with >= 2 points")
        if not (abs(grid[0]) < 1e-12 and abs(grid[-1] - 1.0) < 1e-12):
            raise ValueError("sample grid must span [0, 1]")
        dim = matrices.shape[1]

        def interp_many(s: np.ndarray) -> np.ndarray:
            s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
            idx = np.clip(np.searchsorted(grid, s, side="right") - 1, 0, grid.size - 2)
            w = (s - grid[idx]) / (grid[idx + 1] - grid[idx])
            return (
                matrices[idx] * (1.0 - w)[:, None, None]
                + matrices[idx + 1] * w[:, None, None]
            )

        return cls(
            dim=dim,
            evaluate=lambda s: interp_many(np.array([s]))[0],
            label=label,
            evaluate_many=interp_many,
        )

    @classmethod
    def from_file(cls, path) -> "HamiltonianFamily":
        """Read the sampled-family text format.

        Header line ``N M``, then M blocks of: one line with s_k followed by
        N lines of N ``re,im`` pairs separated by whitespace.
        """
        with open(path, "r", encoding="utf-8") as fh:
            tokens = fh.read().split("\n")
        lines = [ln for ln in (t.strip() for t in tokens) if ln]
        dim, count = (int(x) for x in lines[0].split())
        grid = np.empty(count)
        mats = np.empty((count, dim, dim), dtype=complex)
        pos = 1
        for k in range(count):
            grid[k] = float(lines[pos])
            pos += 1
            for i in range(dim):
                entries = lines[pos].split()
                pos += 1
                for j, ent in enumerate(entries):
                    re, im = ent.split(",")
                    mats[k, i, j] = complex(float(re), float(im))
        return cls.from_samples(grid, mats, label=str(path))


def write_family_file(path, grid: np.ndarray, matrices: np.ndarray) -> None:
    """Write the sampled-family text format read by ``HamiltonianFamily.from_file``."""
    grid = np.asarray(grid, dtype=float)
    matrices = np.asarray(matrices, dtype=complex)
    count, dim = matrices.shape[0], matrices.shape[1]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{dim} {count}\n")
        for k in range(count):
            fh.write(f"{grid[k]:.17g}\n")
            for i in range(dim):
                row = " ".join(
                    f"{matrices[k, i, j].real:.17g},{matrices[k, i, j].imag:.17g}"
                    for j in range(dim)
                )
                fh.write(row + "\n")


def random_analytic_family(
    seed: int, dim: int = 3, base_gap: float = 2.5, strength: float = 0.25
) -> HamiltonianFamily:
    """Seeded nondegenerate analytic family built from two Fourier harmonics.

    H(s) = D + sum_k [C_k e^{i 2 pi k s} + h.c.] with D = diag(0, g, 2g, ...)
    and ||C_k|| small against the base gap g, so levels stay separated.
    """
    rng = np.random.default_rng(seed)
    diag = base_gap * np.arange(dim, dtype=float)
    coeffs = [
        strength * (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
        for _ in (1, 2)
    ]

    def build_many(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        out = np.zeros((s.size, dim, dim), dtype=complex)
        out[:, np.arange(dim), np.arange(dim)] = diag
        for k, c in enumerate(coeffs, start=1):
            ph = np.exp(1j * 2.0 * np.pi * k * s)[:, None, None]
            out += c[None] * ph + np.conj(c).T[None] * np.conj(ph)
        return out

    return HamiltonianFamily(
        dim=dim,
        evaluate=lambda s: build_many(np.array([s]))[0],
        label=f"random_analytic(seed={seed}, dim={dim})",
        evaluate_many=build_many,
    )


def hermiticity_defect(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix - matrix.conj().T)))


@dataclass(frozen=True)
class ValidationReport:
    hermiticity_defect: float
    cyclicity_defect: float
    min_gap: float
    gap_tol: float
    passes: bool


def validate_family(
    family: HamiltonianFamily, grid_size: int = 201, gap_tol: Optional[float] = None
) -> ValidationReport:
    """Check Hermiticity, cyclicity H(0) = H(1) and the spectral-gap premise
    on a uniform grid.  Raises NonHermitianInput for malformed families."""
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    grid = np.linspace(0.0, 1.0, grid_size)
    mats = family.sample(grid)
    herm = float(np.max(np.abs(mats - np.conj(np.swapaxes(mats, 1, 2)))))
    if herm > HERMITICITY_TOL:
        raise NonHermitianInput(
            f"family '{family.label}' has Hermiticity defect {herm:.3e}"
        )
    cyc = float(np.max(np.abs(mats[0] - mats[-1])))
    energies = np.linalg.eigvalsh(mats)
    gaps = np.diff(energies, axis=1)
    min_gap = float(np.min(gaps)) if gaps.size else math.inf
    if gap_tol is None:
        gap_tol = 1e-6 * float(np.max(np.abs(energies)))
    # the cyclicity check is relative to the energy scale, so families with
    # large omega0 are not rejected over trailing-digit roundoff
    scale = max(1.0, float(np.max(np.abs(energies))))
    passes = cyc <= CYCLICITY_TOL * scale and min_gap > gap_tol
    return ValidationReport(
        hermiticity_defect=herm,
        cyclicity_defect=cyc,
        min_gap=min_gap,
        gap_tol=gap_tol,
        passes=passes,
    )


@dataclass
class EigenFrame:
    """Gauge-smoothed eigensystem on a grid.

    vectors[k, :, n] is the n-th eigenvector at grid[k]; the frame is
    cyclic (last vector equals the first up to continuation error) and
    berry[k, n] is the unwrapped Berry accumulator with berry[0] = 0.
    """

    grid: np.ndarray
    energies: np.ndarray  # (M, N), ascending in n
    vectors: np.ndarray  # (M, N, N)
    berry: np.ndarray  # (M, N)
    family_label: str = ""
    gauge_tol: float = field(default=1e-8)

    @property
    def dim(self) -> int:
        return self.energies.shape[1]

    def cyclic_defect(self, n: int) -> float:
        return float(np.linalg.norm(self.vectors[-1, :, n] - self.vectors[0, :, n]))


def fix_gauge(vectors: np.ndarray, min_overlap: float = 0.5) -> np.ndarray:
    """Parallel-transport continuation plus a uniform closing twist.

    Link overlaps <v_n(s_{k-1})|v_n(s_k)> are made real and positive, then
    each level is multiplied by exp(-i k delta / M) with delta the residual
    closure phase, so the returned frame is cyclic.  Idempotent on frames
    that are already gauge-fixed.
    """
    out = np.array(vectors, dtype=complex, copy=True)
    m = out.shape[0]
    # raw link overlaps (m-1, N); the cumulative fix phi_k = -sum arg(links)
    links = np.einsum("kin,kin->kn", np.conj(out[:-1]), out[1:])
    mags = np.abs(links)
    if np.min(mags) < min_overlap:
        k, n = np.unravel_index(int(np.argmin(mags)), mags.shape)
        raise GapTooSmall(
            f"continuation overlap {mags[k, n]:.3f} < {min_overlap} for level {n} "
            f"at grid index {k + 1}; refine the grid"
        )
    phases = np.zeros((m, out.shape[2]))
    phases[1:] = -np.cumsum(np.angle(links), axis=0)
    out *= np.exp(1j * phases)[:, None, :]
    # second sweep: the cumulative sum leaves O(m * eps) roundoff in the link
    # angles; one more pass brings the continuation to machine precision
    links = np.einsum("kin,kin->kn", np.conj(out[:-1]), out[1:])
    phases[1:] = -np.cumsum(np.angle(links), axis=0)
    out *= np.exp(1j * phases)[:, None, :]
    delta = np.angle(np.einsum("in,in->n", np.conj(out[0]), out[-1]))
    # the closure phase is only defined mod 2 pi; pick the branch that keeps
    # a globally nonvanishing component at constant phase (the natural
    # explicit gauge), recovered by tracking that component's winding
    mins = np.min(np.abs(out), axis=0)
    for n in range(out.shape[2]):
        for j in range(out.shape[1]):
            if mins[j, n] > 0.05:
                ph = np.unwrap(np.angle(out[:, j, n]))
                delta[n] = ph[-1] - ph[0]
                break
    twist = -np.outer(np.arange(m) / (m - 1), delta)
    out *= np.exp(1j * twist)[:, None, :]
    return out


def _discrete_holonomy(vectors_n: np.ndarray) -> float:
    """-arg of the closed overlap product for one level (first sample reused
    as the closing point)."""
    links = np.einsum("ki,ki->k", np.conj(vectors_n[:-1]), vectors_n[1:])
    closing = np.vdot(vectors_n[-1], vectors_n[0])
    return float(-(np.sum(np.angle(links)) + np.angle(closing)))


def smooth_eigenframe(family: HamiltonianFamily, grid_size: int = 2001) -> EigenFrame:
    """Eigendecompose the family on a uniform grid and smooth the gauge.

    The Berry accumulator comes from the link-phase increments; its endpoint
    is refined by one Richardson step over a 2x-decimated grid (the plain
    overlap product is only second-order accurate in the grid spacing).
    Requires an odd grid_size so the decimated grid reuses existing samples.
    """
    report = validate_family(family, grid_size=min(grid_size, 401))
    if not report.passes:
        raise GapTooSmall(
            f"family '{family.label}' failed validation: "
            f"min gap {report.min_gap:.3e} (tol {report.gap_tol:.3e}), "
            f"cyclicity defect {report.cyclicity_defect:.3e}"
        )
    if grid_size < 3 or grid_size % 2 == 0:
        raise ValueError("grid_size must be odd and >= 3")
    grid = np.linspace(0.0, 1.0, grid_size)
    mats = family.sample(grid)
    energies, vectors = np.linalg.eigh(mats)
    vectors = fix_gauge(vectors)

    dim = family.dim
    berry = np.zeros((grid_size, dim))
    for n in range(dim):
        links = np.einsum(
            "ki,ki->k", np.conj(vectors[:-1, :, n]), vectors[1:, :, n]
        )
        berry[1:, n] = -np.cumsum(np.angle(links))
        gamma_h = _discrete_holonomy(vectors[:, :, n])
        gamma_2h = _discrete_holonomy(vectors[::2, :, n])
        refined = (4.0 * gamma_h - gamma_2h) / 3.0
        # distribute the endpoint refinement linearly; keeps berry[0] = 0
        berry[:, n] += (refined - berry[-1, n]) * grid
    return EigenFrame(
        grid=grid,
        energies=energies,
        vectors=vectors,
        berry=berry,
        family_label=family.label,
    )


def berry_phase(frame: EigenFrame, n: int) -> float:
    """Unwrapped Berry accumulator at s = 1 for level n."""
    if not 0 <= n < frame.dim:
        raise IndexError(f"level {n} out of range for dim {frame.dim}")
    return float(frame.berry[-1, n])
