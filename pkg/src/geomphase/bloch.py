"""Bloch-sphere geometry for two-level paths: the ray -> sphere map, signed
accumulated solid angles (multi-winding and self-crossing curves included),
transverse self-intersection counting, and the loop-corrected solid angle.

The solid angle is the spherical line integral of (1 - cos Theta) dPhi with
the azimuth unwrapped continuously, measured with respect to the reference
pole farthest from the path centroid and normalized to the north-pole gauge,
so latitude circles give exactly 2 pi (1 - cos theta) per traversal.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AntipodalEndpoints, DimensionMismatch, TooCoarse
from .phase import wrap_phase

CLOSURE_TOL = 1e-6
POLE_TOL = 1e-8
MAX_SEGMENT_LENGTH = 0.5
CROSSING_TOL = 1e-9


def to_bloch(state: np.ndarray) -> np.ndarray:
    """Map a normalized two-component state to its Bloch-sphere point
    (global-phase invariant)."""
    state = np.asarray(state, dtype=complex)
    if state.shape != (2,):
        raise DimensionMismatch(f"expected a 2-component state, got shape {state.shape}")
    cross = np.conj(state[0]) * state[1]
    return np.array(
        [
            2.0 * cross.real,
            2.0 * cross.imag,
            abs(state[0]) ** 2 - abs(state[1]) ** 2,
        ]
    )


def states_to_bloch(states: np.ndarray) -> np.ndarray:
    states = np.asarray(states, dtype=complex)
    if states.shape[1] != 2:
        raise DimensionMismatch("Bloch mapping requires dim-2 states")
    cross = np.conj(states[:, 0]) * states[:, 1]
    return np.stack(
        [
            2.0 * cross.real,
            2.0 * cross.imag,
            np.abs(states[:, 0]) ** 2 - np.abs(states[:, 1]) ** 2,
        ],
        axis=1,
    )


@dataclass
class BlochPath:
    """Ordered unit vectors on the sphere; ``closed`` marks an endpoint gap
    within the closure tolerance."""

    points: np.ndarray
    closed: bool = False

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        norms = np.linalg.norm(pts, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-9:
            raise ValueError("Bloch points must be unit vectors within 1e-9")
        dots = np.clip(np.sum(pts[:-1] * pts[1:], axis=1), -1.0, 1.0)
        if pts.shape[0] >= 2 and np.max(np.arccos(dots)) >= math.pi / 2:
            raise ValueError(
                "consecutive Bloch samples separated by >= pi/2; path undersampled"
            )
        self.points = pts
        self.closed = bool(
            np.linalg.norm(pts[-1] - pts[0]) <= CLOSURE_TOL
        )

    @classmethod
    def from_states(cls, states: np.ndarray) -> "BlochPath":
        return cls(points=states_to_bloch(states))

    def to_csv(self, path, grid=None) -> None:
        grid = (
            np.linspace(0.0, 1.0, self.points.shape[0]) if grid is None else grid
        )
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("s,x,y,z\n")
            for s, p in zip(grid, self.points):
                fh.write(f"{s:.17g},{p[0]:.17g},{p[1]:.17g},{p[2]:.17g}\n")


class Closure(enum.Enum):
    ALREADY_CLOSED = "already_closed"
    GEODESIC_CLOSE = "geodesic_close"


def _slerp(a: np.ndarray, b: np.ndarray, count: int) -> np.ndarray:
    dot = float(np.clip(np.dot(a, b), -1.0, 1.0))
    angle = math.acos(dot)
    if angle < 1e-15:
        return np.empty((0, 3))
    t = np.linspace(0.0, 1.0, count + 2)[1:-1]
    pts = (
        np.sin((1.0 - t) * angle)[:, None] * a + np.sin(t * angle)[:, None] * b
    ) / math.sin(angle)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _omega_north(pts: np.ndarray) -> tuple[float, float]:
    """Accumulated (1 - cos Theta) dPhi integral in the north-pole gauge and
    the azimuthal winding in turns."""
    z = np.clip(pts[:, 2], -1.0, 1.0)
    phi = np.unwrap(np.arctan2(pts[:, 1], pts[:, 0]))
    dphi = np.diff(phi)
    omega = float(np.sum((1.0 - 0.5 * (z[:-1] + z[1:])) * dphi))
    winding = float((phi[-1] - phi[0]) / (2.0 * math.pi))
    return omega, winding


def solid_angle(path: BlochPath, closure: Closure = Closure.GEODESIC_CLOSE) -> float:
    """Signed accumulated solid angle subtended by the path (steradians,
    north-pole gauge, not reduced mod 4 pi).

    Open paths are closed along the geodesic joining the endpoints when
    requested.  Self-crossing and multi-winding curves accumulate the area
    of every loop with its orientation sign.
    """
    pts = path.points
    if pts.shape[0] < 3:
        raise ValueError("need at least 3 points for a solid angle")
    if closure is Closure.GEODESIC_CLOSE and not path.closed:
        if np.dot(pts[0], pts[-1]) < -1.0 + 1e-12:
            raise AntipodalEndpoints(
                "endpoints are antipodal; the closing geodesic is ill-defined"
            )
        gap = float(np.arccos(np.clip(np.dot(pts[-1], pts[0]), -1.0, 1.0)))
        arc = _slerp(pts[-1], pts[0], max(2, int(math.ceil(gap / 0.01))))
        pts = np.vstack([pts, arc, pts[0]])
    elif not path.closed:
        # treat as closed by jumping straight back to the start
        pts = np.vstack([pts, pts[0]])
    else:
        pts = np.vstack([pts, pts[0]]) if np.linalg.norm(pts[-1] - pts[0]) > 0 else pts
    if np.max(np.abs(pts[:, 2])) > 1.0 - POLE_TOL:
        warnings.warn(
            "path sample within 1e-8 of a pole; azimuth is ill-conditioned there",
            stacklevel=2,
        )
    centroid = pts.mean(axis=0)
    if centroid[2] > 0:
        # reference pole = south (farthest from the centroid): rotate by pi
        # about x, integrate in the rotated frame, undo the gauge change
        flipped = pts * np.array([1.0, -1.0, -1.0])
        omega_f, winding_f = _omega_north(flipped)
        return omega_f - 4.0 * math.pi * winding_f
    omega, _ = _omega_north(pts)
    return omega


def gp_from_solid_angle(omega: float) -> float:
    """Geometric phase predicted by the solid angle: wrap(-omega / 2)."""
    return wrap_phase(-omega / 2.0)


def corrected_solid_angle(
    omega: float, a1mag2: float, omega0: float, T: float
) -> float:
    """Loop-corrected solid angle of an imperfect path:
    omega - 2 |a1|^2 omega0 T (one small loop of signed area -4 pi |a1|^2
    per field revolution, omega0 T / (2 pi) revolutions in total)."""
    if not 0.0 <= a1mag2 <= 1.0:
        raise ValueError(f"|a1|^2 must lie in [0, 1], got {a1mag2}")
    return omega - 2.0 * a1mag2 * omega0 * T


@dataclass(frozen=True)
class SolidAngleReport:
    omega: float
    crossings: int
    omega_corrected: float
    gp_predicted: float


def count_self_crossings(path: BlochPath) -> int:
    """Transverse intersections between non-adjacent great-circle segments
    of the spherical polyline."""
    pts = path.points
    a1, a2 = pts[:-1], pts[1:]
    nseg = a1.shape[0]
    lengths = np.arccos(np.clip(np.sum(a1 * a2, axis=1), -1.0, 1.0))
    if np.max(lengths) > MAX_SEGMENT_LENGTH:
        raise TooCoarse(
            f"segment geodesic length {np.max(lengths):.3f} exceeds "
            f"{MAX_SEGMENT_LENGTH}; sample the path more densely"
        )
    normals = np.cross(a1, a2)
    shares_start_end = path.closed
    count = 0
    for i in range(nseg - 2):
        j0 = i + 2
        js = np.arange(j0, nseg)
        if shares_start_end and i == 0:
            js = js[js != nseg - 1]
        if js.size == 0:
            continue
        t = np.cross(normals[i][None, :], normals[js])
        tnorm = np.linalg.norm(t, axis=1)
        ok = tnorm > CROSSING_TOL
        if not np.any(ok):
            continue
        t = t[ok] / tnorm[ok, None]
        jsel = js[ok]
        for cand in (t, -t):
            in_i = (
                np.einsum("kj,j->k", np.cross(a1[i][None, :], cand), normals[i])
                > 0
            ) & (
                np.einsum("kj,j->k", np.cross(cand, a2[i][None, :]), normals[i])
                > 0
            )
            in_j = (
                np.einsum("kj,kj->k", np.cross(a1[jsel], cand), normals[jsel]) > 0
            ) & (
                np.einsum("kj,kj->k", np.cross(cand, a2[jsel]), normals[jsel]) > 0
            )
            count += int(np.sum(in_i & in_j))
    return count
