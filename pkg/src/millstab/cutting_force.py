"""Multi-tooth milling force geometry and periodic directional coefficients.

All quantities are SI (m, N, rad) unless a docstring says otherwise. The
cutter has N identically spaced zero-helix teeth; the force model is linear
in chip thickness with additive edge forces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * math.pi


class Direction(Enum):
    """Cutter rotation relative to feed."""

    UP = "up"
    DOWN = "down"


@dataclass(frozen=True)
class ToolGeometry:
    teeth_count: int  # N
    diameter: float  # m
    direction: Direction

    def __post_init__(self):
        if self.teeth_count < 1:
            raise DomainError(f"teeth_count must be >= 1, got {self.teeth_count}")
        if not (self.diameter > 0.0 and math.isfinite(self.diameter)):
            raise DomainError(f"diameter must be positive, got {self.diameter}")


@dataclass(frozen=True)
class CuttingCoefficients:
    tangential_cutting: float  # N/m^2
    normal_cutting: float  # N/m^2
    tangential_edge: float  # N/m
    normal_edge: float  # N/m

    def __post_init__(self):
        for name in ("tangential_cutting", "normal_cutting", "tangential_edge", "normal_edge"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.tangential_cutting <= 0.0 or self.normal_cutting <= 0.0:
            raise DomainError("cutting coefficients must be positive")


@dataclass(frozen=True)
class CuttingConditions:
    axial_depth: float  # m
    radial_depth: float  # m
    spindle_speed: float  # rev/min
    feed_per_tooth: tuple[float, float]  # m/tooth, (x, y)

    def __post_init__(self):
        if self.axial_depth < 0.0:
            raise DomainError(f"axial_depth must be >= 0, got {self.axial_depth}")
        if self.radial_depth < 0.0:
            raise DomainError(f"radial_depth must be >= 0, got {self.radial_depth}")
        if not self.spindle_speed > 0.0:
            raise DomainError(f"spindle_speed must be positive, got {self.spindle_speed}")
        if len(self.feed_per_tooth) != 2:
            raise DomainError("feed_per_tooth must be a 2-vector (x, y)")

    @property
    def feed(self) -> np.ndarray:
        return np.array(self.feed_per_tooth, dtype=float)


@dataclass(frozen=True)
class ImmersionWindow:
    start_angle: float  # rad
    exit_angle: float  # rad

    def __post_init__(self):
        if not (0.0 <= self.start_angle <= self.exit_angle <= math.pi + 1e-12):
            raise DomainError(
                f"immersion window must satisfy 0 <= start <= exit <= pi, "
                f"got ({self.start_angle}, {self.exit_angle})"
            )


@dataclass
class PeriodicCoefficients:
    """Interval-averaged force coefficients over one tooth-passing angle.

    ``edge_terms[k]`` and ``directional_terms[k]`` are the averages of the
    continuous coefficient functions over the centered interval
    ``[(k - 1/2) dtheta, (k + 1/2) dtheta]``; both extend periodically in k.
    """

    steps: int  # m
    step_angle: float  # dtheta = (2 pi / N) / m
    edge_terms: np.ndarray  # (m, r)
    directional_terms: np.ndarray  # (m, r, r)

    def __post_init__(self):
        self.edge_terms = np.asarray(self.edge_terms, dtype=float)
        self.directional_terms = np.asarray(self.directional_terms, dtype=float)
        if self.steps < 1:
            raise DomainError(f"steps must be >= 1, got {self.steps}")
        if not self.step_angle > 0.0:
            raise DomainError("step_angle must be positive")
        m, r = self.edge_terms.shape
        if m != self.steps or self.directional_terms.shape != (m, r, r):
            raise DomainError(
                f"coefficient shapes inconsistent: edge {self.edge_terms.shape}, "
                f"directional {self.directional_terms.shape}, steps {self.steps}"
            )
        if not (np.all(np.isfinite(self.edge_terms)) and np.all(np.isfinite(self.directional_terms))):
            raise DomainError("coefficient entries must be finite")

    @property
    def axes(self) -> int:
        return self.edge_terms.shape[1]


def immersion_window(direction: Direction, radial_depth: float, diameter: float) -> ImmersionWindow:
    """Entry/exit angles of the cut for the given radial immersion."""
    if not 0.0 <= radial_depth <= diameter:
        raise DomainError(
            f"radial_depth must lie in [0, diameter], got {radial_depth} with diameter {diameter}"
        )
    ratio = 2.0 * radial_depth / diameter
    if direction is Direction.UP:
        return ImmersionWindow(0.0, math.acos(max(-1.0, 1.0 - ratio)))
    return ImmersionWindow(math.acos(min(1.0, ratio - 1.0)), math.pi)


def tooth_angle(spindle_angle: float, tooth_index: int, teeth_count: int) -> float:
    """Angular position of tooth j (1-based) at the given spindle angle."""
    if not 1 <= tooth_index <= teeth_count:
        raise DomainError(
            f"tooth_index must lie in [1, {teeth_count}], got {tooth_index}"
        )
    return spindle_angle + TWO_PI / teeth_count * (tooth_index - 1)


def engagement(angle: float, window: ImmersionWindow) -> int:
    """1 if the tooth at ``angle`` is in cut, else 0. Bounds are inclusive."""
    reduced = math.fmod(angle, TWO_PI)
    if reduced < 0.0:
        reduced += TWO_PI
    return int(window.start_angle <= reduced <= window.exit_angle)


def rotation_matrix(angle: float) -> np.ndarray:
    """Tangential-normal to Cartesian rotation for a tooth at ``angle``."""
    c = math.cos(angle)
    s = math.sin(angle)
    return np.array([[-c, -s], [s, -c]])


def chip_thickness(
    angle: float,
    feed: np.ndarray,
    vib: np.ndarray,
    vib_delayed: np.ndarray,
) -> float:
    """Instantaneous chip thickness of a tooth at ``angle``.

    ``feed`` is the feed-per-tooth vector; ``vib`` and ``vib_delayed`` are the
    relative tool/workpiece displacements now and one tooth period ago.
    """
    u = np.asarray(feed, dtype=float) + np.asarray(vib, dtype=float) - np.asarray(vib_delayed, dtype=float)
    # R is orthogonal, so the inverse is the transpose
    return float(-(rotation_matrix(angle).T @ u)[1])


def _tooth_angles(spindle_angle: np.ndarray | float, teeth_count: int) -> np.ndarray:
    """Tooth angles for all teeth, shape (..., N)."""
    offsets = TWO_PI / teeth_count * np.arange(teeth_count)
    return np.asarray(spindle_angle, dtype=float)[..., np.newaxis] + offsets


def _engaged(angles: np.ndarray, window: ImmersionWindow) -> np.ndarray:
    reduced = np.mod(angles, TWO_PI)
    return (reduced >= window.start_angle) & (reduced <= window.exit_angle)


def _coefficient_sums(
    angles: np.ndarray,
    engaged: np.ndarray,
    coeffs: CuttingCoefficients,
) -> tuple[np.ndarray, np.ndarray]:
    """Directional sums over teeth for tooth angles of shape (..., N).

    ``engaged`` may carry a fixed engagement pattern so callers can evaluate
    one-sided limits at switching angles.
    """
    g = engaged.astype(float)
    kct, kcn = coeffs.tangential_cutting, coeffs.normal_cutting
    ket, ken = coeffs.tangential_edge, coeffs.normal_edge
    cos_p = np.cos(angles)
    sin_p = np.sin(angles)
    cos_2p = np.cos(2.0 * angles)
    sin_2p = np.sin(2.0 * angles)

    r1 = -np.sum(g * (ket * cos_p + ken * sin_p), axis=-1)
    r2 = np.sum(g * (ket * sin_p - ken * cos_p), axis=-1)
    s11 = 0.5 * np.sum(g * (kct * sin_2p + kcn * (1.0 - cos_2p)), axis=-1)
    s12 = 0.5 * np.sum(g * (kct * (1.0 + cos_2p) + kcn * sin_2p), axis=-1)
    s21 = 0.5 * np.sum(g * (-kct * (1.0 - cos_2p) + kcn * sin_2p), axis=-1)
    s22 = 0.5 * np.sum(g * (-kct * sin_2p + kcn * (1.0 + cos_2p)), axis=-1)

    r = np.stack([r1, r2], axis=-1)
    s = np.stack(
        [np.stack([s11, s12], axis=-1), np.stack([s21, s22], axis=-1)],
        axis=-2,
    )
    return r, s


def directional_coefficients(
    spindle_angle: float,
    coeffs: CuttingCoefficients,
    window: ImmersionWindow,
    teeth_count: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise periodic force coefficients (r, S) at a spindle angle."""
    angles = _tooth_angles(float(spindle_angle), teeth_count)
    r, s = _coefficient_sums(angles, _engaged(angles, window), coeffs)
    return r, s


def _switch_angles(window: ImmersionWindow, teeth_count: int, lo: float, hi: float) -> list[float]:
    """Spindle angles in (lo, hi) where any tooth enters or exits the cut."""
    crossings: list[float] = []
    for j in range(teeth_count):
        offset = TWO_PI / teeth_count * j
        for target in (window.start_angle, window.exit_angle):
            base = target - offset
            l0 = math.floor((lo - base) / TWO_PI)
            l1 = math.ceil((hi - base) / TWO_PI)
            for l in range(l0, l1 + 1):
                theta = base + TWO_PI * l
                if lo < theta < hi:
                    crossings.append(theta)
    crossings.sort()
    deduped: list[float] = []
    for theta in crossings:
        if not deduped or theta - deduped[-1] > 1e-12:
            deduped.append(theta)
    return deduped


def averaged_coefficients(
    coeffs: CuttingCoefficients,
    window: ImmersionWindow,
    teeth_count: int,
    steps: int,
    panels_per_interval: int = 32,
) -> PeriodicCoefficients:
    """Zero-phase interval averages of the periodic force coefficients.

    Each average runs over the interval centered on its sample angle, by
    composite trapezoid quadrature with engagement switching angles inserted
    as breakpoints (the integrand is only piecewise smooth there). Engagement
    is held fixed per smooth piece so endpoint samples take one-sided limits.
    """
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")
    if panels_per_interval < 2:
        raise DomainError("panels_per_interval must be >= 2")
    period = TWO_PI / teeth_count
    dtheta = period / steps
    edge = np.zeros((steps, 2))
    directional = np.zeros((steps, 2, 2))
    for k in range(steps):
        lo = (k - 0.5) * dtheta
        hi = (k + 0.5) * dtheta
        bounds = [lo, *_switch_angles(window, teeth_count, lo, hi), hi]
        r_acc = np.zeros(2)
        s_acc = np.zeros((2, 2))
        for a, b in zip(bounds[:-1], bounds[1:]):
            width = b - a
            if width <= 1e-15 * dtheta:
                continue
            mid_angles = _tooth_angles((a + b) / 2.0, teeth_count)
            mask = _engaged(mid_angles, window)
            if not mask.any():
                continue
            panels = max(2, round(panels_per_interval * width / dtheta))
            nodes = np.linspace(a, b, panels + 1)
            angles = _tooth_angles(nodes, teeth_count)
            r_nodes, s_nodes = _coefficient_sums(angles, np.broadcast_to(mask, angles.shape), coeffs)
            r_acc += np.trapezoid(r_nodes, nodes, axis=0)
            s_acc += np.trapezoid(s_nodes, nodes, axis=0)
        edge[k] = r_acc / dtheta
        directional[k] = s_acc / dtheta
    return PeriodicCoefficients(steps=steps, step_angle=dtheta, edge_terms=edge, directional_terms=directional)
