"""Loss models for thin screens crossing a radio path.

Implements the constant-obstruction model, the four-edge arctan knife-edge
approximation, double knife-edge diffraction with and without per-edge
phase correction, and a semi-empirical thin-screen method that avoids the
Fresnel integral entirely (after ITU-R P.526-15: the single-edge loss
approximation of its section 4.1 combined per its section 5.1 finite-width
screen construction).

Two Fresnel evaluators sit behind one contract: a closed-form series
(production path, see _kernels) and an adaptive quadrature used as the
reference oracle. ``DiffractionConfig.fresnel_method`` selects one.

All functions are pure; the module-level ``diagnostics`` object only counts
clamp/cap events and exists per process.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import _kernels
from .errors import GeometryError

log = logging.getLogger(__name__)

# Far-field cutoff expressed as a diffraction parameter: an edge 10 first
# Fresnel radii away from the path has nu = 10*sqrt(2).
FAR_FIELD_NU = 10.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class DiffractionConfig:
    fresnel_method: str = "approx"        # "approx" | "quadrature"
    loss_cap_db: float = 80.0             # all models clamp to this
    metis_log_floor: float = 1e-8         # log argument floor before clamping
    far_field_nu: float = FAR_FIELD_NU    # edge contributions beyond are asymptotic
    quadrature_tol: float = 1e-9
    golden_section_tol: float = 1e-6      # meters, edge stationary-point search


DEFAULT_CONFIG = DiffractionConfig()


class Diagnostics:
    """Per-process counters for numeric clamping, reported by the CLI."""

    def __init__(self):
        self.metis_clamps = 0
        self.cap_hits = 0

    def reset(self):
        self.metis_clamps = 0
        self.cap_hits = 0

    def snapshot(self) -> dict:
        return {"metis_clamps": self.metis_clamps, "cap_hits": self.cap_hits}

    @property
    def total(self) -> int:
        return self.metis_clamps + self.cap_hits


diagnostics = Diagnostics()


@dataclass(frozen=True)
class FresnelResult:
    c: float
    s: float

    @property
    def value(self) -> complex:
        return complex(self.c, self.s)


@dataclass(frozen=True)
class EdgeGeometry:
    """Distances and signed obstruction depth of one screen edge.

    depth is positive when this edge's half-plane (bounded by the edge,
    containing the screen) covers the direct path, negative otherwise.
    los_distance, when provided, is the perpendicular distance from the
    infinite direct-path line to the edge segment and is used only to pick
    the positive edge of each pair in the four-edge arctan model.
    """

    d_tx: float
    d_rx: float
    distance: float
    depth: float
    wavelength: float
    los_distance: float | None = None

    def __post_init__(self):
        if not (self.d_tx > 0 and self.d_rx > 0):
            raise GeometryError("edge-to-node distances must be positive")
        if self.wavelength <= 0:
            raise GeometryError("wavelength must be positive")
        if self.distance <= 0:
            raise GeometryError("node separation must be positive")
        if self.d_tx + self.d_rx < self.distance - 1e-9:
            raise GeometryError(
                f"edge path {self.d_tx + self.d_rx} shorter than direct path {self.distance}"
            )

    @property
    def excess_path(self) -> float:
        return max(self.d_tx + self.d_rx - self.distance, 0.0)


@dataclass(frozen=True)
class ScreenDiffractionGeometry:
    """The four edge records of one screen against one path segment."""

    w1: EdgeGeometry
    w2: EdgeGeometry
    h1: EdgeGeometry
    h2: EdgeGeometry
    los_blocked: bool

    def __post_init__(self):
        edges = self.edges
        r = edges[0].distance
        lam = edges[0].wavelength
        for e in edges[1:]:
            if abs(e.distance - r) > 1e-9 * max(r, 1.0) or abs(e.wavelength - lam) > 1e-15:
                raise GeometryError("edges must share node separation and wavelength")

    @property
    def edges(self) -> tuple[EdgeGeometry, EdgeGeometry, EdgeGeometry, EdgeGeometry]:
        return (self.w1, self.w2, self.h1, self.h2)


class LossModel:
    """Marker base for the loss model selectors."""


@dataclass(frozen=True)
class Obstruction(LossModel):
    loss_db: float = 10.0

    def __post_init__(self):
        if not (math.isfinite(self.loss_db) and self.loss_db >= 0):
            raise GeometryError("obstruction loss must be >= 0 dB")


@dataclass(frozen=True)
class Metis(LossModel):
    pass


@dataclass(frozen=True)
class Dked(LossModel):
    pass


@dataclass(frozen=True)
class DkedPc(LossModel):
    pass


@dataclass(frozen=True)
class ItuSe(LossModel):
    pass


MODEL_REGISTRY: dict[str, type[LossModel]] = {
    "obstruction": Obstruction,
    "metis": Metis,
    "dked": Dked,
    "dked_pc": DkedPc,
    "itu_se": ItuSe,
}


def model_name(model: LossModel) -> str:
    for name, cls in MODEL_REGISTRY.items():
        if isinstance(model, cls):
            return name
    raise GeometryError(f"unknown loss model {model!r}")


def fresnel_zone_radius(n: int, wavelength: float, d_tx: float, d_rx: float) -> float:
    """Radius of the n-th Fresnel zone at a point splitting the path d_tx/d_rx."""
    if n < 1 or int(n) != n:
        raise GeometryError("zone order must be a positive integer")
    if wavelength <= 0 or d_tx <= 0 or d_rx <= 0:
        raise GeometryError("wavelength and distances must be positive")
    return math.sqrt(n * wavelength * d_tx * d_rx / (d_tx + d_rx))


def _fresnel_quadrature(nu: float, tol: float) -> tuple[float, float]:
    """Adaptive quadrature of the Fresnel integrand, split per unit interval."""
    a = abs(nu)
    if a == 0.0:
        return 0.0, 0.0
    pieces = max(int(math.ceil(a)), 1)
    bounds = np.linspace(0.0, a, pieces + 1)
    tol_piece = tol / pieces
    c = 0.0
    s = 0.0
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        c += integrate.quad(lambda x: math.cos(0.5 * math.pi * x * x), lo, hi,
                            epsabs=tol_piece, limit=200)[0]
        s += integrate.quad(lambda x: math.sin(0.5 * math.pi * x * x), lo, hi,
                            epsabs=tol_piece, limit=200)[0]
    if nu < 0:
        return -c, -s
    return c, s


def fresnel_integral(nu: float, config: DiffractionConfig = DEFAULT_CONFIG,
                     method: str | None = None) -> FresnelResult:
    """Complex Fresnel integral F(nu) = C(nu) + j S(nu).

    method "approx" uses the closed-form series, "quadrature" the adaptive
    reference integrator (absolute tolerance config.quadrature_tol).
    """
    if not math.isfinite(nu):
        raise GeometryError("nu must be finite")
    method = method or config.fresnel_method
    if method == "approx":
        c, s = _kernels.fresnel_cs(nu)
    elif method == "quadrature":
        c, s = _fresnel_quadrature(nu, config.quadrature_tol)
    else:
        raise GeometryError(f"unknown fresnel method {method!r}")
    return FresnelResult(c, s)


def fresnel_integral_grid(nus: np.ndarray, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature C, S over a sorted grid, integrating increment by increment.

    Used as the oracle against the closed-form path on dense grids, where
    per-point integration from zero would be needlessly slow.
    """
    nus = np.asarray(nus, dtype=np.float64)
    order = np.argsort(nus)
    sorted_nus = nus[order]
    c = np.empty_like(sorted_nus)
    s = np.empty_like(sorted_nus)
    tol_piece = tol / max(len(nus), 1)
    c0, s0 = _fresnel_quadrature(float(sorted_nus[0]), tol)
    c[0], s[0] = c0, s0
    for i in range(1, len(sorted_nus)):
        lo, hi = float(sorted_nus[i - 1]), float(sorted_nus[i])
        c[i] = c[i - 1] + integrate.quad(
            lambda x: math.cos(0.5 * math.pi * x * x), lo, hi, epsabs=tol_piece, limit=200)[0]
        s[i] = s[i - 1] + integrate.quad(
            lambda x: math.sin(0.5 * math.pi * x * x), lo, hi, epsabs=tol_piece, limit=200)[0]
    out_c = np.empty_like(c)
    out_s = np.empty_like(s)
    out_c[order] = c
    out_s[order] = s
    return out_c, out_s


def diffraction_parameter(edge: EdgeGeometry) -> float:
    """Signed Fresnel-Kirchhoff parameter of one edge."""
    return edge.depth * math.sqrt(
        (2.0 / edge.wavelength) * (edge.d_tx + edge.d_rx) / (edge.d_tx * edge.d_rx)
    )


def obstruction_loss(blocked: bool, loss_db: float) -> float:
    """Constant loss while shadowed, zero otherwise."""
    if loss_db < 0:
        raise GeometryError("obstruction loss must be >= 0 dB")
    return loss_db if blocked else 0.0


def _capped(loss_db: float, config: DiffractionConfig) -> float:
    if loss_db > config.loss_cap_db:
        diagnostics.cap_hits += 1
        return config.loss_cap_db
    return loss_db


def metis_edge_term(edge: EdgeGeometry, sign: float, config: DiffractionConfig = DEFAULT_CONFIG) -> float:
    """Single-edge shadowing term of the arctan approximation, in (-1/2, 1/2]."""
    if sign not in (1.0, -1.0, 1, -1):
        raise GeometryError("sign must be +1 or -1")
    excess = edge.d_tx + edge.d_rx - edge.distance
    if excess < -1e-9:
        raise GeometryError("edge path shorter than the direct path")
    excess = max(excess, 0.0)
    # beyond the far-field cutoff the arctan has saturated to +-1/2
    if 2.0 * math.sqrt(excess / edge.wavelength) >= config.far_field_nu:
        return 0.5 * sign
    return math.atan(sign * 0.5 * math.pi * math.sqrt(math.pi * excess / edge.wavelength)) / math.pi


def _metis_signs(geom: ScreenDiffractionGeometry) -> dict[str, float]:
    if geom.los_blocked:
        return {"w1": 1.0, "w2": 1.0, "h1": 1.0, "h2": 1.0}
    signs: dict[str, float] = {}
    for a, b in (("w1", "w2"), ("h1", "h2")):
        ea, eb = getattr(geom, a), getattr(geom, b)
        key_a = ea.los_distance if ea.los_distance is not None else abs(ea.depth)
        key_b = eb.los_distance if eb.los_distance is not None else abs(eb.depth)
        if key_a >= key_b:
            signs[a], signs[b] = 1.0, -1.0
        else:
            signs[a], signs[b] = -1.0, 1.0
    return signs


def metis_loss(geom: ScreenDiffractionGeometry, config: DiffractionConfig = DEFAULT_CONFIG) -> float:
    """Four-edge arctan knife-edge loss.

    Shadowed paths take all four terms positive; otherwise only the edge of
    each pair farther from the direct line contributes positively.
    """
    signs = _metis_signs(geom)
    terms = {name: metis_edge_term(getattr(geom, name), signs[name], config)
             for name in ("w1", "w2", "h1", "h2")}
    arg = 1.0 - (terms["h1"] + terms["h2"]) * (terms["w1"] + terms["w2"])
    if arg < config.metis_log_floor:
        diagnostics.metis_clamps += 1
        arg = config.metis_log_floor
    return _capped(-20.0 * math.log10(arg), config)


def sked(nu: float, config: DiffractionConfig = DEFAULT_CONFIG) -> complex:
    """Complex single knife-edge factor for a signed diffraction parameter.

    Positive nu means the edge's half-plane shadows the path. Beyond the
    far-field cutoff the exact asymptotes (0 in deep shadow, 1 in open
    space) are returned.
    """
    if nu >= config.far_field_nu:
        return 0.0 + 0.0j
    if nu <= -config.far_field_nu:
        return 1.0 + 0.0j
    f = fresnel_integral(nu, config)
    return 0.5 * (1.0 + 1.0j) * ((0.5 - f.c) - 1.0j * (0.5 - f.s))


def _magnitude_loss(amplitude: float, config: DiffractionConfig) -> float:
    floor = 10.0 ** (-config.loss_cap_db / 20.0)
    if amplitude <= floor:
        diagnostics.cap_hits += 1
        return config.loss_cap_db
    return _capped(-20.0 * math.log10(amplitude), config)


def dked_loss(nu1: float, nu2: float, config: DiffractionConfig = DEFAULT_CONFIG) -> float:
    """Double knife-edge loss from the two lateral-edge parameters."""
    total = sked(nu1, config) + sked(nu2, config)
    return _magnitude_loss(abs(total), config)


def _turn_phasor(path_delta: float, wavelength: float) -> complex:
    """exp(-j 2 pi path_delta / wavelength), computed on the fractional turn.

    Reducing to the fractional number of turns first keeps integer
    multiples of the wavelength exactly phase-neutral and preserves
    precision for deltas spanning many wavelengths.
    """
    turns = path_delta / wavelength
    frac = turns - round(turns)
    return complex(math.cos(-2.0 * math.pi * frac), math.sin(-2.0 * math.pi * frac))


def dked_pc_loss(nu1: float, nu2: float, delta1: float, delta2: float,
                 wavelength: float, config: DiffractionConfig = DEFAULT_CONFIG) -> float:
    """Double knife-edge loss with per-edge phase correction.

    delta1/delta2 are the excess lengths of the two diffracted paths over
    the direct path, in meters; they must be non-negative.
    """
    if delta1 < 0 or delta2 < 0:
        raise GeometryError("excess path lengths must be >= 0")
    if wavelength <= 0:
        raise GeometryError("wavelength must be positive")
    total = (sked(nu1, config) * _turn_phasor(delta1, wavelength)
             + sked(nu2, config) * _turn_phasor(delta2, wavelength))
    return _magnitude_loss(abs(total), config)


def _itu_edge_factor(nu: float, config: DiffractionConfig) -> complex:
    """Semi-empirical complex edge contribution.

    Shadow side: amplitude from the knife-edge loss approximation, phase
    from the stationary excess path (pi nu^2 / 2 plus the quarter-turn of
    the edge wave). Lit side by Babinet complement, which produces the
    fringes near the transition.
    """
    if nu >= config.far_field_nu:
        return 0.0 + 0.0j
    if nu <= -config.far_field_nu:
        return 1.0 + 0.0j
    if nu >= 0.0:
        amp = 10.0 ** (-_kernels.knife_edge_loss_db(nu) / 20.0)
        phase = -(0.25 * math.pi + 0.5 * math.pi * nu * nu)
        return amp * complex(math.cos(phase), math.sin(phase))
    return 1.0 - _itu_edge_factor(-nu, config)


def itu_se_loss(geom: ScreenDiffractionGeometry, config: DiffractionConfig = DEFAULT_CONFIG) -> float:
    """Semi-empirical thin-screen loss without Fresnel integrals.

    In shadow the four single-edge estimates combine on a power basis (the
    standard's average-loss composition for a finite screen); outside it
    the coherent lit-side edge factors reproduce the rapid fluctuations
    across the transition. Valid when the wavelength is small against the
    screen; larger wavelengths only log a warning.
    """
    width = geom.w1.depth + geom.w2.depth
    height = geom.h1.depth + geom.h2.depth
    lam = geom.w1.wavelength
    if lam > 0.25 * min(abs(width), abs(height)):
        log.warning(
            "semi-empirical screen model outside its small-wavelength regime "
            "(lambda=%.3g m, screen %.3g x %.3g m)", lam, width, height,
        )
    nus = {name: diffraction_parameter(getattr(geom, name)) for name in ("w1", "w2", "h1", "h2")}
    if geom.los_blocked:
        power = 0.0
        for nu in nus.values():
            if nu < config.far_field_nu:
                power += 10.0 ** (-_kernels.knife_edge_loss_db(nu) / 10.0)
        if power <= 10.0 ** (-config.loss_cap_db / 10.0):
            diagnostics.cap_hits += 1
            return config.loss_cap_db
        return _capped(-10.0 * math.log10(power), config)
    strip_w = _itu_edge_factor(nus["w1"], config) + _itu_edge_factor(nus["w2"], config)
    strip_h = _itu_edge_factor(nus["h1"], config) + _itu_edge_factor(nus["h2"], config)
    total = 1.0 - (1.0 - strip_w) * (1.0 - strip_h)
    return _magnitude_loss(abs(total), config)
