"""Sphere and annulus quadrature rules with deterministic node ordering.

Sphere rules integrate against the round measure d(omega) of the unit
(n-1)-sphere: Gauss-Legendre in the cosine of each polar angle (with the
residual sine powers folded into the weights) times a periodic trapezoid rule
in the azimuth.  Summations use numpy's pairwise reduction over a fixed node
ordering, so repeated runs are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss


@dataclass(frozen=True)
class SphereRule:
    """Angle rows (M, n-1) and weights (M,) for the unit-sphere measure."""

    angles: np.ndarray
    weights: np.ndarray

    @property
    def node_count(self) -> int:
        return self.weights.size


def sphere_rule(n: int, polar_nodes: int = 48, azimuth_nodes: int = 96) -> SphereRule:
    """Product quadrature over S^{n-1} in the chart angles.

    Exact (up to machine precision) for smooth integrands; polar directions use
    Gauss-Legendre in u = cos(theta) so no node touches a chart pole.
    """
    if polar_nodes < 4 or azimuth_nodes < 4:
        raise ValueError("need at least 4 nodes per angle")
    axes, wts = [], []
    for j in range(n - 2):
        u, w = leggauss(polar_nodes)
        p = n - 2 - j  # d(omega) carries sin^{n-1-j-1}... as (1-u^2)^{(p-1)/2} du
        w = w * (1.0 - u ** 2) ** (0.5 * (p - 1))
        axes.append(np.arccos(u[::-1]))
        wts.append(w[::-1])
    phi = np.arange(azimuth_nodes) * (2.0 * np.pi / azimuth_nodes)
    axes.append(phi)
    wts.append(np.full(azimuth_nodes, 2.0 * np.pi / azimuth_nodes))
    mesh = np.meshgrid(*axes, indexing="ij")
    angles = np.stack([m.ravel() for m in mesh], axis=1)
    weight = wts[0]
    for w in wts[1:]:
        weight = np.multiply.outer(weight, w)
    return SphereRule(angles=angles, weights=weight.ravel())


def sphere_area(n: int) -> float:
    """Area of the unit (n-1)-sphere: 2 pi^{n/2} / Gamma(n/2)."""
    from scipy.special import gamma
    return float(2.0 * np.pi ** (n / 2.0) / gamma(n / 2.0))


def gauss_segment(lo: float, hi: float, nodes: int):
    x, w = leggauss(nodes)
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    return mid + half * x, half * w


def radial_rule(breakpoints, nodes_per_segment):
    """Composite Gauss-Legendre rule over consecutive radial segments."""
    breakpoints = list(breakpoints)
    if np.isscalar(nodes_per_segment):
        nodes_per_segment = [int(nodes_per_segment)] * (len(breakpoints) - 1)
    rs, ws = [], []
    for (lo, hi), k in zip(zip(breakpoints[:-1], breakpoints[1:]), nodes_per_segment):
        r, w = gauss_segment(lo, hi, k)
        rs.append(r)
        ws.append(w)
    return np.concatenate(rs), np.concatenate(ws)


def sphere_coords_at_radius(rule: SphereRule, r: float) -> np.ndarray:
    """Coordinate rows (M, n) on the sphere of radius r."""
    m = rule.node_count
    return np.column_stack([np.full(m, float(r)), rule.angles])


@dataclass(frozen=True)
class VolumeRule:
    """Coordinate rows with weights for the raw chart measure dr * d(omega)."""

    coords: np.ndarray
    weights: np.ndarray         # combined radial x sphere weights
    radii: np.ndarray           # distinct radial nodes
    radial_weights: np.ndarray
    sphere: SphereRule


def volume_rule(n: int, breakpoints, nodes_per_segment, sphere: SphereRule) -> VolumeRule:
    r, wr = radial_rule(breakpoints, nodes_per_segment)
    m = sphere.node_count
    coords = np.empty((r.size * m, n))
    coords[:, 0] = np.repeat(r, m)
    coords[:, 1:] = np.tile(sphere.angles, (r.size, 1))
    weights = np.repeat(wr, m) * np.tile(sphere.weights, r.size)
    return VolumeRule(coords=coords, weights=weights, radii=r, radial_weights=wr,
                      sphere=sphere)


def angular_jacobian(angles: np.ndarray) -> np.ndarray:
    """Density of d(omega) against plain d(theta): prod_j sin^{n-1-j}(theta_j)."""
    nang = angles.shape[1]
    n = nang + 1
    out = np.ones(angles.shape[0])
    for j in range(nang - 1):
        out = out * np.sin(angles[:, j]) ** (n - 2 - j)
    return out


def volume_weights(rule: VolumeRule, sqrt_det: np.ndarray) -> np.ndarray:
    """Per-node weights for the metric volume measure.

    sqrt(det g) gives the density against dr * d(theta); the rule's weights
    carry dr * d(omega), so the angular Jacobian is divided back out.
    """
    return rule.weights * sqrt_det / angular_jacobian(rule.coords[:, 1:])


def integrate_volume(rule: VolumeRule, sqrt_det: np.ndarray,
                     values: np.ndarray) -> float:
    """Integral of ``values`` against the metric volume measure."""
    return float(np.sum(volume_weights(rule, sqrt_det) * values))
