"""Riemann-sphere coordinates and the chordal metric.

Points are unit vectors in R^3 (stereographic projection from the north
pole, so ``0`` is the south pole and ``inf`` the north pole).  The chordal
distance is the Euclidean distance between these vectors; it is at most 2.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

INF = complex(math.inf, 0.0)


def is_inf(z) -> bool:
    return cmath.isinf(z)


def to_sphere(z) -> np.ndarray:
    """Complex scalar or array (``inf`` allowed) to unit vectors, shape ``(..., 3)``."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape + (3,))
    inf = np.isinf(z)
    zz = np.where(inf, 0, z)
    r2 = np.abs(zz) ** 2
    out[..., 0] = 2 * zz.real / (1 + r2)
    out[..., 1] = 2 * zz.imag / (1 + r2)
    out[..., 2] = (r2 - 1) / (r2 + 1)
    out[inf] = (0.0, 0.0, 1.0)
    return out


def from_sphere(p) -> np.ndarray:
    """Unit vectors to complex numbers; the north pole becomes ``inf``."""
    p = np.asarray(p, dtype=float)
    x, y, h = p[..., 0], p[..., 1], p[..., 2]
    den = 1 - h
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (x + 1j * y) / den
    return np.where(den <= 1e-300, INF, z)


def homogeneous_to_sphere(a, b) -> np.ndarray:
    """The point ``[a : b]`` (i.e. ``a / b``) on the sphere, without dividing."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    na, nb = np.abs(a) ** 2, np.abs(b) ** 2
    s = na + nb
    c = a * np.conj(b)
    out = np.empty(a.shape + (3,))
    out[..., 0] = 2 * c.real / s
    out[..., 1] = 2 * c.imag / s
    out[..., 2] = (na - nb) / s
    return out


def chordal(z, w) -> np.ndarray | float:
    """Chordal distance between complex numbers (``inf`` allowed)."""
    d = np.linalg.norm(to_sphere(z) - to_sphere(w), axis=-1)
    return float(d) if d.ndim == 0 else d


def normalize(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return p / np.linalg.norm(p, axis=-1, keepdims=True)


def rotation_to_pole(v) -> np.ndarray:
    """Orthogonal matrix ``R`` (det +1) with ``R @ v`` equal to the north pole."""
    v = normalize(v)
    n = np.array([0.0, 0.0, 1.0])
    c = float(v @ n)
    if c > 1 - 1e-15:
        return np.eye(3)
    if c < -1 + 1e-15:
        return np.diag([1.0, -1.0, -1.0])
    k = np.cross(v, n)
    s = np.linalg.norm(k)
    k = k / s
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + s * K + (1 - c) * (K @ K)


def fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    h = 1 - 2 * i / n
    r = np.sqrt(1 - h * h)
    phi = i * math.pi * (3 - math.sqrt(5))
    return np.stack([r * np.cos(phi), r * np.sin(phi), h], axis=-1)


def far_pole(*point_sets, candidates: int = 256) -> np.ndarray:
    """A deterministic sphere point maximising the distance to all given points."""
    pts = np.concatenate([np.asarray(p, dtype=float).reshape(-1, 3) for p in point_sets if len(p)])
    cand = fibonacci_sphere(candidates)
    from scipy.spatial import cKDTree

    d, _ = cKDTree(pts).query(cand)
    return cand[int(np.argmax(d))]


class Chart:
    """Stereographic chart after rotating a chosen pole to ``inf``.

    Planar geometry (winding numbers, segment crossings) is done in this
    chart; the pole is picked away from every curve involved.
    """

    def __init__(self, pole):
        self.pole = normalize(pole)
        self.R = rotation_to_pole(self.pole)

    def __call__(self, p) -> np.ndarray:
        q = np.asarray(p, dtype=float) @ self.R.T
        return (q[..., 0] + 1j * q[..., 1]) / (1 - q[..., 2])
