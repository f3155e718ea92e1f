"""Plane primitives: Mobius maps, the compactified half-plane metric, curves,
polygonal Jordan domains, annuli and axial hexagon coordinates.

Conventions used throughout the package:

* points are Python/numpy complex numbers; the point at infinity is the
  singleton sentinel ``INFINITY`` (never a large float),
* hexagons are addressed by axial coordinates (q, r) on a pointy-top
  triangular lattice with center spacing ``mesh``,
* a curve is a polyline with strictly increasing time stamps; capacity
  parameterization (hcap = 2t) is established by the loewner module.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "INFINITY",
    "Curve",
    "JordanDomain",
    "Annulus",
    "HexCoord",
    "mobius_disk_to_halfplane",
    "mobius_halfplane_to_disk",
    "dstar_metric",
    "curve_distance",
    "hex_neighbors",
    "hex_distance",
    "axial_to_plane",
    "vertex_position",
    "hex_vertices",
    "write_curve",
    "read_curve",
    "polyline_diameter",
]


class _Infinity:
    """Tagged point at infinity for the compactified half-plane."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"


INFINITY = _Infinity()


def mobius_disk_to_halfplane(z):
    """Mobius map of the unit disk onto the upper half-plane, z -> i(1+z)/(1-z).

    Sends -1 -> 0, 0 -> i and 1 -> INFINITY.
    """
    if z is INFINITY:
        raise ValueError("input must lie in the closed unit disk")
    z = complex(z)
    if z == 1.0:
        return INFINITY
    return 1j * (1.0 + z) / (1.0 - z)


def mobius_halfplane_to_disk(w):
    """Inverse of :func:`mobius_disk_to_halfplane`; INFINITY -> 1."""
    if w is INFINITY:
        return 1.0 + 0.0j
    w = complex(w)
    return (w - 1j) / (w + 1j)


def dstar_metric(z, w):
    """Metric on the closed half-plane plus infinity, |phi^-1(z) - phi^-1(w)|."""
    return abs(mobius_halfplane_to_disk(z) - mobius_halfplane_to_disk(w))


# ---------------------------------------------------------------------------
# curves


@dataclass
class Curve:
    """A polyline with time stamps, living in the closed half-plane or disk.

    ``times`` are in half-plane capacity units (hcap/2) once the curve has
    been produced by the Loewner machinery; raw lattice interfaces carry a
    provisional arclength parameterization until they are re-extracted.
    """

    times: np.ndarray
    points: np.ndarray
    ambient: str = "H"

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.points = np.asarray(self.points, dtype=complex)
        if self.times.shape != self.points.shape:
            raise ValueError("times and points must have equal length")
        if self.ambient not in ("H", "D"):
            raise ValueError("ambient must be 'H' or 'D'")
        if len(self.times) and (np.any(np.diff(self.times) <= 0) or self.times[0] < 0):
            raise ValueError("times must be strictly increasing from 0")

    def __len__(self):
        return len(self.times)

    def diameter(self):
        return polyline_diameter(self.points)

    def to_halfplane(self):
        """Conjugate a disk curve through the Mobius map; half-plane curves pass through."""
        if self.ambient == "H":
            return self
        pts = 1j * (1.0 + self.points) / (1.0 - self.points)
        return Curve(self.times.copy(), pts, "H")


def polyline_diameter(points):
    pts = np.asarray(points, dtype=complex)
    if len(pts) == 0:
        return 0.0
    if len(pts) <= 600:
        d = np.abs(pts[:, None] - pts[None, :])
        return float(d.max())
    # subsample + refine: the diameter of a polyline is attained at vertices
    idx = np.linspace(0, len(pts) - 1, 600).astype(int)
    sub = pts[idx]
    d = np.abs(sub[:, None] - sub[None, :])
    i, j = np.unravel_index(np.argmax(d), d.shape)
    # local refinement around the coarse argmax
    best = 0.0
    for a in range(max(0, idx[i] - len(pts) // 500 - 2), min(len(pts), idx[i] + len(pts) // 500 + 3)):
        best = max(best, float(np.max(np.abs(pts - pts[a]))))
    return max(best, float(d.max()))


def write_curve(path, curve):
    with open(path, "w") as fh:
        fh.write(f"# curve ambient={curve.ambient} n={len(curve)}\n")
        for t, z in zip(curve.times, curve.points):
            fh.write(f"{t!r} {z.real!r} {z.imag!r}\n")


def read_curve(path):
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) < 4 or header[1] != "curve":
            raise ValueError(f"not a curve file: {path}")
        fields = dict(kv.split("=") for kv in header[2:])
        rows = [line.split() for line in fh if line.strip()]
    times = np.array([float(r[0]) for r in rows])
    pts = np.array([float(r[1]) + 1j * float(r[2]) for r in rows])
    if len(rows) != int(fields["n"]):
        raise ValueError("curve file row count does not match header")
    return Curve(times, pts, fields["ambient"])


def _resample_by_arclength(points, m):
    pts = np.asarray(points, dtype=complex)
    if len(pts) == 1:
        return np.repeat(pts, m)
    seg = np.abs(np.diff(pts))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] == 0.0:
        return np.repeat(pts[:1], m)
    grid = np.linspace(0.0, s[-1], m)
    re = np.interp(grid, s, pts.real)
    im = np.interp(grid, s, pts.imag)
    return re + 1j * im


def curve_distance(curve1, curve2, reparam_grid=128):
    """Upper bound on the reparameterization-invariant sup distance.

    Both curves are resampled to ``reparam_grid`` points by arclength and the
    min-max cost over monotone grid alignments is computed by dynamic
    programming (discrete Frechet distance).  This converges to the true
    infimum from above as the grid is refined.
    """
    if reparam_grid < 2:
        raise ValueError("reparam_grid must be at least 2")
    p = _resample_by_arclength(np.asarray(curve1.points if isinstance(curve1, Curve) else curve1), reparam_grid)
    q = _resample_by_arclength(np.asarray(curve2.points if isinstance(curve2, Curve) else curve2), reparam_grid)
    m = reparam_grid
    cost = np.abs(p[:, None] - q[None, :])
    acc = np.empty_like(cost)
    acc[0, 0] = cost[0, 0]
    for j in range(1, m):
        acc[0, j] = max(acc[0, j - 1], cost[0, j])
    for i in range(1, m):
        acc[i, 0] = max(acc[i - 1, 0], cost[i, 0])
        row = acc[i]
        prev = acc[i - 1]
        for j in range(1, m):
            row[j] = max(cost[i, j], min(prev[j], prev[j - 1], row[j - 1]))
    return float(acc[-1, -1])


# ---------------------------------------------------------------------------
# polygonal Jordan domains and annuli


@dataclass
class JordanDomain:
    """Simple closed polygon with marked boundary points (in cyclic order)."""

    boundary: np.ndarray
    marked: list = field(default_factory=list)

    def __post_init__(self):
        self.boundary = np.asarray(self.boundary, dtype=complex)
        if len(self.boundary) < 3:
            raise ValueError("boundary needs at least 3 vertices")
        if abs(self.boundary[0] - self.boundary[-1]) < 1e-15:
            self.boundary = self.boundary[:-1]
        if not _polygon_is_simple(self.boundary):
            raise ValueError("boundary polygon must be simple")

    def contains(self, z):
        return _point_in_polygon(complex(z), self.boundary)

    def contains_many(self, zs):
        return np.array([_point_in_polygon(complex(z), self.boundary) for z in np.asarray(zs).ravel()])

    def diameter(self):
        return polyline_diameter(self.boundary)


def _segments_properly_intersect(a, b, c, d):
    def orient(p, q, r):
        v = (q - p).real * (r - p).imag - (q - p).imag * (r - p).real
        return 0 if abs(v) < 1e-14 else (1 if v > 0 else -1)

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


def _polygon_is_simple(poly):
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            c, d = poly[j], poly[(j + 1) % n]
            if _segments_properly_intersect(a, b, c, d):
                return False
    return True


def _point_in_polygon(z, poly):
    # even-odd rule
    x, y = z.real, z.imag
    inside = False
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i].real, poly[i].imag
        x2, y2 = poly[(i + 1) % n].real, poly[(i + 1) % n].imag
        if (y1 > y) != (y2 > y):
            xs = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if xs > x:
                inside = not inside
    return inside


@dataclass
class Annulus:
    center: complex
    r_inner: float
    r_outer: float

    def __post_init__(self):
        self.center = complex(self.center)
        if not 0 < self.r_inner < self.r_outer:
            raise ValueError("need 0 < r_inner < r_outer")


# ---------------------------------------------------------------------------
# axial hexagon coordinates (pointy-top; neighbor 0 is east, then CCW)

HEX_NEIGHBOR_OFFSETS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))

# vertex j of hexagon (q, r) sits at angle 30 + 60 j degrees from its center;
# vertices are encoded as triangles (a, b, parity) of the center lattice.
HEX_VERTEX_OFFSETS = (
    (0, 0, 0),
    (-1, 0, 1),
    (-1, 0, 0),
    (-1, -1, 1),
    (0, -1, 0),
    (0, -1, 1),
)


@dataclass(frozen=True)
class HexCoord:
    q: int
    r: int
    mesh: float = 1.0

    def center(self):
        return axial_to_plane(self.q, self.r, self.mesh)

    def neighbors(self):
        return [HexCoord(self.q + dq, self.r + dr, self.mesh) for dq, dr in HEX_NEIGHBOR_OFFSETS]


def axial_to_plane(q, r, mesh=1.0):
    return mesh * (q + 0.5 * r) + 1j * mesh * (math.sqrt(3) / 2.0) * r


def vertex_position(a, b, parity, mesh=1.0):
    """Plane position of tiling vertex (a, b, parity); parity 0 is the 'up' triangle."""
    if parity == 0:
        return axial_to_plane(a + 1.0 / 3.0, b + 1.0 / 3.0, mesh)
    return axial_to_plane(a + 2.0 / 3.0, b + 2.0 / 3.0, mesh)


def hex_vertices(q, r):
    """The six tiling vertices of hexagon (q, r), ordered by angle 30 + 60 j."""
    return [(q + da, r + db, p) for da, db, p in HEX_VERTEX_OFFSETS]


def hex_neighbors(h):
    """Axial neighbours in fixed order: east first, then counter-clockwise."""
    if isinstance(h, HexCoord):
        return h.neighbors()
    q, r = h
    return [(q + dq, r + dr) for dq, dr in HEX_NEIGHBOR_OFFSETS]


def hex_distance(h1, h2):
    """Graph distance on the triangular lattice of hexagon centers."""
    q1, r1 = (h1.q, h1.r) if isinstance(h1, HexCoord) else h1
    q2, r2 = (h2.q, h2.r) if isinstance(h2, HexCoord) else h2
    dq, dr = q1 - q2, r1 - r2
    return (abs(dq) + abs(dr) + abs(dq + dr)) // 2
