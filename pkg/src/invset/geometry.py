"""Polyhedral cones, conic partitions of the sphere, polytopes, projections.

The partition construction follows the benchmark recipe: grid points on the
unit sphere, their 3-D convex hull, and one cone per hull facet (coplanar
simplices merged, so a quadrilateral facet stays one cone). Qhull triangulates
internally; the merge restores the geometric facets, which is what the conic
hull construction calls for and what the piecewise gamma values depend on.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull

DEDUP_TOL = 1e-9
CONTAIN_TOL = 1e-9


class PolyhedralCone:
    """Solid polyhedral cone in R^3 given by generators and inward normals.

    rays: unit generators, cyclically ordered for facet cones.
    facet_normals: unit inward normals G, cone = {y : Gy >= 0}.
    """

    def __init__(self, rays, facet_normals):
        self.rays = [np.asarray(r, dtype=float) for r in rays]
        self.facet_normals = [np.asarray(g, dtype=float) for g in facet_normals]
        for r in self.rays:
            if np.linalg.norm(r) < 1e-12:
                raise ValueError("zero ray")
        G = self.normal_matrix
        R = self.ray_matrix
        if (G @ R).min() < -CONTAIN_TOL:
            raise ValueError("a ray violates the cone's own facet normals")

    @property
    def ray_matrix(self) -> np.ndarray:
        return np.column_stack(self.rays)

    @property
    def normal_matrix(self) -> np.ndarray:
        return np.vstack(self.facet_normals)

    def contains(self, y, tol: float = CONTAIN_TOL) -> bool:
        return bool((self.normal_matrix @ np.asarray(y, dtype=float)).min() >= -tol)

    def __repr__(self) -> str:
        return f"PolyhedralCone({len(self.rays)} rays)"


class ConicPartition:
    """Ordered cones covering R^n with pairwise shared-facet adjacency."""

    def __init__(self, cones, adjacency):
        self.cones = list(cones)
        # adjacency entries: (i, j, basis) with basis columns spanning the
        # shared facet; i < j
        self.adjacency = list(adjacency)

    def __len__(self) -> int:
        return len(self.cones)


class Polytope:
    def __init__(self, vertices):
        self.vertices = [np.asarray(v, dtype=float) for v in vertices]
        if not self.vertices:
            raise ValueError("empty polytope")
        dim = self.vertices[0].shape
        if any(v.shape != dim for v in self.vertices):
            raise ValueError("inconsistent vertex dimensions")


def complement_projection(B) -> np.ndarray:
    """Orthonormal-row projection onto the orthogonal complement of Image(B).

    Returns pi with pi @ B = 0 and pi @ pi.T = I, rows spanning ker(B');
    r = n - rank(B). Rank uses singular values above 1e-10 * sigma_max.
    Rows get a canonical sign (first nonzero entry positive) so the output
    is unique and runs are reproducible.
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    n = B.shape[0]
    if not np.any(B):
        return np.eye(n)
    U, s, _ = np.linalg.svd(B, full_matrices=True)
    rank = int(np.sum(s > 1e-10 * s[0]))
    if rank == n:
        return np.zeros((0, n))
    # unique orthogonal projector onto ker(B'); Gram-Schmidt over its rows in
    # natural order makes the basis independent of SVD conventions
    P = np.eye(n) - U[:, :rank] @ U[:, :rank].T
    rows: list[np.ndarray] = []
    for i in range(n):
        v = P[i].copy()
        for q in rows:
            v -= (v @ q) * q
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            rows.append(v / nrm)
        if len(rows) == n - rank:
            break
    pi = np.vstack(rows)
    for row in pi:
        nz = np.nonzero(np.abs(row) > 1e-12)[0]
        if nz.size and row[nz[0]] < 0:
            row *= -1.0
    return pi


def sphere_grid(m1: int, m2: int) -> np.ndarray:
    """Deduplicated azimuth/latitude grid points on the unit sphere."""
    pts: list[np.ndarray] = []
    for j in range(m2):
        beta = -np.pi / 2 + np.pi * j / (m2 - 1)
        for k in range(m1):
            alpha = 2 * np.pi * k / m1
            p = np.array([np.cos(alpha) * np.cos(beta),
                          np.sin(alpha) * np.cos(beta),
                          np.sin(beta)])
            if all(np.linalg.norm(p - q) > DEDUP_TOL for q in pts):
                pts.append(p)
    return np.array(pts)


def _merged_facets(points: np.ndarray) -> list[list[int]]:
    """Hull facets as cyclically ordered vertex-index polygons.

    Qhull returns simplices; simplices with equal facet equations are merged
    back into one polygon per geometric facet.
    """
    hull = ConvexHull(points)
    ns = len(hull.simplices)
    parent = list(range(ns))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(ns):
        for j in hull.neighbors[i]:
            if j >= 0 and np.linalg.norm(hull.equations[i] - hull.equations[j]) < DEDUP_TOL:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(ns):
        groups.setdefault(find(i), []).append(i)

    polygons = []
    for members in groups.values():
        vids = sorted({int(v) for m in members for v in hull.simplices[m]})
        normal = hull.equations[members[0]][:3]
        local = points[vids]
        center = local.mean(axis=0)
        u = local[0] - center
        u -= normal * (u @ normal)
        u /= np.linalg.norm(u)
        v = np.cross(normal, u)
        angles = np.arctan2((local - center) @ v, (local - center) @ u)
        order = [vids[k] for k in np.argsort(angles, kind="stable")]
        # canonical start: lexicographically smallest vertex
        keys = [tuple(np.round(points[i], 9)) for i in order]
        start = keys.index(min(keys))
        polygons.append(order[start:] + order[:start])
    polygons.sort(key=lambda poly: tuple(sorted(poly)))
    return polygons


def _polygon_cone(points: np.ndarray, polygon: list[int]) -> PolyhedralCone:
    rays = [points[i] / np.linalg.norm(points[i]) for i in polygon]
    k = len(rays)
    normals = []
    for a in range(k):
        n = np.cross(rays[a], rays[(a + 1) % k])
        # orient inward: nonnegative on the remaining generators
        rest = sum(float(n @ rays[b]) for b in range(k) if b not in (a, (a + 1) % k))
        if rest < 0:
            n = -n
        normals.append(n / np.linalg.norm(n))
    return PolyhedralCone(rays, normals)


def sphere_partition(m1: int, m2: int) -> ConicPartition:
    """Conic partition of R^3 from the hull of the sphere grid.

    One cone per hull facet (merged, so quadrilateral bands remain single
    cones); adjacency from shared polygon edges.
    """
    if m1 < 3:
        raise ValueError("m1 must be >= 3")
    if m2 < 2:
        raise ValueError("m2 must be >= 2")
    points = sphere_grid(m1, m2)
    if len(points) < 4:
        raise ValueError(f"degenerate hull: only {len(points)} distinct grid points")
    polygons = _merged_facets(points)
    cones = [_polygon_cone(points, poly) for poly in polygons]

    def edges(poly: list[int]) -> set[frozenset[int]]:
        return {frozenset((poly[a], poly[(a + 1) % len(poly)])) for a in range(len(poly))}

    edge_sets = [edges(p) for p in polygons]
    adjacency = []
    for i in range(len(polygons)):
        for j in range(i + 1, len(polygons)):
            shared = edge_sets[i] & edge_sets[j]
            if not shared:
                continue
            a, b = sorted(next(iter(shared)))
            basis = np.column_stack([points[a] / np.linalg.norm(points[a]),
                                     points[b] / np.linalg.norm(points[b])])
            adjacency.append((i, j, basis))
    return ConicPartition(cones, adjacency)


def find_cone(partition: ConicPartition, y) -> int:
    """Lowest cone index containing y; the tie-break makes piecewise
    evaluation a total function on facets."""
    y = np.asarray(y, dtype=float)
    if np.linalg.norm(y) < 1e-15:
        raise ValueError("zero vector has no defining cone")
    worst = -np.inf
    for i, cone in enumerate(partition.cones):
        violation = float((cone.normal_matrix @ y).min())
        if violation >= -CONTAIN_TOL:
            return i
        worst = max(worst, violation)
    raise ValueError(f"no cone contains {y}; max violation {worst:.3e}")


def oriented_facet_normal(partition: ConicPartition, i: int, j: int,
                          basis: np.ndarray) -> np.ndarray:
    """Unit normal of the shared facet, pointing from cone i into cone j."""
    nu = np.cross(basis[:, 0], basis[:, 1])
    nu /= np.linalg.norm(nu)
    for ray in partition.cones[j].rays:
        side = float(nu @ ray)
        if abs(side) > 1e-9:
            return nu if side > 0 else -nu
    raise ValueError("adjacent cones are coplanar; facet orientation undefined")


def facet_normals_from_rays(rays) -> list[np.ndarray]:
    """Inward unit normals of a simplicial cone from 3 independent rays."""
    R = np.column_stack([np.asarray(r, dtype=float) for r in rays])
    if R.shape != (3, 3):
        raise ValueError("expected exactly 3 rays in R^3")
    det = np.linalg.det(R)
    if abs(det) < 1e-12:
        raise ValueError("rays are linearly dependent")
    G = np.linalg.inv(R)
    return [row / np.linalg.norm(row) for row in G]


def polytope_D() -> Polytope:
    """The benchmark's inner polytope; vertices lie on the maximal set's
    projected boundary."""
    s3 = np.sqrt(3.0)
    return Polytope([
        np.array([-1.0 + s3, -1.0 + s3]),
        np.array([-1.0, 1.0]),
        np.array([1.0 - s3, 1.0 - s3]),
        np.array([1.0, -1.0]),
    ])


def planar_cone_from_halfplanes(rows) -> np.ndarray:
    """Generators (2 x k, k in {0,1,2,3,4}) of {z in R^2 : rows @ z >= 0}.

    Zero rows are vacuous. No rows at all means the whole plane, returned as
    the four +-axis generators. A half-plane comes back as both boundary rays
    plus an interior one, so conic combinations of the generators always
    reproduce the cone exactly (lineality needs the extra ray).
    """
    rows = [np.asarray(r, dtype=float) for r in rows]
    rows = [r for r in rows if np.linalg.norm(r) > 1e-12]
    if not rows:
        return np.array([[1.0, -1.0, 0.0, 0.0], [0.0, 0.0, 1.0, -1.0]])
    candidates = []
    for r in rows:
        n = r / np.linalg.norm(r)
        candidates.append(np.array([-n[1], n[0]]))
        candidates.append(np.array([n[1], -n[0]]))
    feasible = [c for c in candidates
                if all(float(r @ c) >= -CONTAIN_TOL for r in rows)]
    gens: list[np.ndarray] = []
    for c in feasible:
        if all(np.linalg.norm(c - g) > DEDUP_TOL for g in gens):
            gens.append(c)
    if not gens:
        return np.zeros((2, 0))
    if len(gens) == 1:
        return np.array(gens).T
    if len(gens) == 2:
        g1, g2 = gens
        if np.linalg.norm(g1 + g2) < DEDUP_TOL:
            # lineality: a full half-plane, add the interior direction
            mid = np.array([-g1[1], g1[0]])
            if not all(float(r @ mid) >= -CONTAIN_TOL for r in rows):
                mid = -mid
            return np.column_stack([g1, mid, g2])
        mid = g1 + g2
        mid /= np.linalg.norm(mid)
        if all(float(r @ mid) >= -CONTAIN_TOL for r in rows):
            return np.column_stack([g1, g2])
        return np.zeros((2, 0))
    # more than two extreme candidates survive only for a half-plane where
    # several input rows are parallel; keep the angular hull
    angles = np.argsort([np.arctan2(g[1], g[0]) for g in gens], kind="stable")
    return np.column_stack([gens[k] for k in angles])


def pulled_back_cone(cone: PolyhedralCone, ET: np.ndarray) -> np.ndarray:
    """Generators of K = {z : G @ (ET @ z) >= 0} for the given cone.

    ET is the n x r lift of dual directions; r = 2 uses exact half-plane
    intersection, r = 1 a sign check, and square nonsingular lifts map the
    generators directly.
    """
    rows = cone.normal_matrix @ ET
    r = ET.shape[1]
    if r == 2:
        return planar_cone_from_halfplanes(list(rows))
    if r == 1:
        out = [s for s in (1.0, -1.0) if (rows * s).min() >= -CONTAIN_TOL]
        return np.array([out]) if out else np.zeros((1, 0))
    if r == ET.shape[0]:
        det = np.linalg.det(ET)
        if abs(det) > 1e-12:
            Z = np.linalg.solve(ET, cone.ray_matrix)
            return Z / np.linalg.norm(Z, axis=0, keepdims=True)
    raise NotImplementedError(f"cone pullback not implemented for r={r}")
