import numpy as np
import pytest

from invset.geometry import (
    Polytope,
    complement_projection,
    facet_normals_from_rays,
    find_cone,
    planar_cone_from_halfplanes,
    polytope_D,
    pulled_back_cone,
    sphere_partition,
)
from invset.synthesis import oracle_deficit

from _properties import geometry_suite


def test_projection_and_partition_properties():
    failures = geometry_suite(num_samples=100000)
    assert not failures, "\n".join(failures)


def test_complement_projection_zero_and_full_rank():
    assert np.array_equal(complement_projection(np.zeros((3, 1))), np.eye(3))
    pi = complement_projection(np.eye(3))
    assert pi.shape == (0, 3)


def test_complement_projection_benchmark_shape():
    B = np.array([[0.0], [0.0], [1.0]])
    pi = complement_projection(B)
    assert pi.shape == (2, 3)
    assert np.abs(pi @ B).max() == 0.0
    # canonical sign: rows are reproducible across runs
    pi2 = complement_projection(B)
    assert np.array_equal(pi, pi2)


def test_partition_census():
    # (4,3): octahedron hull, 8 triangular cones
    assert len(sphere_partition(4, 3)) == 8
    # (8,5): 26 grid points, 16 quads + 16 cap triangles after merging
    part = sphere_partition(8, 5)
    assert len(part) == 32
    sides = sorted(len(c.rays) for c in part.cones)
    assert sides.count(3) == 16 and sides.count(4) == 16


def test_partition_validation():
    with pytest.raises(ValueError):
        sphere_partition(2, 3)
    with pytest.raises(ValueError):
        sphere_partition(4, 1)


def test_adjacency_bases_span_shared_facets():
    part = sphere_partition(4, 3)
    assert part.adjacency, "octahedron cones must share facets"
    for i, j, B in part.adjacency:
        assert i < j
        assert B.shape == (3, 2)
        for col in range(2):
            ray = B[:, col]
            assert part.cones[i].contains(ray)
            assert part.cones[j].contains(ray)


def test_find_cone_tie_break_and_errors():
    part = sphere_partition(4, 3)
    k = find_cone(part, np.array([0.3, 0.2, 0.9]))
    assert 0 <= k < len(part)
    with pytest.raises(ValueError):
        find_cone(part, np.zeros(3))


def test_facet_normals_from_rays_round_trip(rng):
    for _ in range(20):
        R = rng.normal(size=(3, 3))
        if abs(np.linalg.det(R)) < 1e-3:
            continue
        rays = [R[:, k] for k in range(3)]
        normals = facet_normals_from_rays(rays)
        G = np.vstack(normals)
        for ray in rays:
            assert (G @ ray).min() >= -1e-9
        # random conic combinations stay inside
        w = rng.uniform(0.0, 1.0, size=(50, 3))
        pts = (R @ w.T).T
        assert (G @ pts.T).min() >= -1e-9
        interior = R @ np.array([1.0, 1.0, 1.0])
        assert (G @ -interior).min() < -1e-9


def test_facet_normals_reject_dependent_rays():
    with pytest.raises(ValueError):
        facet_normals_from_rays([np.array([1.0, 0.0, 0.0]),
                                 np.array([2.0, 0.0, 0.0]),
                                 np.array([0.0, 1.0, 0.0])])


def test_planar_cone_from_halfplanes():
    # full plane: four axis generators
    full = planar_cone_from_halfplanes([])
    assert full.shape == (2, 4)
    # positive quadrant
    R = planar_cone_from_halfplanes([np.array([1.0, 0.0]),
                                     np.array([0.0, 1.0])])
    assert R.shape == (2, 2)
    cols = {tuple(np.round(R[:, k], 9)) for k in range(R.shape[1])}
    assert cols == {(0.0, 1.0), (1.0, 0.0)}
    # half-plane keeps an interior generator for its lineality
    H = planar_cone_from_halfplanes([np.array([0.0, 1.0])])
    assert H.shape == (2, 3)
    assert (H[1] >= -1e-12).all()
    # single ray: the line z1 = 0 cut down to z2 >= 0
    S = planar_cone_from_halfplanes([np.array([1.0, 0.0]),
                                     np.array([-1.0, 0.0]),
                                     np.array([0.0, 1.0])])
    assert S.shape == (2, 1)
    assert np.allclose(S[:, 0], [0.0, 1.0])
    # trivial cone {0}
    E = planar_cone_from_halfplanes([np.array([1.0, 0.0]),
                                     np.array([-1.0, 0.0]),
                                     np.array([0.0, 1.0]),
                                     np.array([0.0, -1.0])])
    assert E.shape == (2, 0)


def test_pulled_back_cone_benchmark():
    part = sphere_partition(4, 3)
    ET = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    nonempty = 0
    for cone in part.cones:
        R = pulled_back_cone(cone, ET)
        if R.size and R.shape[1] > 0:
            nonempty += 1
            rows = cone.normal_matrix @ ET
            assert (rows @ R).min() >= -1e-9
    assert nonempty >= 4


def test_polytope_validation():
    with pytest.raises(ValueError):
        Polytope([])
    with pytest.raises(ValueError):
        Polytope([np.array([1.0, 0.0]), np.array([1.0, 0.0, 0.0])])


def test_polytope_D_vertices_on_maximal_boundary():
    verts = polytope_D().vertices
    assert len(verts) == 4
    for v in verts:
        # boundary of the closed-form maximal set: deficit 0 and any
        # outward inflation leaves the set
        assert abs(oracle_deficit(v)) <= 1e-12
        assert oracle_deficit(1.0001 * v) > 0.0
