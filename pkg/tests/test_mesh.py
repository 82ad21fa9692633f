import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robin_spectra.mesh import (MeshError, boundary_geometry, dilation, from_samples, generate_disk_mesh,
                                generate_ellipse_mesh, generate_rect_mesh, perturb_mesh, read_mesh, rotation,
                                scale_mesh, stretch_x, surface_integral, translation, volume_integral, write_mesh)

from conftest import disk, ellipse, rect


def test_disk_area_and_perimeter():
    m = disk(0.1)
    m.validate()
    assert m.area == pytest.approx(math.pi, rel=5e-3)
    assert m.perimeter == pytest.approx(2 * math.pi, rel=5e-3)
    assert m.area < math.pi  # inscribed polygon
    assert disk(0.1, R=2.0).area == pytest.approx(4 * math.pi, rel=5e-3)


def test_ellipse_and_rectangle_areas():
    assert ellipse(0.1).area == pytest.approx(2 * math.pi, rel=5e-3)
    assert generate_rect_mesh(1.0, 1.0, 0.1).area == pytest.approx(1.0, abs=1e-12)


def test_degenerate_ellipse_matches_disk():
    e, d = generate_ellipse_mesh(1.0, 1.0, 0.1), disk(0.1)
    assert e.area == pytest.approx(d.area, rel=1e-2)
    assert e.n_vertices == pytest.approx(d.n_vertices, rel=1e-2)
    assert e.perimeter == pytest.approx(d.perimeter, rel=1e-2)


def test_mesh_quality():
    for m in (disk(0.1), ellipse(0.1), rect(0.1)):
        assert math.degrees(m.min_angle) > 20
        assert m.h_max < 0.1 * 1.5
        assert len(m.boundary_loops) == 1


def test_area_error_order_under_refinement():
    errs = [math.pi - generate_disk_mesh(1.0, h).area for h in (0.2, 0.1, 0.05)]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    assert all(3.0 <= r <= 5.0 for r in ratios), ratios


def test_identity_perturbation_and_dilation():
    m = disk(0.1)
    assert perturb_mesh(m, dilation(), 0.0) is m
    big = perturb_mesh(m, dilation(), 0.5)
    assert np.allclose(big.vertices, 1.5 * m.vertices, atol=1e-12)
    assert big.analytic_boundary["R"] == pytest.approx(1.5)


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.3, 0.3))
def test_dilation_perturbation_equals_scaling(t):
    m = disk(0.1)
    assert np.max(np.abs(perturb_mesh(m, dilation(), t).vertices - scale_mesh(m, 1 + t).vertices)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_translation_preserves_areas(a, b):
    m = ellipse(0.1)
    moved = perturb_mesh(m, translation((a, b)), 1.0)
    assert np.max(np.abs(moved.areas - m.areas)) <= 1e-12


def test_inverting_perturbation_rejected():
    with pytest.raises(MeshError, match="perturbation too large"):
        perturb_mesh(disk(0.1), dilation(), -1.0)


def test_volume_integral_exact_for_cellwise_constants(rng):
    m = disk(0.1)
    c = rng.standard_normal(len(m.triangles))
    vals = np.repeat(c[:, None], 3, axis=1)
    assert volume_integral(m, vals) == pytest.approx(float(np.dot(m.areas, c)), rel=1e-13)
    assert volume_integral(m, lambda x: np.ones(x.shape[:-1])) == pytest.approx(m.area, rel=1e-13)


def test_volume_integral_exact_for_quadratics():
    m = rect(0.1)  # [-1, 1] x [-0.5, 0.5]
    assert volume_integral(m, lambda x: x[..., 0] ** 2) == pytest.approx(2.0 / 3.0, rel=1e-12)


def test_surface_integral_additive_over_loops():
    m = disk(0.1)
    shifted = perturb_mesh(disk(0.1, R=0.5), translation((3.0, 0.0)), 1.0)
    both = type(m)(np.vstack([m.vertices, shifted.vertices]),
                   np.vstack([m.triangles, shifted.triangles + m.n_vertices]),
                   np.vstack([m.boundary_edges, shifted.boundary_edges + m.n_vertices]))
    f = lambda x: 1.0 + x[..., 0] ** 2
    assert len(both.boundary_loops) == 2
    assert surface_integral(both, f) == pytest.approx(surface_integral(m, f) + surface_integral(shifted, f),
                                                      rel=1e-13)


def test_curvature_on_circles():
    for R in (1.0, 2.0):
        m = disk(0.1, R=R)
        for analytic in (True, False):
            k = boundary_geometry(m, analytic).curvature[m.boundary_vertices]
            assert np.allclose(k, 1.0 / R, rtol=1e-2 if not analytic else 1e-14)


def test_discrete_ellipse_curvature_at_major_vertex():
    m = ellipse(0.1)
    geo = boundary_geometry(m, analytic=False)
    bv = m.boundary_vertices
    i = bv[np.argmin(np.linalg.norm(m.vertices[bv] - [2.0, 0.0], axis=1))]
    x, y = m.vertices[i]
    th = math.atan2(y, x / 2.0)
    exact = 2.0 / (4 * math.sin(th) ** 2 + math.cos(th) ** 2) ** 1.5
    assert geo.curvature[i] == pytest.approx(exact, rel=2e-2)
    assert exact == pytest.approx(2.0, rel=2e-2)


def test_normals_point_outward():
    m = ellipse(0.1)
    mid = m.vertices[m.boundary_edges].mean(axis=1)
    n = boundary_geometry(m).normals
    assert np.all(np.einsum("kd,kd->k", n, mid) > 0)
    assert np.allclose(np.linalg.norm(n, axis=1), 1.0)


def test_mesh_file_roundtrip(tmp_path):
    m = ellipse(0.1)
    write_mesh(m, tmp_path / "m.txt")
    text = (tmp_path / "m.txt").read_text()
    heads = [ln.split()[0] for ln in text.splitlines() if ln[:1].isalpha()]
    assert heads == ["VERTICES", "TRIANGLES", "BOUNDARY"]
    back = read_mesh(tmp_path / "m.txt")
    assert np.array_equal(back.vertices, m.vertices)
    assert np.array_equal(back.triangles, m.triangles)
    assert np.array_equal(back.boundary_edges, m.boundary_edges)
    assert back.analytic_boundary == m.analytic_boundary


def test_malformed_mesh_file(tmp_path):
    (tmp_path / "bad.txt").write_text("VERTICES 3\n0 0\n1 0\n")
    with pytest.raises(MeshError):
        read_mesh(tmp_path / "bad.txt")


def test_vector_fields():
    m = disk(0.1)
    x = m.vertices
    assert np.allclose(stretch_x()(x), np.column_stack([x[:, 0], 0 * x[:, 0]]))
    assert np.allclose(np.einsum("kd,kd->k", rotation()(x), x), 0.0)
    s = from_samples(2.0 * x)
    assert np.allclose(perturb_mesh(m, s, 0.1).vertices, perturb_mesh(m, dilation(2.0), 0.1).vertices)


def test_bad_generator_arguments():
    with pytest.raises(MeshError):
        generate_disk_mesh(1.0, 2.0)
    with pytest.raises(MeshError):
        generate_disk_mesh(1.0, 1e-4)
