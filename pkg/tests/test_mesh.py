"""Structured polar meshing: quality, tags, shared junction, refinement."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ycone import geometry as g
from ycone import mesh as m


def test_half_disk_mesh_validates():
    fm = m.mesh_face(g.FaceDomain("half-disk"), 0.1)
    m.validate_face(fm)
    assert fm.kind == "half-disk"
    assert m.min_angle_deg(fm) >= 20.0
    assert fm.h <= 0.1 + 1e-12


def test_full_disk_mesh_validates():
    fm = m.mesh_face(g.FaceDomain("full-disk"), 0.1)
    m.validate_face(fm)
    assert fm.gamma_edges.shape[0] == 0
    assert not np.any(fm.vertex_tags == m.GAMMA)


@settings(max_examples=15, deadline=None)
@given(h=st.floats(0.05, 0.4))
def test_mesh_quality_across_sizes(h):
    fm = m.mesh_face(g.FaceDomain("half-disk"), h)
    m.validate_face(fm)
    assert m.min_angle_deg(fm) >= 20.0


def test_sigma_vertices_on_circle():
    fm = m.mesh_face(g.FaceDomain("half-disk"), 0.08)
    on_sigma = np.isin(fm.vertex_tags, (m.SIGMA, m.CORNER))
    radii = np.linalg.norm(fm.vertices[on_sigma], axis=1)
    assert np.abs(radii - 1.0).max() < 1e-12


def test_annulus_band_not_meshed():
    with pytest.raises(m.MeshError):
        m.mesh_face(g.FaceDomain("annulus-band", r_inner=0.5), 0.1)


def test_node_budget_enforced():
    with pytest.raises(m.MeshError):
        m.mesh_face(g.FaceDomain("half-disk"), 0.1, node_budget=10)


def test_ymesh_shared_junction(ycone_spec):
    ym = m.build_ymesh(ycone_spec, 0.1)
    m.validate_ymesh(ym)
    assert len(ym.faces) == 3
    # Junction triples map to identical parameter points on all faces.
    for trip in ym.junction_triples:
        pts = [ym.faces[j].vertices[trip[j]] for j in range(3)]
        assert np.allclose(pts[0], pts[1], atol=1e-14)
        assert np.allclose(pts[0], pts[2], atol=1e-14)
        assert abs(pts[0][1]) < 1e-14  # on the junction line y = 0


def test_ymesh_validation_rejects_perturbed_junction(ycone_spec):
    ym = m.build_ymesh(ycone_spec, 0.2)
    bad = ym.faces[1].copy()
    trip = ym.junction_triples[1]
    bad.vertices = bad.vertices.copy()
    bad.vertices[trip[1], 0] += 1e-3
    broken = m.YMesh([ym.faces[0], bad, ym.faces[2]], ym.junction_triples,
                     ym.h, ym.surface)
    with pytest.raises(m.MeshError):
        m.validate_ymesh(broken)


def test_refine_quadruples_triangles(ycone_spec):
    ym = m.build_ymesh(ycone_spec, 0.2)
    fine = m.refine(ym)
    m.validate_ymesh(fine)
    assert fine.h == pytest.approx(ym.h / 2.0)
    for a, b in zip(ym.faces, fine.faces):
        assert b.triangles.shape[0] == 4 * a.triangles.shape[0]
    assert fine.junction_triples.shape[0] == 2 * ym.junction_triples.shape[0] - 1
    # New sigma midpoints land back on the unit circle.
    for fm in fine.faces:
        on_sigma = np.isin(fm.vertex_tags, (m.SIGMA, m.CORNER))
        radii = np.linalg.norm(fm.vertices[on_sigma], axis=1)
        assert np.abs(radii - 1.0).max() < 1e-12


def test_dof_offsets(ycone_mesh):
    total = sum(f.n_vertices for f in ycone_mesh.faces)
    assert ycone_mesh.n_dofs == total
    assert ycone_mesh.dof(2, 5) == ycone_mesh.offsets[2] + 5


def test_json_round_trip(ycone_spec):
    ym = m.build_ymesh(ycone_spec, 0.25)
    back = m.ymesh_from_json(m.ymesh_to_json(ym))
    for a, b in zip(ym.faces, back.faces):
        assert np.array_equal(a.vertices, b.vertices)
        assert np.array_equal(a.triangles, b.triangles)
        assert np.array_equal(a.vertex_tags, b.vertex_tags)
    assert np.array_equal(ym.junction_triples, back.junction_triples)
    assert back.h == ym.h


def test_boundary_tags_partition(ycone_mesh):
    for fm in ycone_mesh.faces:
        # every sigma edge endpoint is sigma or corner; gamma likewise
        for a, b in fm.sigma_edges:
            assert fm.vertex_tags[a] in (m.SIGMA, m.CORNER)
            assert fm.vertex_tags[b] in (m.SIGMA, m.CORNER)
        for a, b in fm.gamma_edges:
            assert fm.vertex_tags[a] in (m.GAMMA, m.CORNER)
            assert fm.vertex_tags[b] in (m.GAMMA, m.CORNER)
        assert np.sum(fm.vertex_tags == m.CORNER) == 2
