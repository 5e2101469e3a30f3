"""Exact frames, curvatures and structure checks of the canonical surfaces."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ycone import geometry as g


def test_rotation_about_x_basics():
    R = g.rotation_about_x(120.0)
    assert np.allclose(R @ R @ R, np.eye(3), atol=1e-14)
    assert np.allclose(R[:, 0], [1.0, 0.0, 0.0])


def test_ycone_faces_are_rotated_copies(ycone_spec):
    R = g.rotation_about_x(120.0)
    u1 = ycone_spec.face(1).jet2(0.7, 1.1).u
    u2 = ycone_spec.face(2).jet2(0.7, 1.1).u
    assert np.allclose(R @ u1, u2, atol=1e-14)


@settings(max_examples=50, deadline=None)
@given(r=st.floats(0.05, 1.0), theta=st.floats(0.0, np.pi))
def test_ycone_frame_properties(r, theta):
    spec = g.canonical_surface("ycone")
    for j in (1, 2, 3):
        fr = g.evaluate_frame(spec, j, (r, theta))
        assert np.isclose(np.linalg.norm(fr.normal), 1.0, atol=1e-12)
        # The planar faces are parametrized isometrically.
        assert np.allclose(fr.metric, np.eye(2) * [1.0, r * r], atol=1e-12)
        assert fr.second_form_norm2 == pytest.approx(0.0, abs=1e-12)


def test_normal_and_conormal_sums_vanish(ycone_spec):
    rep = g.check_y_structure(ycone_spec)
    assert rep.has_junction
    assert rep.normal_sum < 1e-12
    assert rep.conormal_sum < 1e-12
    assert rep.curvature_sum < 1e-12
    assert rep.sigma_violation < 1e-12


def test_perturbed_ycone_flags_conormal_violation():
    spec = g.perturbed_ycone((0.0, 120.0, -119.0))
    rep = g.check_y_structure(spec)
    expected = 2.0 * np.sin(np.deg2rad(0.5))
    assert rep.conormal_sum == pytest.approx(expected, rel=1e-10)


def test_sigma_boundary_coefficient_is_minus_one(ycone_spec, disk_spec):
    for spec, j in ((ycone_spec, 2), (disk_spec, 1)):
        bf = g.boundary_frame(spec, j, (1.0, 0.9), "sigma")
        assert bf.curvature_dot_conormal == pytest.approx(-1.0, abs=1e-12)


def test_gamma_conormals_point_off_the_face(ycone_spec):
    # On face 1 (the z = 0 plane, upper half disk) the outward conormal on both
    # junction rays is -e2.
    for theta in (0.0, np.pi):
        bf = g.boundary_frame(ycone_spec, 1, (0.5, theta), "gamma")
        assert np.allclose(bf.conormal, [0.0, -1.0, 0.0], atol=1e-14)
        assert bf.geodesic_curvature == pytest.approx(0.0, abs=1e-14)


def test_cone_point_is_singular(ycone_spec):
    with pytest.raises(g.SingularPointError):
        g.evaluate_frame(ycone_spec, 1, (0.0, 0.3))


def test_catenoid_neck_parameter():
    spec = g.canonical_surface("critical-catenoid")
    s0 = spec.params["s0"]
    assert s0 * np.tanh(s0) == pytest.approx(1.0, abs=1e-11)


def test_catenoid_curvature_matches_finite_differences():
    """|A|^2 from the exact jet against FD second derivatives of the immersion."""
    spec = g.canonical_surface("critical-catenoid")
    face = spec.face(1)
    r0, t0 = 0.8, 1.3
    fr = g.evaluate_frame(spec, 1, (r0, t0))

    def fd_norm2(dh):
        u = lambda r, t: face.jet2(r, t).u
        urr = (u(r0 + dh, t0) - 2 * u(r0, t0) + u(r0 - dh, t0)) / dh ** 2
        utt = (u(r0, t0 + dh) - 2 * u(r0, t0) + u(r0, t0 - dh)) / dh ** 2
        urt = (u(r0 + dh, t0 + dh) - u(r0 + dh, t0 - dh)
               - u(r0 - dh, t0 + dh) + u(r0 - dh, t0 - dh)) / (4 * dh ** 2)
        nu = fr.normal
        E, F, G = fr.metric[0, 0], fr.metric[0, 1], fr.metric[1, 1]
        L, M, N = urr @ nu, urt @ nu, utt @ nu
        det = E * G - F * F
        # |A|^2 = trace of (II g^{-1})^2 for the shape operator.
        S = np.array([[L, M], [M, N]]) @ np.linalg.inv(fr.metric)
        return np.trace(S @ S)

    errs = [abs(fd_norm2(dh) - fr.second_form_norm2) for dh in (1e-2, 5e-3)]
    assert errs[0] < 5e-3
    assert errs[1] < errs[0] / 3.0  # about O(dh^2)


def test_catenoid_meets_sphere_orthogonally():
    spec = g.canonical_surface("critical-catenoid")
    rep = g.check_y_structure(spec)
    assert not rep.has_junction
    assert rep.sigma_violation < 1e-10


def test_spec_json_round_trip(ycone_spec):
    text = ycone_spec.to_json()
    back = g.YSurfaceSpec.from_json(text)
    assert back.name == "ycone"
    assert np.allclose(back.face(3).jet2(0.4, 0.2).u,
                       ycone_spec.face(3).jet2(0.4, 0.2).u)


def test_unknown_surface_rejected():
    with pytest.raises(g.GeometryError):
        g.canonical_surface("moebius")
