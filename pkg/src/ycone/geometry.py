"""Canonical Y-surfaces and smooth comparison surfaces, with exact frames.

The junction convention is frozen as follows: the junction line is the first
coordinate axis, face 1 of the Y-cone lies in the plane z = 0, and faces 2 and 3
are the images of face 1 under rotations by +120 and -120 degrees about the
junction axis.  Each face is parametrized over the closed upper half disk in
polar coordinates (r, theta), r in [0, 1], theta in [0, pi]; the junction rays
are theta = 0 (x = +r) and theta = pi (x = -r), the free boundary sigma is
r = 1.  All immersions are given with closed-form derivatives up to second
order, so frames and curvatures are exact.
"""

from __future__ import annotations

import json
from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np


class GeometryError(ValueError):
    """Invalid surface description or evaluation point."""


class SingularPointError(GeometryError):
    """Frame evaluation requested at the cone point r = 0."""


#: Second-order jet of an immersion at (r, theta); every entry has shape (..., 3).
Jet2 = namedtuple("Jet2", ["u", "ur", "ut", "urr", "urt", "utt"])


def rotation_about_x(angle_deg):
    """Rotation matrix by angle_deg degrees about the first coordinate axis."""
    a = np.deg2rad(angle_deg)
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


@dataclass(frozen=True)
class FaceDomain:
    """Parameter domain of a single face.

    kind is one of 'half-disk' (theta in [0, pi], junction rays at theta = 0, pi),
    'full-disk' (theta in [0, 2*pi), no junction) or 'annulus-band'
    (r in [r_inner, 1], theta periodic, no junction).
    """

    kind: str
    r_inner: float = 0.0

    def __post_init__(self):
        if self.kind not in ("half-disk", "full-disk", "annulus-band"):
            raise GeometryError(f"unknown face domain kind {self.kind!r}")
        if self.kind == "annulus-band" and not 0.0 < self.r_inner < 1.0:
            raise GeometryError("annulus-band requires 0 < r_inner < 1")

    @property
    def theta_max(self):
        return np.pi if self.kind == "half-disk" else 2.0 * np.pi

    @property
    def has_gamma(self):
        return self.kind == "half-disk"

    def contains(self, r, theta, tol=1e-12):
        return (self.r_inner - tol <= r <= 1.0 + tol) and (-tol <= theta <= self.theta_max + tol)


class Face:
    """One face of a surface: a domain plus an immersion with exact second jet."""

    def __init__(self, domain, jet_fn, rotation_deg=0.0):
        self.domain = domain
        self._jet_fn = jet_fn
        self.rotation_deg = rotation_deg

    def jet2(self, r, theta):
        """Exact second-order jet at (r, theta); accepts broadcasting arrays."""
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        return self._jet_fn(r, theta)


@dataclass
class YSurfaceSpec:
    """Analytic description of a canonical surface."""

    name: str
    faces: list
    params: dict = field(default_factory=dict)

    @property
    def has_junction(self):
        return len(self.faces) == 3

    def face(self, j):
        """Face by 1-based id."""
        if not 1 <= j <= len(self.faces):
            raise GeometryError(f"face id {j} out of range for {self.name}")
        return self.faces[j - 1]

    def to_json(self):
        doc = {
            "name": self.name,
            "params": {k: float(v) for k, v in self.params.items()},
            "faces": [
                {
                    "kind": f.domain.kind,
                    "rotation_deg": float(f.rotation_deg),
                    "plane": list(rotation_about_x(f.rotation_deg)[:, 2]),
                }
                for f in self.faces
            ],
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        params = dict(doc.get("params") or {})
        if doc["name"] == "ycone" and "angle_2_deg" in params:
            params = {"angles_deg": (0.0, params["angle_2_deg"], params["angle_3_deg"])}
        params.pop("s0", None)  # derived, not a constructor input
        return canonical_surface(doc["name"], params or None)


def _planar_face(rotation_deg, kind="half-disk"):
    R = rotation_about_x(rotation_deg)
    ex, ey = R[:, 0], R[:, 1]

    def jet(r, theta):
        ct, st = np.cos(theta), np.sin(theta)
        zero = np.zeros(np.broadcast_shapes(np.shape(r), np.shape(theta)) + (3,))
        u = np.multiply.outer(r * ct, ex) + np.multiply.outer(r * st, ey)
        ur = np.multiply.outer(ct + 0.0 * r, ex) + np.multiply.outer(st + 0.0 * r, ey)
        ut = np.multiply.outer(-r * st, ex) + np.multiply.outer(r * ct, ey)
        urt = np.multiply.outer(-st + 0.0 * r, ex) + np.multiply.outer(ct + 0.0 * r, ey)
        utt = -u
        return Jet2(u, ur, ut, zero, urt, utt)

    return Face(FaceDomain(kind), jet, rotation_deg)


def _find_catenoid_parameter(tol=1e-12):
    """Root of s*tanh(s) = 1 by bisection: the critical-catenoid band half width."""
    lo, hi = 1.0, 2.0
    g = lambda s: s * np.tanh(s) - 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _catenoid_face(r_inner=0.5, s0=None):
    if s0 is None:
        s0 = _find_catenoid_parameter()
    # Neck scale so the boundary circles lie on the unit sphere.
    a = 1.0 / np.sqrt(np.cosh(s0) ** 2 + s0 ** 2)
    ds = 2.0 * s0 / (1.0 - r_inner)

    def jet(r, theta):
        s = s0 * (2.0 * (r - r_inner) / (1.0 - r_inner) - 1.0)
        ch, sh = np.cosh(s), np.sinh(s)
        ct, st = np.cos(theta), np.sin(theta)
        one = np.ones(np.broadcast_shapes(np.shape(r), np.shape(theta)))

        def vec(x, y, z):
            return a * np.stack(np.broadcast_arrays(x, y, z), axis=-1)

        u = vec(ch * ct, ch * st, s)
        ur = vec(ds * sh * ct, ds * sh * st, ds * one)
        ut = vec(-ch * st, ch * ct, 0.0 * one)
        urr = vec(ds * ds * ch * ct, ds * ds * ch * st, 0.0 * one)
        urt = vec(-ds * sh * st, ds * sh * ct, 0.0 * one)
        utt = vec(-ch * ct, -ch * st, 0.0 * one)
        return Jet2(u, ur, ut, urr, urt, utt)

    face = Face(FaceDomain("annulus-band", r_inner=r_inner), jet, 0.0)
    face.catenoid_s0 = s0
    face.catenoid_scale = a
    return face


def canonical_surface(name, params=None):
    """Build a canonical surface by name.

    Recognized names: 'ycone' (three flat half disks at 120 degrees),
    'equatorial-disk' (single flat full disk in the plane z = 0),
    'critical-catenoid' (annulus band meeting the sphere orthogonally).
    """
    params = dict(params or {})
    if name == "ycone":
        angles = params.pop("angles_deg", (0.0, 120.0, -120.0))
        if params:
            raise GeometryError(f"unknown ycone params {sorted(params)}")
        faces = [_planar_face(a, "half-disk") for a in angles]
        return YSurfaceSpec("ycone", faces, {"angle_2_deg": angles[1], "angle_3_deg": angles[2]})
    if name == "equatorial-disk":
        if params:
            raise GeometryError(f"unknown disk params {sorted(params)}")
        return YSurfaceSpec("equatorial-disk", [_planar_face(0.0, "full-disk")], {})
    if name == "critical-catenoid":
        r_inner = float(params.pop("r_inner", 0.5))
        if params:
            raise GeometryError(f"unknown catenoid params {sorted(params)}")
        face = _catenoid_face(r_inner=r_inner)
        return YSurfaceSpec("critical-catenoid", [face], {"r_inner": r_inner, "s0": face.catenoid_s0})
    raise GeometryError(f"unknown surface name {name!r}")


def perturbed_ycone(angles_deg):
    """Y-cone-like surface with the three faces at the given angles (degrees).

    Intended for negative tests: the structural checks should flag any triple
    that is not congruent to (0, 120, -120).
    """
    return canonical_surface("ycone", {"angles_deg": tuple(float(a) for a in angles_deg)})


@dataclass
class FrameData:
    position: np.ndarray
    d_r: np.ndarray
    d_theta: np.ndarray
    normal: np.ndarray
    second_form_norm2: float
    metric: np.ndarray  # 2x2, [[E, F], [F, G]]


@dataclass
class BoundaryFrame:
    conormal: np.ndarray       # outward unit conormal tau, tangent to the face
    tangent: np.ndarray        # unit tangent eta of the boundary curve
    geodesic_curvature: float  # kappa = g(grad_eta eta, tau)
    curvature_dot_conormal: float  # curvature vector of the ambient curve dotted with tau


def evaluate_frame(spec, face_id, param):
    """Exact frame of the immersion at (r, theta) on the given face."""
    r, theta = float(param[0]), float(param[1])
    face = spec.face(face_id)
    if not face.domain.contains(r, theta):
        raise GeometryError(f"point (r, theta) = ({r}, {theta}) outside {face.domain.kind} domain")
    if r == 0.0:
        raise SingularPointError("frame undefined at r = 0")
    jet = face.jet2(r, theta)
    u, ur, ut = jet.u, jet.ur, jet.ut
    cross = np.cross(ur, ut)
    area = np.linalg.norm(cross)
    if area <= 1e-14:
        raise GeometryError(f"degenerate immersion at (r, theta) = ({r}, {theta})")
    nu = cross / area
    E, F, G = ur @ ur, ur @ ut, ut @ ut
    metric = np.array([[E, F], [F, G]])
    second = np.array([[jet.urr @ nu, jet.urt @ nu], [jet.urt @ nu, jet.utt @ nu]])
    shape_op = np.linalg.solve(metric, second)
    a2 = float(np.trace(shape_op @ shape_op))
    return FrameData(u, ur, ut, nu, max(a2, 0.0) if abs(a2) < 1e-13 else a2, metric)


def _curve_curvature_vector(first, second):
    """Curvature vector of an ambient curve from parametric first/second derivatives."""
    speed2 = first @ first
    tangent = first / np.sqrt(speed2)
    acc = second - (second @ tangent) * tangent
    return acc / speed2


def boundary_frame(spec, face_id, point, which):
    """Outward conormal, boundary tangent and curvature data at a boundary point.

    which selects the boundary component: 'sigma' (r = 1, on the sphere) or
    'gamma' (the junction rays theta in {0, pi} of a half-disk face).
    """
    r, theta = float(point[0]), float(point[1])
    face = spec.face(face_id)
    jet = face.jet2(r, theta)
    if which == "sigma":
        if abs(r - 1.0) > 1e-10:
            raise GeometryError(f"point with r = {r} is not on sigma")
        tau = jet.ur / np.linalg.norm(jet.ur)
        eta = jet.ut / np.linalg.norm(jet.ut)
        # The curve is theta |-> u(1, theta); its curvature vector dotted with tau
        # is the boundary coefficient of the index form (equal to -1 on canonical
        # surfaces, where the free boundary is a great circle).
        kvec = _curve_curvature_vector(jet.ut, jet.utt)
        return BoundaryFrame(tau, eta, float(kvec @ tau), float(kvec @ tau))
    if which == "gamma":
        if not face.domain.has_gamma:
            raise GeometryError(f"{face.domain.kind} face has no junction boundary")
        if not (abs(theta) < 1e-10 or abs(theta - np.pi) < 1e-10):
            raise GeometryError(f"point with theta = {theta} is not on gamma")
        if r == 0.0:
            raise SingularPointError("boundary frame undefined at the cone point")
        sign = -1.0 if abs(theta) < 1e-10 else 1.0  # outward is decreasing theta at theta = 0
        tau = sign * jet.ut / np.linalg.norm(jet.ut)
        eta = jet.ur / np.linalg.norm(jet.ur)
        # The junction curve is r |-> u(r, theta0).
        kvec = _curve_curvature_vector(jet.ur, jet.urr)
        return BoundaryFrame(tau, eta, float(kvec @ tau), float(kvec @ tau))
    raise GeometryError(f"unknown boundary component {which!r}")


@dataclass
class StructureReport:
    """Maximal violations of the Y-structure identities over a sample sweep."""

    conormal_sum: float | None     # max |tau_1 + tau_2 + tau_3| on the junction
    normal_sum: float | None       # max |N_1 + N_2 + N_3| on the junction
    curvature_sum: float | None    # max |kappa_1 + kappa_2 + kappa_3| on the junction
    sigma_violation: float         # max of | |u| - 1 | and |tau x u| on sigma
    has_junction: bool

    def max_violation(self):
        vals = [self.sigma_violation]
        if self.has_junction:
            vals += [self.conormal_sum, self.normal_sum, self.curvature_sum]
        return max(vals)


def check_y_structure(spec, n_samples=48):
    """Report the maximal violations of the Y-surface structure identities.

    Never raises on a bad surface: violations are reported, not thrown.
    """
    sigma_violation = 0.0
    for j in range(1, len(spec.faces) + 1):
        face = spec.face(j)
        thetas = np.linspace(0.0, face.domain.theta_max, n_samples)
        for th in thetas:
            jet = face.jet2(1.0, th)
            bf = boundary_frame(spec, j, (1.0, th), "sigma")
            sigma_violation = max(
                sigma_violation,
                abs(np.linalg.norm(jet.u) - 1.0),
                float(np.linalg.norm(np.cross(bf.conormal, jet.u))),
            )
    if not spec.has_junction:
        return StructureReport(None, None, None, sigma_violation, False)

    conormal_sum = normal_sum = curvature_sum = 0.0
    rs = np.linspace(1.0 / n_samples, 1.0, n_samples)
    for th in (0.0, np.pi):
        for r in rs:
            taus, normals, kappas = [], [], []
            for j in (1, 2, 3):
                bf = boundary_frame(spec, j, (r, th), "gamma")
                fr = evaluate_frame(spec, j, (r, th))
                taus.append(bf.conormal)
                normals.append(fr.normal)
                kappas.append(bf.geodesic_curvature)
            conormal_sum = max(conormal_sum, float(np.linalg.norm(sum(taus))))
            normal_sum = max(normal_sum, float(np.linalg.norm(sum(normals))))
            curvature_sum = max(curvature_sum, abs(sum(kappas)))
    return StructureReport(conormal_sum, normal_sum, curvature_sum, sigma_violation, True)
