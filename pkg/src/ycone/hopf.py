"""Minimality certificate for sampled immersions on polar tensor grids.

Given samples u_j(r_i, theta_k) of the three faces (or one face for smooth
surfaces), this module measures how far the immersion is from a conformal
harmonic map meeting the sphere orthogonally: polar-Laplacian residuals,
conformality residuals, free-boundary orthogonality, junction derivative
matching, the 120-degree balance of the theta-derivatives along the junction,
and the holomorphic certificate field

    Q_j = u_{j,zz},   h = sum_j Q_j . Q_j,   H(z) = z^4 h(z)

whose imaginary part must vanish on both boundary components and whose
Cauchy-Riemann residual must vanish in the interior.  The grid is punctured at
r = 0; smallness of |H| on the innermost ring stands in for H(0) = 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ycone.geometry import rotation_about_x


class ImmersionInputError(ValueError):
    """Malformed or inconsistent sampled-immersion input."""


class DegenerateSampleError(ValueError):
    """|u_r x u_theta| below threshold at a node (branch point at sample scale)."""


@dataclass
class PolarGridSet:
    """Sampled immersion on tensor grids r_i = i/n_r, theta_k = k*theta_max/n_theta."""

    r: np.ndarray                # (n_r,)
    theta: np.ndarray            # (n_theta + 1,)
    faces: list                  # each (n_r, n_theta + 1, 3)
    jets: list | None = None     # analytic closures (geometry.Face objects) or None

    @property
    def n_r(self):
        return self.r.size

    @property
    def n_theta(self):
        return self.theta.size - 1

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def has_junction(self):
        return self.n_faces == 3


def _grid_axes(n_r, n_theta, theta_max):
    r = np.arange(1, n_r + 1) / n_r
    theta = np.arange(n_theta + 1) * (theta_max / n_theta)
    return r, theta


def sample_immersion(source, n_r, n_theta, junction_tol=1e-8):
    """Sample a canonical surface exactly, or validate a file/dict input.

    source may be a YSurfaceSpec (sampled with analytic closures attached), a
    path to a JSON immersion file, or an already-parsed dict of the same
    schema: {n_r, n_theta, faces: [{samples: row-major [x, y, z] list}]}.
    """
    if n_r < 8 or n_theta < 8:
        raise ImmersionInputError("grid must be at least 8 x 8")
    if hasattr(source, "faces") and hasattr(source, "name"):
        theta_max = source.faces[0].domain.theta_max
        r, theta = _grid_axes(n_r, n_theta, theta_max)
        R, T = np.meshgrid(r, theta, indexing="ij")
        faces = [np.asarray(f.jet2(R, T).u) for f in source.faces]
        grids = PolarGridSet(r, theta, faces, jets=list(source.faces))
        _validate_grids(grids, junction_tol)
        return grids
    if isinstance(source, (str, bytes)) or hasattr(source, "read"):
        doc = json.load(open(source)) if isinstance(source, (str, bytes)) else json.load(source)
    elif isinstance(source, dict):
        doc = source
    else:
        raise ImmersionInputError(f"unsupported immersion source {type(source)!r}")
    try:
        file_nr, file_nt = int(doc["n_r"]), int(doc["n_theta"])
        raw_faces = doc["faces"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ImmersionInputError(f"malformed immersion document: {exc}") from exc
    if (file_nr, file_nt) != (n_r, n_theta):
        raise ImmersionInputError(
            f"requested {n_r}x{n_theta} grid but file carries {file_nr}x{file_nt}")
    if len(raw_faces) not in (1, 3):
        raise ImmersionInputError(f"{len(raw_faces)} faces in input; expected 1 or 3")
    theta_max = np.pi if len(raw_faces) == 3 else 2.0 * np.pi
    r, theta = _grid_axes(n_r, n_theta, theta_max)
    faces = []
    for jf, fd in enumerate(raw_faces):
        arr = np.asarray(fd["samples"], dtype=float)
        if arr.size != n_r * (n_theta + 1) * 3:
            raise ImmersionInputError(
                f"face {jf + 1}: expected {n_r}x{n_theta + 1}x3 samples, got {arr.size} values")
        faces.append(arr.reshape(n_r, n_theta + 1, 3))
    grids = PolarGridSet(r, theta, faces)
    _validate_grids(grids, junction_tol)
    return grids


def grids_to_document(grids):
    """Serializable dict in the immersion-file schema."""
    return {
        "n_r": int(grids.n_r),
        "n_theta": int(grids.n_theta),
        "faces": [{"samples": f.reshape(-1, 3).tolist()} for f in grids.faces],
    }


def _validate_grids(grids, junction_tol):
    if not grids.has_junction:
        return
    for col, label in ((0, "theta = 0"), (-1, "theta = pi")):
        ref = grids.faces[0][:, col, :]
        for j in (1, 2):
            diff = np.abs(grids.faces[j][:, col, :] - ref)
            if diff.max() > junction_tol:
                i = int(np.unravel_index(np.argmax(diff), diff.shape)[0])
                raise ImmersionInputError(
                    f"junction mismatch on {label}: faces 1 and {j + 1} differ by "
                    f"{diff.max():.3e} at r index {i} (tolerance {junction_tol:.0e})")


def _d1(A, dx, axis):
    """Second-order first derivative: central interior, one-sided at the ends."""
    A = np.moveaxis(A, axis, 0)
    out = np.empty_like(A)
    out[1:-1] = (A[2:] - A[:-2]) / (2.0 * dx)
    out[0] = (-3.0 * A[0] + 4.0 * A[1] - A[2]) / (2.0 * dx)
    out[-1] = (3.0 * A[-1] - 4.0 * A[-2] + A[-3]) / (2.0 * dx)
    return np.moveaxis(out, 0, axis)


def _d2(A, dx, axis):
    """Second-order second derivative: central interior, one-sided at the ends."""
    A = np.moveaxis(A, axis, 0)
    out = np.empty_like(A)
    out[1:-1] = (A[2:] - 2.0 * A[1:-1] + A[:-2]) / (dx * dx)
    out[0] = (2.0 * A[0] - 5.0 * A[1] + 4.0 * A[2] - A[3]) / (dx * dx)
    out[-1] = (2.0 * A[-1] - 5.0 * A[-2] + 4.0 * A[-3] - A[-4]) / (dx * dx)
    return np.moveaxis(out, 0, axis)


@dataclass
class FaceDerivs:
    u: np.ndarray
    ur: np.ndarray
    ut: np.ndarray
    urr: np.ndarray
    urt: np.ndarray
    utt: np.ndarray
    normal: np.ndarray
    urr_perp: np.ndarray
    urt_perp: np.ndarray
    utt_perp: np.ndarray


@dataclass
class DerivGrids:
    r: np.ndarray
    theta: np.ndarray
    faces: list  # of FaceDerivs
    exact: bool

    @property
    def has_junction(self):
        return len(self.faces) == 3


def derivative_grids(grids, use_exact=None, degeneracy_tol=1e-10):
    """First and second derivative grids with normal projections.

    use_exact defaults to True exactly when the grid carries analytic closures.
    """
    exact = grids.jets is not None if use_exact is None else use_exact
    if exact and grids.jets is None:
        raise ImmersionInputError("exact closures requested but the grid has none")
    dr = grids.r[1] - grids.r[0]
    dt = grids.theta[1] - grids.theta[0]
    out = []
    for jf, u in enumerate(grids.faces):
        if exact:
            R, T = np.meshgrid(grids.r, grids.theta, indexing="ij")
            jet = grids.jets[jf].jet2(R, T)
            u, ur, ut = np.asarray(jet.u), np.asarray(jet.ur), np.asarray(jet.ut)
            urr, urt, utt = np.asarray(jet.urr), np.asarray(jet.urt), np.asarray(jet.utt)
        else:
            ur, ut = _d1(u, dr, 0), _d1(u, dt, 1)
            urr, utt = _d2(u, dr, 0), _d2(u, dt, 1)
            urt = _d1(ur, dt, 1)
        cross = np.cross(ur, ut)
        norm = np.linalg.norm(cross, axis=-1)
        if norm.min() < degeneracy_tol:
            i, k = np.unravel_index(np.argmin(norm), norm.shape)
            raise DegenerateSampleError(
                f"face {jf + 1}: |u_r x u_theta| = {norm[i, k]:.3e} at node "
                f"(r, theta) = ({grids.r[i]:.4f}, {grids.theta[k]:.4f})")
        nu = cross / norm[..., None]

        def perp(v):
            return np.einsum("...i,...i->...", v, nu)[..., None] * nu

        out.append(FaceDerivs(u, ur, ut, urr, urt, utt, nu,
                              perp(urr), perp(urt), perp(utt)))
    return DerivGrids(grids.r, grids.theta, out, exact)


@dataclass
class CheckResult:
    max: float
    rms: float
    threshold: float
    passed: bool


@dataclass
class HopfField:
    Q: list                 # per face, complex (n_r, n_theta + 1, 3)
    h: np.ndarray           # complex (n_r, n_theta + 1)
    H: np.ndarray           # complex (n_r, n_theta + 1)
    im_sigma_max: float     # max |Im H| on the free boundary r = 1
    im_gamma_max: float     # max |Im H| on the junction columns
    cauchy_riemann_max: float
    origin_max: float       # max |H| on the innermost ring (proxy for H(0) = 0)


def hopf_field(derivs):
    """The holomorphic certificate field from the derivative grids."""
    if not derivs.has_junction:
        raise ImmersionInputError("the certificate field is defined as a three-face sum")
    r = derivs.r[:, None]
    theta = derivs.theta[None, :]
    phase = np.exp(-2j * theta)
    Qs, h = [], 0.0
    for fd in derivs.faces:
        A = fd.urr - fd.ur / r[..., None] - fd.utt / (r ** 2)[..., None]
        B = 2.0 * fd.urt / r[..., None] - 2.0 * fd.ut / (r ** 2)[..., None]
        Q = 0.25 * phase[..., None] * (A - 1j * B)
        Qs.append(Q)
        h = h + np.einsum("...i,...i->...", Q, Q)
    z = r * np.exp(1j * theta)
    H = z ** 4 * h
    dr = derivs.r[1] - derivs.r[0]
    dt = derivs.theta[1] - derivs.theta[0]
    # Discrete Cauchy-Riemann residual |dH/dr + (i/r) dH/dtheta| on plaquettes.
    dHdr = (H[1:, 1:] + H[1:, :-1] - H[:-1, 1:] - H[:-1, :-1]) / (2.0 * dr)
    dHdt = (H[1:, 1:] - H[1:, :-1] + H[:-1, 1:] - H[:-1, :-1]) / (2.0 * dt)
    rc = 0.5 * (derivs.r[1:] + derivs.r[:-1])[:, None]
    cr = np.abs(dHdr + 1j * dHdt / rc)
    return HopfField(
        Qs, h, H,
        im_sigma_max=float(np.abs(H[-1].imag).max()),
        im_gamma_max=float(max(np.abs(H[:, 0].imag).max(), np.abs(H[:, -1].imag).max())),
        cauchy_riemann_max=float(cr.max()),
        origin_max=float(np.abs(H[0]).max()),
    )


DEFAULT_THRESHOLDS = {
    "harmonic": 1e-8,
    "conformal_angle": 1e-8,
    "conformal_scale": 1e-8,
    "free_boundary_sphere": 1e-8,
    "free_boundary_orth": 1e-8,
    "junction_match_u": 1e-8,
    "junction_match_ur": 1e-8,
    "junction_match_urr": 1e-8,
    "theta2_match": 1e-8,
    "y_balance": 1e-8,
    "hopf_im_sigma": 1e-8,
    "hopf_im_gamma": 1e-8,
    "hopf_cauchy_riemann": 1e-8,
    "hopf_origin": 1e-8,
}


@dataclass
class ResidualReport:
    checks: dict                      # name -> CheckResult
    hopf: HopfField | None
    hopf_meaningful: bool             # harmonic + conformal residuals passed

    @property
    def passed(self):
        return all(c.passed for c in self.checks.values())

    def to_dict(self):
        return {
            "schema_version": 1,
            "passed": bool(self.passed),
            "hopf_meaningful": bool(self.hopf_meaningful),
            "checks": {
                name: {"max": c.max, "rms": c.rms,
                       "threshold": c.threshold, "pass": c.passed}
                for name, c in sorted(self.checks.items())
            },
        }


def _norm_stats(values):
    flat = np.asarray(values).ravel()
    return float(np.abs(flat).max()), float(np.sqrt(np.mean(flat ** 2)))


def certificate_residuals(derivs, thresholds=None):
    """Populate every certificate residual and the Hopf diagnostics.

    The Hopf diagnostics are computed only for three-face grids, and are marked
    not meaningful when the harmonic or conformality residuals fail (the
    holomorphy argument presumes both).
    """
    th = dict(DEFAULT_THRESHOLDS)
    th.update(thresholds or {})
    r = derivs.r[:, None, None]
    checks = {}

    def add(name, values):
        mx, rms = _norm_stats(values)
        checks[name] = CheckResult(mx, rms, th[name], mx <= th[name])

    harmonic = []
    conf_angle = []
    conf_scale = []
    fb_sphere = []
    fb_orth = []
    for fd in derivs.faces:
        # Harmonicity in the r^2-scaled form r^2 u_rr + r u_r + u_tt: the
        # unscaled residual carries a 1/r^2 weight that amplifies angular
        # truncation error near the puncture and hides the stencil order.
        lap = r ** 2 * fd.urr + r * fd.ur + fd.utt
        harmonic.append(np.linalg.norm(lap, axis=-1))
        conf_angle.append(np.einsum("...i,...i->...", fd.ur, fd.ut))
        conf_scale.append(np.einsum("...i,...i->...", fd.ur, fd.ur)
                          - np.einsum("...i,...i->...", fd.ut, fd.ut) / derivs.r[:, None] ** 2)
        fb_sphere.append(np.linalg.norm(fd.u[-1], axis=-1) - 1.0)
        fb_orth.append(np.linalg.norm(np.cross(fd.ur[-1], fd.u[-1]), axis=-1))
    add("harmonic", np.concatenate([x.ravel() for x in harmonic]))
    add("conformal_angle", np.concatenate([x.ravel() for x in conf_angle]))
    add("conformal_scale", np.concatenate([x.ravel() for x in conf_scale]))
    add("free_boundary_sphere", np.concatenate([x.ravel() for x in fb_sphere]))
    add("free_boundary_orth", np.concatenate([x.ravel() for x in fb_orth]))

    hopf = None
    meaningful = True
    if derivs.has_junction:
        cols = (0, -1)

        def mismatch(attr):
            vals = []
            for c in cols:
                a1 = getattr(derivs.faces[0], attr)[:, c, :]
                a2 = getattr(derivs.faces[1], attr)[:, c, :]
                a3 = getattr(derivs.faces[2], attr)[:, c, :]
                vals.append(np.linalg.norm(a1 - a2, axis=-1))
                vals.append(np.linalg.norm(a2 - a3, axis=-1))
                vals.append(np.linalg.norm(a1 - a3, axis=-1))
            return np.concatenate(vals)

        add("junction_match_u", mismatch("u"))
        add("junction_match_ur", mismatch("ur"))
        add("junction_match_urr", mismatch("urr"))
        add("theta2_match", mismatch("utt"))
        bal = []
        for c in cols:
            s = sum(fd.ut[:, c, :] for fd in derivs.faces)
            bal.append(np.linalg.norm(s, axis=-1))
        add("y_balance", np.concatenate(bal))

        hopf = hopf_field(derivs)
        meaningful = (checks["harmonic"].passed and checks["conformal_angle"].passed
                      and checks["conformal_scale"].passed)
        add("hopf_im_sigma", hopf.im_sigma_max)
        add("hopf_im_gamma", hopf.im_gamma_max)
        add("hopf_cauchy_riemann", hopf.cauchy_riemann_max)
        add("hopf_origin", hopf.origin_max)
    return ResidualReport(checks, hopf, meaningful)


# ---------------------------------------------------------------------------
# Perturbation families (test articles for the detection properties)
# ---------------------------------------------------------------------------

def _three_face_samples(n_r, n_theta, face_fns):
    r, theta = _grid_axes(n_r, n_theta, np.pi)
    R, T = np.meshgrid(r, theta, indexing="ij")
    faces = [fn(R, T) for fn in face_fns]
    return PolarGridSet(r, theta, faces)


def sample_angle_imbalance(n_r, n_theta, angles_deg=(0.0, 115.0, 235.0)):
    """Flat faces joined at unequal dihedral angles: trips the 120-degree balance."""
    def make(angle):
        Rm = rotation_about_x(angle)

        def fn(R, T):
            x, y = R * np.cos(T), R * np.sin(T)
            return np.stack([x, y, np.zeros_like(x)], axis=-1) @ Rm.T
        return fn

    return _three_face_samples(n_r, n_theta, [make(a) for a in angles_deg])


def sample_boundary_tilt(n_r, n_theta, alpha_deg):
    """Faces bent out of plane so the boundary meets the sphere at angle alpha.

    Each face is (x, y, a(1 - r^2)) rotated into place with a = tan(alpha)/2,
    so the boundary circle stays on the sphere while u_r tilts off the radial
    direction by alpha; the orthogonality residual |u_r x u| is about sin(alpha).
    The junction columns of the three faces intentionally disagree.
    """
    a = np.tan(np.deg2rad(alpha_deg)) / 2.0

    def make(angle):
        Rm = rotation_about_x(angle)

        def fn(R, T):
            x, y = R * np.cos(T), R * np.sin(T)
            return np.stack([x, y, a * (1.0 - R ** 2)], axis=-1) @ Rm.T
        return fn

    return _three_face_samples(n_r, n_theta, [make(ang) for ang in (0.0, 120.0, -120.0)])


def sample_nongreat_boundary(n_r, n_theta, eps=0.3):
    """Harmonic out-of-plane bulge on one face: boundary arc not a great circle.

    Face 2 carries the extra harmonic coordinate eps * r^2 sin(2*theta) normal
    to its plane.  The perturbation and its radial derivative vanish on the
    junction rays, so the junction stays exactly matched, but the boundary arc
    (cos t, sin t, eps sin 2t) is not a great circle and the certificate field
    picks up Im H = -eps^2 r^4 sin(4*theta), visible on the free boundary.
    """
    def flat(angle):
        Rm = rotation_about_x(angle)

        def fn(R, T):
            x, y = R * np.cos(T), R * np.sin(T)
            return np.stack([x, y, np.zeros_like(x)], axis=-1) @ Rm.T
        return fn

    def bulged(R, T):
        x, y = R * np.cos(T), R * np.sin(T)
        z = eps * R ** 2 * np.sin(2.0 * T)
        return np.stack([x, y, z], axis=-1) @ rotation_about_x(120.0).T

    return _three_face_samples(n_r, n_theta, [flat(0.0), bulged, flat(-120.0)])


def sample_nonconformal_reparam(n_r, n_theta):
    """The exact flat Y-cone reparametrized by r -> r^2 on every face.

    Harmonicity and junction matching survive at the flat cone, but the
    conformal-scale residual is large, so the Hopf diagnostics are flagged as
    not meaningful.
    """
    def make(angle):
        Rm = rotation_about_x(angle)

        def fn(R, T):
            s = R ** 2
            x, y = s * np.cos(T), s * np.sin(T)
            return np.stack([x, y, np.zeros_like(x)], axis=-1) @ Rm.T
        return fn

    return _three_face_samples(n_r, n_theta, [make(a) for a in (0.0, 120.0, -120.0)])


def rotate_grids(grids, rotation):
    """Apply a common ambient rotation to every face sample (gauge transform)."""
    faces = [f @ np.asarray(rotation).T for f in grids.faces]
    return PolarGridSet(grids.r.copy(), grids.theta.copy(), faces, jets=None)
