"""Discrete second-variation quadratic forms and the constrained reduction.

Linear (P1) elements on the face meshes.  All area integrals use the 3-point
edge-midpoint rule (degree 2), boundary integrals a 2-point Gauss rule, with
the induced metric and the curvature coefficients evaluated per quadrature
point from the analytic immersion.  The assembled index form is

    Q(f, f) = f^T (K - P + B_sigma + B_gamma) f

with K the stiffness, P the |A|^2 potential, B_sigma carrying the free-boundary
coefficient (the curvature vector of the boundary curve dotted with the outward
conormal, equal to -1 on canonical surfaces) and B_gamma the junction term with
its leading minus sign.  The junction compatibility f1 + f2 + f3 = 0 is imposed
through a null-space basis Z, never by merging unknowns.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ycone.mesh import CORNER, GAMMA

_GAUSS2 = (0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0))


class AssemblyError(ValueError):
    """Mesh/surface mismatch or degenerate element geometry."""


@dataclass
class QuadFormSet:
    """Assembled symmetric bilinear forms of the second variation."""

    K: sp.csr_matrix        # stiffness, int |grad f|^2
    P: sp.csr_matrix        # potential, int |A|^2 f^2
    B_sigma: sp.csr_matrix  # free-boundary term on sigma
    B_gamma: sp.csr_matrix  # junction term on gamma (with its minus sign)
    M: sp.csr_matrix        # mass, int f^2
    n: int

    def index_form(self):
        return (self.K - self.P + self.B_sigma + self.B_gamma).tocsr()


def _polar(points):
    r = np.hypot(points[..., 0], points[..., 1])
    theta = np.arctan2(points[..., 1], points[..., 0])
    return r, theta


def _cartesian_jacobian(face, points):
    """Immersion jacobian columns (du/dx, du/dy) at parameter points (..., 2)."""
    r, theta = _polar(points)
    if np.any(r < 1e-13):
        raise AssemblyError("quadrature point at the cone point r = 0")
    jet = face.jet2(r, theta)
    ct, st = np.cos(theta)[..., None], np.sin(theta)[..., None]
    inv_r = (1.0 / r)[..., None]
    dudx = ct * jet.ur - st * inv_r * jet.ut
    dudy = st * jet.ur + ct * inv_r * jet.ut
    return dudx, dudy, jet


def _metric(dudx, dudy):
    E = np.einsum("...i,...i->...", dudx, dudx)
    F = np.einsum("...i,...i->...", dudx, dudy)
    G = np.einsum("...i,...i->...", dudy, dudy)
    det = E * G - F * F
    if np.any(det <= 1e-20):
        raise AssemblyError("degenerate element metric")
    return E, F, G, det


def _second_form_norm2(face, points):
    """|A|^2 at parameter points, vectorized over the trailing grid shape."""
    dudx, dudy, jet = _cartesian_jacobian(face, points)
    E, F, G, det = _metric(dudx, dudy)
    nu = np.cross(jet.ur, jet.ut)
    nu /= np.linalg.norm(nu, axis=-1, keepdims=True)
    e = np.einsum("...i,...i->...", jet.urr, nu)
    f = np.einsum("...i,...i->...", jet.urt, nu)
    g2 = np.einsum("...i,...i->...", jet.utt, nu)
    # |A|^2 = tr(S^2) with the shape operator S expressed in the (r, theta) chart.
    Ep = np.einsum("...i,...i->...", jet.ur, jet.ur)
    Fp = np.einsum("...i,...i->...", jet.ur, jet.ut)
    Gp = np.einsum("...i,...i->...", jet.ut, jet.ut)
    detp = Ep * Gp - Fp * Fp
    s11 = (Gp * e - Fp * f) / detp
    s12 = (Gp * f - Fp * g2) / detp
    s21 = (-Fp * e + Ep * f) / detp
    s22 = (-Fp * f + Ep * g2) / detp
    return s11 * s11 + 2.0 * s12 * s21 + s22 * s22


def _sigma_coefficient(face, theta):
    """Curvature vector of the free-boundary curve dotted with the outward conormal."""
    jet = face.jet2(np.ones_like(theta), theta)
    tau = jet.ur / np.linalg.norm(jet.ur, axis=-1, keepdims=True)
    speed2 = np.einsum("...i,...i->...", jet.ut, jet.ut)
    tangent = jet.ut / np.sqrt(speed2)[..., None]
    acc = jet.utt - np.einsum("...i,...i->...", jet.utt, tangent)[..., None] * tangent
    kvec = acc / speed2[..., None]
    return np.einsum("...i,...i->...", kvec, tau)


def _gamma_coefficient(face, r, theta0):
    """Curvature vector of the junction curve dotted with the outward conormal."""
    theta = np.full_like(r, theta0)
    jet = face.jet2(r, theta)
    sign = -1.0 if abs(theta0) < 1e-12 else 1.0
    tau = sign * jet.ut / np.linalg.norm(jet.ut, axis=-1, keepdims=True)
    speed2 = np.einsum("...i,...i->...", jet.ur, jet.ur)
    tangent = jet.ur / np.sqrt(speed2)[..., None]
    acc = jet.urr - np.einsum("...i,...i->...", jet.urr, tangent)[..., None] * tangent
    kvec = acc / speed2[..., None]
    return np.einsum("...i,...i->...", kvec, tau)


def _face_area_forms(face_mesh, face):
    """Element-wise K, P, M triplets for one face (local vertex numbering)."""
    p = face_mesh.vertices[face_mesh.triangles]  # (T, 3, 2)
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    det_j = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    area = 0.5 * np.abs(det_j)
    # Constant P1 gradients in parameter coordinates.
    grads = np.empty(p.shape)  # (T, 3 vertices, 2)
    grads[:, 1, 0] = e2[:, 1] / det_j
    grads[:, 1, 1] = -e2[:, 0] / det_j
    grads[:, 2, 0] = -e1[:, 1] / det_j
    grads[:, 2, 1] = e1[:, 0] / det_j
    grads[:, 0] = -grads[:, 1] - grads[:, 2]

    mid = 0.5 * (p[:, [0, 1, 2]] + p[:, [1, 2, 0]])  # (T, 3 qpoints, 2)
    dudx, dudy, _ = _cartesian_jacobian(face, mid)
    E, F, G, det = _metric(dudx, dudy)
    w = np.sqrt(det)  # (T, 3)
    inv = np.empty(det.shape + (2, 2))
    inv[..., 0, 0] = G / det
    inv[..., 0, 1] = -F / det
    inv[..., 1, 0] = -F / det
    inv[..., 1, 1] = E / det

    # lam[q, a]: P1 value of vertex a at midpoint q (midpoint of edge a-(a+1)).
    lam = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])

    wq = (area[:, None] / 3.0) * w  # (T, 3)
    k_el = np.einsum("tq,tai,tqij,tbj->tab", wq, grads, inv, grads)
    m_el = np.einsum("tq,qa,qb->tab", wq, lam, lam)
    a2 = _second_form_norm2(face, mid)
    p_el = np.einsum("tq,tq,qa,qb->tab", wq, a2, lam, lam)
    return k_el, p_el, m_el, area


def _edge_form(face_mesh, face, edges, coeff_fn):
    """Boundary bilinear form  int coeff * f * g ds  over the tagged edges."""
    if edges.shape[0] == 0:
        return np.zeros((0, 2, 2))
    a = face_mesh.vertices[edges[:, 0]]
    b = face_mesh.vertices[edges[:, 1]]
    el = np.zeros((edges.shape[0], 2, 2))
    for t in _GAUSS2:
        q = (1.0 - t) * a + t * b  # (E, 2)
        dudx, dudy, _ = _cartesian_jacobian(face, q)
        d = b - a
        dc = d[:, 0:1] * dudx + d[:, 1:2] * dudy  # physical tangent along the chord
        ds = np.linalg.norm(dc, axis=1)
        c = coeff_fn(q)
        lam = np.array([1.0 - t, t])
        el += 0.5 * (c * ds)[:, None, None] * np.einsum("a,b->ab", lam, lam)
    return el


def _accumulate(rows, cols, vals, local, dof_map):
    t = local.shape[0]
    k = local.shape[1]
    r = np.repeat(dof_map, k, axis=1).ravel()
    c = np.tile(dof_map, (1, k)).ravel()
    rows.append(r)
    cols.append(c)
    vals.append(local.reshape(t, -1).ravel())


def assemble_forms(mesh, spec):
    """Assemble the quadratic forms of the index form for a mesh of spec."""
    if len(mesh.faces) != len(spec.faces):
        raise AssemblyError(
            f"mesh has {len(mesh.faces)} faces but surface has {len(spec.faces)}")
    n = mesh.n_dofs
    data = {name: ([], [], []) for name in ("K", "P", "M", "Bs", "Bg")}

    for j, (fm, face) in enumerate(zip(mesh.faces, spec.faces)):
        off = int(mesh.offsets[j])
        k_el, p_el, m_el, _ = _face_area_forms(fm, face)
        tri_dofs = fm.triangles + off
        for name, el in (("K", k_el), ("P", p_el), ("M", m_el)):
            _accumulate(*data[name], el, tri_dofs)

        bs_el = _edge_form(fm, face, fm.sigma_edges,
                           lambda q: _sigma_coefficient(face, _polar(q)[1]))
        _accumulate(*data["Bs"], bs_el, fm.sigma_edges + off)

        if fm.gamma_edges.shape[0]:
            mid_theta = _polar(0.5 * (fm.vertices[fm.gamma_edges[:, 0]]
                                      + fm.vertices[fm.gamma_edges[:, 1]]))[1]
            on_zero = np.abs(mid_theta) < 0.5 * np.pi
            for theta0, sel in ((0.0, on_zero), (np.pi, ~on_zero)):
                edges = fm.gamma_edges[sel]
                # Leading minus sign of the junction term of the index form.
                bg_el = -_edge_form(fm, face, edges,
                                    lambda q: _gamma_coefficient(face, _polar(q)[0], theta0))
                _accumulate(*data["Bg"], bg_el, edges + off)

    def build(name):
        rows, cols, vals = data[name]
        if not rows:
            return sp.csr_matrix((n, n))
        mat = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n)).tocsr()
        mat.sum_duplicates()
        return mat

    return QuadFormSet(build("K"), build("P"), build("Bs"), build("Bg"), build("M"), n)


def sigma_mass(mesh, spec):
    """Boundary mass matrix  int_sigma f g  (positive), for the DtN route."""
    n = mesh.n_dofs
    rows, cols, vals = [], [], []
    for j, (fm, face) in enumerate(zip(mesh.faces, spec.faces)):
        el = _edge_form(fm, face, fm.sigma_edges, lambda q: np.ones(q.shape[0]))
        _accumulate(rows, cols, vals, el, fm.sigma_edges + int(mesh.offsets[j]))
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n)).tocsr()
    mat.sum_duplicates()
    return mat


@dataclass
class ConstraintBasis:
    """Null-space basis of the junction compatibility constraint.

    Columns 0..n_free-1 are the identity columns of the unconstrained DOFs in
    global order; after those come two orthonormal columns per junction node
    (patterns (1,-1,0)/sqrt(2) and (1,1,-2)/sqrt(6) on the node's three DOFs).
    """

    Z: sp.csr_matrix
    free_dofs: np.ndarray          # (n_free,) global DOF of each identity column
    junction_dofs: np.ndarray      # (nj, 3) global DOFs of each junction node
    n_free: int = field(init=False)

    def __post_init__(self):
        self.n_free = self.free_dofs.size

    @property
    def m(self):
        return self.Z.shape[1]

    def reduce_vector(self, f):
        """Coordinates of a compatible nodal vector in the reduced basis."""
        return self.Z.T @ f


def constraint_basis(mesh):
    n = mesh.n_dofs
    nj = mesh.n_junction_nodes
    if nj == 0:
        return ConstraintBasis(sp.identity(n, format="csr"), np.arange(n),
                               np.zeros((0, 3), dtype=np.int64))
    jdofs = np.stack(
        [mesh.offsets[j] + mesh.junction_triples[:, j] for j in range(len(mesh.faces))],
        axis=1).astype(np.int64)
    constrained = np.zeros(n, dtype=bool)
    constrained[jdofs.ravel()] = True
    free = np.flatnonzero(~constrained)
    m = free.size + 2 * nj
    rows = [free]
    cols = [np.arange(free.size)]
    vals = [np.ones(free.size)]
    c1 = np.array([1.0, -1.0, 0.0]) / np.sqrt(2.0)
    c2 = np.array([1.0, 1.0, -2.0]) / np.sqrt(6.0)
    for g in range(nj):
        base = free.size + 2 * g
        rows.append(np.repeat(jdofs[g], 2))
        cols.append(np.tile([base, base + 1], 3))
        vals.append(np.column_stack([c1, c2]).ravel())
    Z = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, m)).tocsr()
    return ConstraintBasis(Z, free, jdofs)


@dataclass
class ReducedPencil:
    """The index form and mass restricted to the compatibility subspace."""

    A: sp.csr_matrix
    M: sp.csr_matrix
    basis: ConstraintBasis
    h: float
    surface: str

    @property
    def m(self):
        return self.A.shape[0]


def reduce_pencil(forms, basis, h=0.0, surface=""):
    """Congruence transform A_r = Z^T (K - P + Bs + Bg) Z,  M_r = Z^T M Z."""
    if basis.Z.shape[0] != forms.n:
        raise AssemblyError("constraint basis / form dimensions mismatch")
    Z = basis.Z
    A = (Z.T @ forms.index_form() @ Z).tocsr()
    M = (Z.T @ forms.M @ Z).tocsr()
    A = ((A + A.T) * 0.5).tocsr()  # guard roundoff asymmetry from the product
    M = ((M + M.T) * 0.5).tocsr()
    return ReducedPencil(A, M, basis, h, surface)


def apply_form(forms, f):
    """Evaluate Q(f, f) = f^T (K - P + Bs + Bg) f on a nodal vector."""
    f = np.asarray(f, dtype=float)
    if f.shape != (forms.n,):
        raise AssemblyError(f"vector length {f.shape} != DOF count {forms.n}")
    return float(f @ (forms.index_form() @ f))


def export_coordinate(matrix, path):
    """Write a matrix as deterministic row-major (row, col, value) triplets."""
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as fh:
        fh.write(f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}\n")
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{r} {c} {v!r}\n")
