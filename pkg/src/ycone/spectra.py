"""Morse index and nullity of the reduced pencil, by two independent routes.

Route one ("bulk") counts pencil eigenvalues by Sylvester inertia of the
shifted matrix A - s*M via a symmetric indefinite (LDL^T) factorization, so the
integer counts never depend on iterative convergence.  Route two ("dtn")
eliminates the interior and junction unknowns of the harmonic-extension problem
and counts Dirichlet-to-Neumann eigenvalues against the threshold 1.  For
flat-face surfaces the two routes agree exactly (Haynsworth congruence).
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ycone.assembly import assemble_forms, constraint_basis, sigma_mass
from ycone.geometry import evaluate_frame
from ycone.mesh import CORNER, SIGMA, YMesh

_DENSE_LIMIT = 2000
_SHIFT_INVERT_SIGMA = -10.0  # safely below the bottom of the pencil spectrum


class SolverError(RuntimeError):
    """Factorization breakdown or unconverged eigenvalue iteration."""


class UnsupportedRouteError(ValueError):
    """The DtN route requires flat faces and a straight junction."""


def default_zero_tolerance(h, c0=5.0):
    """Zero-classification threshold tol(h) = c0 * h^2."""
    return c0 * h * h


def _ldl_inertia(B, zero_tol):
    """Sylvester inertia of a dense symmetric matrix via LDL^T."""
    try:
        _, d, _ = sla.ldl(B)
    except Exception as exc:  # pragma: no cover - LAPACK breakdown
        raise SolverError(f"LDL^T factorization failed: {exc}") from exc
    m = d.shape[0]
    n_neg = n_zero = n_pos = 0
    i = 0
    while i < m:
        if i + 1 < m and d[i + 1, i] != 0.0:
            a, b, c = d[i, i], d[i + 1, i], d[i + 1, i + 1]
            tr, det = a + c, a * c - b * b
            disc = np.sqrt(max(tr * tr / 4.0 - det, 0.0))
            for lam in (tr / 2.0 - disc, tr / 2.0 + disc):
                if lam < -zero_tol:
                    n_neg += 1
                elif lam > zero_tol:
                    n_pos += 1
                else:
                    n_zero += 1
            i += 2
        else:
            piv = d[i, i]
            if piv < -zero_tol:
                n_neg += 1
            elif piv > zero_tol:
                n_pos += 1
            else:
                n_zero += 1
            i += 1
    return n_neg, n_zero, n_pos


def inertia_count(pencil, shift):
    """Exact (n_neg, n_zero, n_pos) of A - shift*M.

    Because M is positive definite, n_neg equals the number of pencil
    eigenvalues strictly below the shift.
    """
    B = (pencil.A - shift * pencil.M).toarray()
    scale = np.abs(B).max()
    return _ldl_inertia(B, zero_tol=100.0 * np.finfo(float).eps * max(scale, 1.0))


Eigenpairs = namedtuple("Eigenpairs", ["values", "vectors"])


def low_spectrum(pencil, k, residual_tol=1e-8):
    """The k algebraically smallest eigenpairs of A y = lambda M y."""
    m = pencil.m
    if k > m:
        raise SolverError(f"requested {k} eigenpairs from a pencil of size {m}")
    if m <= _DENSE_LIMIT:
        w, v = sla.eigh(pencil.A.toarray(), pencil.M.toarray())
        w, v = w[:k], v[:, :k]
    else:
        A = pencil.A.tocsc()
        M = pencil.M.tocsc()
        v0 = np.full(m, 1.0 / np.sqrt(m))
        try:
            w, v = spla.eigsh(A, k=k, M=M, sigma=_SHIFT_INVERT_SIGMA,
                              which="LM", v0=v0, maxiter=2000)
        except spla.ArpackNoConvergence as exc:
            raise SolverError(f"shift-invert iteration did not converge: {exc}") from exc
        order = np.argsort(w)
        w, v = w[order], v[:, order]
    resid = pencil.A @ v - pencil.M @ v * w
    norm_A = np.abs(pencil.A).sum(axis=1).max()
    norm_M = np.abs(pencil.M).sum(axis=1).max()
    for i in range(k):
        # Backward-error scale; a residual relative to ||A v|| would blow up
        # exactly on the zero cluster we care about.
        num = np.linalg.norm(resid[:, i])
        den = (norm_A + abs(w[i]) * norm_M) * np.linalg.norm(v[:, i])
        if num > residual_tol * den:
            raise SolverError(
                f"eigenpair {i} residual {num / den:.2e} exceeds {residual_tol:.0e}")
    return Eigenpairs(w, v)


@dataclass
class SpectrumReport:
    surface: str
    h: float
    eigenvalues: np.ndarray
    index: int
    nullity: int
    zero_tolerance: float
    route: str
    ambiguous: list = field(default_factory=list)
    null_residuals: list = field(default_factory=list)
    counts_consistent: bool = True

    def to_dict(self):
        return {
            "surface": self.surface,
            "h": self.h,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "index": int(self.index),
            "nullity": int(self.nullity),
            "zero_tolerance": float(self.zero_tolerance),
            "route": self.route,
            "ambiguous": [float(x) for x in self.ambiguous],
            "null_residuals": [float(x) for x in self.null_residuals],
            "counts_consistent": bool(self.counts_consistent),
        }


def classify(eigs, h, c0=5.0, surface="", route="bulk", pencil=None):
    """Classify eigenvalues into index/nullity under tol(h) = c0*h^2.

    When the pencil is supplied, the counts are taken from exact inertia at the
    shifts -tol and +tol (the eigenvalue list is then diagnostic only) and any
    disagreement with the list is flagged.
    """
    eigs = np.sort(np.asarray(eigs, dtype=float))
    tol = default_zero_tolerance(h, c0)
    index = int(np.sum(eigs < -tol))
    nullity = int(np.sum(np.abs(eigs) <= tol))
    consistent = True
    if pencil is not None:
        below_minus, _, _ = inertia_count(pencil, -tol)
        below_plus, _, _ = inertia_count(pencil, tol)
        consistent = (below_minus == index
                      and below_plus - below_minus == nullity)
        # The factorization counts are authoritative (the list may be short).
        index = below_minus
        nullity = below_plus - below_minus
    ambiguous = [float(x) for x in eigs
                 if 0.5 * tol <= abs(x) <= 2.0 * tol]
    return SpectrumReport(surface, h, eigs, index, nullity, tol, route,
                          ambiguous=ambiguous, counts_consistent=consistent)


@dataclass
class SteklovSpectrum:
    surface: str
    gamma_condition: str  # 'neumann' | 'dirichlet' | 'constrained-Y'
    eigenvalues: np.ndarray

    def count_below(self, threshold, tol=0.0):
        return int(np.sum(self.eigenvalues < threshold - tol))

    def count_at(self, value, tol):
        return int(np.sum(np.abs(self.eigenvalues - value) <= tol))


def _schur_complement(K, b_idx, i_idx):
    """S = K_bb - K_bi K_ii^{-1} K_ib with a sparse factorization of K_ii."""
    K = K.tocsc()
    K_bb = K[np.ix_(b_idx, b_idx)].toarray()
    K_bi = K[np.ix_(b_idx, i_idx)].tocsc()
    K_ii = K[np.ix_(i_idx, i_idx)].tocsc()
    try:
        lu = spla.splu(K_ii)
    except RuntimeError as exc:
        raise SolverError(f"singular interior block in Schur reduction: {exc}") from exc
    X = lu.solve(K_bi.T.toarray())
    S = K_bb - K_bi @ X
    return 0.5 * (S + S.T)


def _flat_face_stiffness(face_mesh):
    """Stiffness and sigma boundary mass for one face with the flat metric."""
    from ycone.assembly import QuadFormSet  # local import to avoid cycle noise
    from ycone.geometry import canonical_surface

    kind = face_mesh.kind
    surf = canonical_surface("ycone") if kind == "half-disk" else canonical_surface("equatorial-disk")
    shim = YMesh([face_mesh], np.zeros((0, 1), dtype=np.int64), face_mesh.h)
    spec_shim = type(surf)(surf.name, [surf.faces[0]], surf.params)
    forms = assemble_forms(shim, spec_shim)
    return forms.K, sigma_mass(shim, spec_shim)


def steklov_face(face_mesh, gamma_condition="neumann"):
    """Discrete Dirichlet-to-Neumann spectrum of one flat face on sigma.

    gamma_condition chooses the junction-ray boundary condition of the per-face
    problem: 'neumann' (natural, selects the r^n cos(n theta) family, spectrum
    0, 1, 2, ...) or 'dirichlet' (gamma unknowns removed, selects the
    r^n sin(n theta) family, spectrum 1, 2, 3, ...).
    """
    if gamma_condition not in ("neumann", "dirichlet"):
        raise ValueError(f"unknown gamma condition {gamma_condition!r}")
    K, Ms = _flat_face_stiffness(face_mesh)
    tags = face_mesh.vertex_tags
    if gamma_condition == "neumann":
        b_idx = np.flatnonzero((tags == SIGMA) | (tags == CORNER))
        i_idx = np.flatnonzero(~((tags == SIGMA) | (tags == CORNER)))
    else:
        b_idx = np.flatnonzero(tags == SIGMA)
        i_idx = np.flatnonzero(tags == 0)  # interior only; gamma and corners removed
    S = _schur_complement(K, b_idx, i_idx)
    Mb = Ms[np.ix_(b_idx, b_idx)].toarray()
    w = sla.eigh(S, Mb, eigvals_only=True)
    return SteklovSpectrum(face_mesh.kind, gamma_condition, np.sort(w))


def _trace_columns(mesh, basis):
    """Reduced-basis column indices carrying sigma-trace data."""
    tags = np.concatenate([f.vertex_tags for f in mesh.faces])
    is_trace_col = np.zeros(basis.m, dtype=bool)
    is_trace_col[:basis.n_free] = np.isin(tags[basis.free_dofs], (SIGMA, CORNER))
    nj = basis.junction_dofs.shape[0]
    corner = tags[basis.junction_dofs[:, 0]] == CORNER
    for g in np.flatnonzero(corner):
        is_trace_col[basis.n_free + 2 * g] = True
        is_trace_col[basis.n_free + 2 * g + 1] = True
    return np.flatnonzero(is_trace_col), np.flatnonzero(~is_trace_col)


def dtn_index(mesh, spec, c0=5.0):
    """Index and nullity from the junction-constrained DtN spectrum on sigma.

    Requires flat faces (P = 0) and a straight junction (B_gamma = 0), where
    J-harmonic extensions are plain harmonic and the threshold eigenvalue is 1.
    Returns (SteklovSpectrum, index, nullity).
    """
    forms = assemble_forms(mesh, spec)
    if forms.P.nnz and abs(forms.P).max() > 1e-10:
        raise UnsupportedRouteError("DtN route requires flat faces (P = 0)")
    if forms.B_gamma.nnz and abs(forms.B_gamma).max() > 1e-10:
        raise UnsupportedRouteError("DtN route requires a straight junction (B_gamma = 0)")
    basis = constraint_basis(mesh)
    Z = basis.Z
    K_red = (Z.T @ forms.K @ Z).tocsr()
    K_red = 0.5 * (K_red + K_red.T)
    Ms_red = (Z.T @ sigma_mass(mesh, spec) @ Z).tocsr()
    b_idx, i_idx = _trace_columns(mesh, basis)
    S = _schur_complement(K_red, b_idx, i_idx)
    Mb = Ms_red[np.ix_(b_idx, b_idx)].toarray()
    Mb = 0.5 * (Mb + Mb.T)
    w = np.sort(sla.eigh(S, Mb, eigvals_only=True))
    tol = default_zero_tolerance(mesh.h, c0)
    spectrum = SteklovSpectrum(mesh.surface or "constrained", "constrained-Y", w)
    index = spectrum.count_below(1.0, tol=tol)
    nullity = spectrum.count_at(1.0, tol)
    return spectrum, index, nullity


@dataclass
class AnalyticNullBasis:
    """The five analytic null vectors of the Y-cone as nodal interpolants.

    Three 'sine' vectors (r sin theta on one face, zero elsewhere) and two
    'cosine' vectors (r cos theta weighted by the compatible coefficient
    triples (1,-1,0)/sqrt(2) and (1,1,-2)/sqrt(6)).
    """

    vectors: np.ndarray  # (5, n)
    names: tuple


def analytic_null_basis(mesh):
    if mesh.n_junction_nodes == 0 or len(mesh.faces) != 3:
        raise UnsupportedRouteError("analytic null basis is defined on the Y-cone mesh")
    n = mesh.n_dofs
    vecs = np.zeros((5, n))
    names = []
    for j, fm in enumerate(mesh.faces):
        off = int(mesh.offsets[j])
        vecs[j, off:off + fm.n_vertices] = fm.vertices[:, 1]  # r sin(theta)
        names.append(f"sine-face{j + 1}")
    for k, (label, c) in enumerate((
            ("cosine-(1,-1,0)", np.array([1.0, -1.0, 0.0]) / np.sqrt(2.0)),
            ("cosine-(1,1,-2)", np.array([1.0, 1.0, -2.0]) / np.sqrt(6.0)))):
        for j, fm in enumerate(mesh.faces):
            off = int(mesh.offsets[j])
            vecs[3 + k, off:off + fm.n_vertices] = c[j] * fm.vertices[:, 0]  # r cos(theta)
        names.append(label)
    return AnalyticNullBasis(vecs, tuple(names))


def null_projection_residuals(basis, pencil):
    """Residual ||A z|| / ||z||_M of each analytic null vector, in reduced coords."""
    out = []
    for f in basis.vectors:
        if f.size != pencil.basis.Z.shape[0]:
            raise SolverError("null basis and pencil come from different meshes")
        y = pencil.basis.reduce_vector(f)
        num = np.linalg.norm(pencil.A @ y)
        den = np.sqrt(max(float(y @ (pencil.M @ y)), 1e-300))
        out.append(float(num / den))
    return out


CoordinateFieldResult = namedtuple(
    "CoordinateFieldResult", ["vector", "q_value", "tangential"])


def coordinate_field_test(mesh, spec, E, forms=None):
    """Index form on the normal part of a constant ambient field E.

    The nodal vector is n_j = <E, N_j>, constant per face; it satisfies the
    junction compatibility automatically because N_1 + N_2 + N_3 = 0.
    """
    E = np.asarray(E, dtype=float)
    if abs(np.linalg.norm(E) - 1.0) > 1e-10:
        raise ValueError("E must be a unit vector")
    from ycone.assembly import apply_form
    if forms is None:
        forms = assemble_forms(mesh, spec)
    coeffs = [float(E @ evaluate_frame(spec, j, (0.5, np.pi / 2)).normal)
              for j in range(1, len(spec.faces) + 1)]
    vec = np.zeros(mesh.n_dofs)
    if max(abs(c) for c in coeffs) < 1e-12:
        return CoordinateFieldResult(vec, 0.0, True)
    for j, fm in enumerate(mesh.faces):
        off = int(mesh.offsets[j])
        vec[off:off + fm.n_vertices] = coeffs[j]
    return CoordinateFieldResult(vec, apply_form(forms, vec), False)


def dense_counts(pencil, tol):
    """Brute-force oracle: full dense eigensolve of the pencil, then count."""
    w = sla.eigh(pencil.A.toarray(), pencil.M.toarray(), eigvals_only=True)
    index = int(np.sum(w < -tol))
    nullity = int(np.sum(np.abs(w) <= tol))
    return index, nullity, w
