"""Structured polar triangulations of the face domains with boundary tags.

The mesher is deterministic: rings in r, sectors in theta, with the sector
count doubling outward so that arc spacing tracks the radial spacing (this
keeps the minimum triangle angle bounded).  The three faces of a Y-mesh share
the same junction discretization and are combinatorially identical, so the
junction map is trivial to build and face permutations act block-wise on every
assembled matrix.

Vertices are stored in Cartesian coordinates (x, y) of the parameter domain;
the junction rays theta in {0, pi} are the x axis, sigma is the unit circle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ycone.geometry import FaceDomain, GeometryError

INTERIOR, SIGMA, GAMMA, CORNER = 0, 1, 2, 3

#: Sector-doubling threshold: double when arc spacing exceeds this multiple of
#: the local radial spacing.  Chosen so the minimum triangle angle stays > 20 deg.
_GRADE_FACTOR = 1.3

_FAN_SECTORS = {"half-disk": 4, "full-disk": 8}


class MeshError(ValueError):
    """Invalid mesh request or a violated mesh invariant."""


@dataclass
class FaceMesh:
    kind: str
    vertices: np.ndarray        # (V, 2) float
    triangles: np.ndarray       # (T, 3) int
    sigma_edges: np.ndarray     # (Es, 2) int
    gamma_edges: np.ndarray     # (Eg, 2) int
    vertex_tags: np.ndarray     # (V,) int, INTERIOR/SIGMA/GAMMA/CORNER
    h: float                    # maximum radial ring spacing

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    def copy(self):
        return FaceMesh(self.kind, self.vertices.copy(), self.triangles.copy(),
                        self.sigma_edges.copy(), self.gamma_edges.copy(),
                        self.vertex_tags.copy(), self.h)


def _as_domain(domain):
    if isinstance(domain, FaceDomain):
        return domain
    return FaceDomain(domain)


def mesh_face(domain, h, gamma_nodes=None, node_budget=500_000):
    """Triangulate a face domain with target mesh size h.

    gamma_nodes, when given, is the shared 1-D junction discretization: the
    sorted r values (including 0 and 1) used as ring radii, so the gamma
    vertices of the resulting mesh are exactly the prescribed junction nodes
    on both rays.
    """
    domain = _as_domain(domain)
    if domain.kind == "annulus-band":
        raise MeshError("annulus-band faces are not meshed (comparison geometry only)")
    if not 0.0 < h < 1.0:
        raise MeshError(f"mesh size h = {h} outside (0, 1)")
    if gamma_nodes is not None:
        if domain.kind != "half-disk":
            raise MeshError("gamma_nodes only apply to half-disk faces")
        radii = np.asarray(sorted(gamma_nodes), dtype=float)
        if radii.size < 3 or abs(radii[0]) > 1e-14 or abs(radii[-1] - 1.0) > 1e-14:
            raise MeshError("gamma_nodes must include both endpoints r = 0 and r = 1")
        if np.min(np.diff(radii)) < 1e-12:
            raise MeshError("degenerate gamma_nodes (duplicate r values)")
        radii[0], radii[-1] = 0.0, 1.0
    else:
        n_r = max(2, math.ceil(1.0 / h))
        radii = np.linspace(0.0, 1.0, n_r + 1)

    theta_max = domain.theta_max
    periodic = domain.kind == "full-disk"
    n_r = radii.size - 1

    # Sector count per ring, doubling outward when arcs get too wide.
    sectors = [0] * (n_r + 1)
    sectors[1] = _FAN_SECTORS[domain.kind]
    for i in range(2, n_r + 1):
        s = sectors[i - 1]
        dr = radii[i] - radii[i - 1]
        if radii[i] * theta_max / s > _GRADE_FACTOR * dr:
            s *= 2
        sectors[i] = s

    verts = [(0.0, 0.0)]
    ring_start = [0] * (n_r + 1)  # ring 0 is the center vertex
    for i in range(1, n_r + 1):
        s = sectors[i]
        ring_start[i] = len(verts)
        ks = np.arange(s if periodic else s + 1)
        th = ks * (theta_max / s)
        verts.extend(zip(radii[i] * np.cos(th), radii[i] * np.sin(th)))
    vertices = np.array(verts)
    if vertices.shape[0] > node_budget:
        raise MeshError(f"node budget exceeded: {vertices.shape[0]} > {node_budget}")

    def vid(i, k):
        if i == 0:
            return 0
        s = sectors[i]
        return ring_start[i] + (k % s if periodic else k)

    tris = []
    for k in range(sectors[1]):
        tris.append((0, vid(1, k), vid(1, k + 1)))
    for i in range(1, n_r):
        si, so = sectors[i], sectors[i + 1]
        if so == si:
            for k in range(si):
                a, b = vid(i, k), vid(i, k + 1)
                c, d = vid(i + 1, k), vid(i + 1, k + 1)
                tris.append((a, d, c))
                tris.append((a, b, d))
        elif so == 2 * si:
            for k in range(si):
                a, b = vid(i, k), vid(i, k + 1)
                p, q, r2 = vid(i + 1, 2 * k), vid(i + 1, 2 * k + 1), vid(i + 1, 2 * k + 2)
                tris.append((a, q, p))
                tris.append((a, b, q))
                tris.append((b, r2, q))
        else:  # pragma: no cover - single doubling per ring by construction
            raise MeshError("sector grading out of step")
    triangles = np.array(tris, dtype=np.int64)
    _orient_ccw(vertices, triangles)

    sigma_edges = np.array(
        [(vid(n_r, k), vid(n_r, k + 1)) for k in range(sectors[n_r])], dtype=np.int64)
    if domain.kind == "half-disk":
        ray0 = [0] + [vid(i, 0) for i in range(1, n_r + 1)]
        ray_pi = [0] + [vid(i, sectors[i]) for i in range(1, n_r + 1)]
        gamma_edges = np.array(
            [(ray0[i], ray0[i + 1]) for i in range(n_r)]
            + [(ray_pi[i], ray_pi[i + 1]) for i in range(n_r)], dtype=np.int64)
    else:
        gamma_edges = np.zeros((0, 2), dtype=np.int64)

    tags = np.full(vertices.shape[0], INTERIOR, dtype=np.int8)
    tags[np.unique(gamma_edges)] = GAMMA
    sigma_verts = np.unique(sigma_edges)
    on_gamma = tags[sigma_verts] == GAMMA
    tags[sigma_verts] = SIGMA
    tags[sigma_verts[on_gamma]] = CORNER

    h_mesh = float(np.max(np.diff(radii)))
    mesh = FaceMesh(domain.kind, vertices, triangles, sigma_edges, gamma_edges, tags, h_mesh)
    validate_face(mesh)
    return mesh


def _orient_ccw(vertices, triangles):
    p = vertices
    a, b, c = triangles[:, 0], triangles[:, 1], triangles[:, 2]
    det = ((p[b, 0] - p[a, 0]) * (p[c, 1] - p[a, 1])
           - (p[b, 1] - p[a, 1]) * (p[c, 0] - p[a, 0]))
    flip = det < 0.0
    triangles[flip, 1], triangles[flip, 2] = triangles[flip, 2], triangles[flip, 1]


def _edge_set(triangles):
    e = np.vstack([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    e.sort(axis=1)
    return np.unique(e, axis=0), e


def min_angle_deg(mesh):
    p = mesh.vertices
    t = mesh.triangles
    worst = 180.0
    for perm in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        u = p[t[:, perm[1]]] - p[t[:, perm[0]]]
        v = p[t[:, perm[2]]] - p[t[:, perm[0]]]
        cosang = np.einsum("ij,ij->i", u, v) / (
            np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
        worst = min(worst, float(np.degrees(np.arccos(np.clip(cosang, -1, 1))).min()))
    return worst


def validate_face(mesh, tol=1e-12):
    """Assert every FaceMesh invariant; raises MeshError on violation."""
    V = mesh.n_vertices
    unique_edges, all_edges = _edge_set(mesh.triangles)
    euler = V - unique_edges.shape[0] + mesh.triangles.shape[0]
    if euler != 1:
        raise MeshError(f"Euler characteristic {euler} != 1 (disk topology broken)")

    # Boundary edges are the edges adjacent to exactly one triangle; the tagged
    # sigma/gamma lists must partition them.
    edges_sorted, counts = np.unique(all_edges, axis=0, return_counts=True)
    boundary = {tuple(e) for e in edges_sorted[counts == 1]}
    tagged_sigma = {tuple(sorted(e)) for e in mesh.sigma_edges}
    tagged_gamma = {tuple(sorted(e)) for e in mesh.gamma_edges}
    if tagged_sigma & tagged_gamma:
        raise MeshError("an edge carries both sigma and gamma tags")
    if (tagged_sigma | tagged_gamma) != boundary:
        raise MeshError("tagged edges do not partition the mesh boundary")

    ang = min_angle_deg(mesh)
    if ang < 20.0:
        raise MeshError(f"minimum triangle angle {ang:.2f} deg < 20 deg")

    sig = np.unique(mesh.sigma_edges)
    radial = np.linalg.norm(mesh.vertices[sig], axis=1)
    if np.max(np.abs(radial - 1.0)) > tol:
        raise MeshError("sigma vertices not on the unit circle")

    gam = np.unique(mesh.gamma_edges) if mesh.gamma_edges.size else np.array([], dtype=int)
    if gam.size and np.max(np.abs(mesh.vertices[gam, 1])) > tol:
        raise MeshError("gamma vertices not on the junction line y = 0")


@dataclass
class YMesh:
    """Tagged face meshes with an explicit junction identification.

    junction_triples[g] holds the per-face local vertex index of junction node
    g; junction values across faces are independent unknowns (the compatibility
    sum f1 + f2 + f3 = 0 is a constraint, never an identification).  Global DOF
    numbering is per-face contiguous: dof(j, v) = offsets[j] + v.
    """

    faces: list
    junction_triples: np.ndarray  # (nj, n_faces) int, empty for smooth surfaces
    h: float
    surface: str = ""

    offsets: np.ndarray = field(init=False)

    def __post_init__(self):
        counts = [f.n_vertices for f in self.faces]
        self.offsets = np.concatenate([[0], np.cumsum(counts)])

    @property
    def n_dofs(self):
        return int(self.offsets[-1])

    @property
    def n_junction_nodes(self):
        return self.junction_triples.shape[0]

    def dof(self, face_index, vertex):
        return int(self.offsets[face_index] + vertex)


def _junction_order(face):
    """Junction-node local indices of a half-disk face, ordered by x in [-1, 1]."""
    idx = np.flatnonzero((face.vertex_tags == GAMMA) | (face.vertex_tags == CORNER))
    return idx[np.argsort(face.vertices[idx, 0], kind="stable")]


def build_ymesh(spec, h, node_budget=500_000):
    """Mesh every face of the surface with a shared junction discretization."""
    if spec.has_junction:
        n_r = max(2, math.ceil(1.0 / h))
        gamma_nodes = np.linspace(0.0, 1.0, n_r + 1)
        base = mesh_face(spec.faces[0].domain, h, gamma_nodes=gamma_nodes,
                         node_budget=node_budget)
        faces = [base.copy() for _ in spec.faces]
        order = _junction_order(base)
        triples = np.tile(order[:, None], (1, len(faces)))
    else:
        faces = [mesh_face(f.domain, h, node_budget=node_budget) for f in spec.faces]
        triples = np.zeros((0, len(faces)), dtype=np.int64)
    ym = YMesh(faces, triples, faces[0].h, surface=spec.name)
    validate_ymesh(ym)
    return ym


def validate_ymesh(ym, tol=1e-9):
    for f in ym.faces:
        validate_face(f)
    if ym.n_junction_nodes == 0:
        for f in ym.faces:
            if f.gamma_edges.size:
                raise MeshError("gamma-tagged vertices present but junction map empty")
        return
    coords = np.stack([f.vertices[ym.junction_triples[:, j], 0]
                       for j, f in enumerate(ym.faces)], axis=1)
    if np.max(np.abs(coords - coords[:, :1])) > tol:
        raise MeshError("junction parameter coordinates disagree across faces")
    for j, f in enumerate(ym.faces):
        gam = np.flatnonzero((f.vertex_tags == GAMMA) | (f.vertex_tags == CORNER))
        used, counts = np.unique(ym.junction_triples[:, j], return_counts=True)
        if np.any(counts != 1) or set(used) != set(gam):
            raise MeshError("gamma vertices and junction triples out of bijection")


def _refine_face(face, node_budget):
    verts = [tuple(p) for p in face.vertices]
    tags = list(face.vertex_tags)
    sigma_set = {tuple(sorted(e)) for e in face.sigma_edges}
    gamma_set = {tuple(sorted(e)) for e in face.gamma_edges}
    midpoint = {}

    def mid(a, b):
        key = (a, b) if a < b else (b, a)
        if key in midpoint:
            return midpoint[key]
        p = 0.5 * (face.vertices[a] + face.vertices[b])
        if key in sigma_set:
            p = p / np.linalg.norm(p)  # snap new sigma nodes back to the circle
            tag = SIGMA
        elif key in gamma_set:
            tag = GAMMA
        else:
            tag = INTERIOR
        midpoint[key] = len(verts)
        verts.append(tuple(p))
        tags.append(tag)
        return midpoint[key]

    tris = []
    for a, b, c in face.triangles:
        mab, mbc, mca = mid(a, b), mid(b, c), mid(c, a)
        tris.extend([(a, mab, mca), (b, mbc, mab), (c, mca, mbc), (mab, mbc, mca)])

    def split(edges):
        out = []
        for a, b in edges:
            m = midpoint[(a, b) if a < b else (b, a)]
            out.extend([(a, m), (m, b)])
        return np.array(out, dtype=np.int64)

    vertices = np.array(verts)
    if vertices.shape[0] > node_budget:
        raise MeshError(f"node budget exceeded: {vertices.shape[0]} > {node_budget}")
    triangles = np.array(tris, dtype=np.int64)
    _orient_ccw(vertices, triangles)
    return FaceMesh(face.kind, vertices, triangles, split(face.sigma_edges),
                    split(face.gamma_edges), np.array(tags, dtype=np.int8), face.h / 2.0)


def refine(ym, node_budget=500_000):
    """Uniform red refinement: each triangle splits in four, h halves."""
    faces = [_refine_face(f, node_budget) for f in ym.faces]
    if ym.n_junction_nodes:
        triples = np.stack([_junction_order(f) for f in faces], axis=1)
    else:
        triples = np.zeros((0, len(faces)), dtype=np.int64)
    out = YMesh(faces, triples, faces[0].h, surface=ym.surface)
    validate_ymesh(out)
    return out


def ymesh_to_json(ym):
    doc = {
        "surface": ym.surface,
        "h": ym.h,
        "junction_map": ym.junction_triples.tolist(),
        "faces": [
            {
                "kind": f.kind,
                "vertices": f.vertices.tolist(),
                "triangles": f.triangles.tolist(),
                "sigma_edges": f.sigma_edges.tolist(),
                "gamma_edges": f.gamma_edges.tolist(),
                "vertex_tags": f.vertex_tags.tolist(),
                "h": f.h,
            }
            for f in ym.faces
        ],
    }
    return json.dumps(doc)


def ymesh_from_json(text):
    doc = json.loads(text)
    faces = [
        FaceMesh(fd["kind"], np.array(fd["vertices"], dtype=float),
                 np.array(fd["triangles"], dtype=np.int64),
                 np.array(fd["sigma_edges"], dtype=np.int64).reshape(-1, 2),
                 np.array(fd["gamma_edges"], dtype=np.int64).reshape(-1, 2),
                 np.array(fd["vertex_tags"], dtype=np.int8), float(fd["h"]))
        for fd in doc["faces"]
    ]
    triples = np.array(doc["junction_map"], dtype=np.int64).reshape(-1, len(faces))
    return YMesh(faces, triples, float(doc["h"]), surface=doc.get("surface", ""))
