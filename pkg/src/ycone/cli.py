"""Batch command-line front end.

Subcommands: index, steklov, dtn, verify, converge, null-basis, fields.
Each run writes a JSON report (schema_version 1, with a config echo so every
number is reproducible from the report alone), CSV tables where the output is
naturally tabular, and a rendered figure next to the data files.

Exit codes: 0 all requested checks passed, 2 a check failed, 1 usage or
input/output error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from ycone import assembly, geometry, hopf, mesh as ymesh_mod, plots, spectra

SCHEMA_VERSION = 1
SURFACES = ("ycone", "equatorial-disk")


class UsageError(ValueError):
    """Invalid configuration (maps to exit code 1)."""


@dataclass
class RunConfig:
    command: str
    surface: str = "ycone"
    h: float = 0.1
    levels: list = field(default_factory=lambda: [0.1, 0.05, 0.025])
    k: int = 12
    c0: float = 5.0
    modes: int = 6
    gamma: str = "neumann"
    route: str = "both"
    n: int = 64
    rtol: float = 0.01
    input: str | None = None
    out_dir: str = "."
    seed: int = 0
    figures: bool = True
    finite_differences: bool = False

    def validate(self):
        for name in ("h", "c0", "rtol"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive")
        for name in ("k", "modes", "n"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive")
        if any(not lv > 0 for lv in self.levels):
            raise UsageError("all refinement levels must be positive")
        if self.surface not in SURFACES:
            raise UsageError(f"unknown surface {self.surface!r} (choose from {SURFACES})")
        if self.input is not None and not os.path.exists(self.input):
            raise UsageError(f"input file {self.input!r} does not exist")
        if not os.path.isdir(self.out_dir):
            raise UsageError(f"output directory {self.out_dir!r} does not exist")


def _pipeline(surface, h):
    spec = geometry.canonical_surface(surface)
    mesh = ymesh_mod.build_ymesh(spec, h)
    forms = assembly.assemble_forms(mesh, spec)
    basis = assembly.constraint_basis(mesh)
    pencil = assembly.reduce_pencil(forms, basis, h=mesh.h, surface=surface)
    return spec, mesh, forms, basis, pencil


def _write_json(cfg, path, payload):
    doc = {"schema_version": SCHEMA_VERSION, "config": asdict(cfg)}
    doc.update(payload)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def _out(cfg, name):
    return os.path.join(cfg.out_dir, name)


def _mesh_stats(mesh):
    return {
        "h": float(mesh.h),
        "n_dofs": int(mesh.n_dofs),
        "n_junction_nodes": int(mesh.n_junction_nodes),
        "vertices_per_face": [int(f.n_vertices) for f in mesh.faces],
    }


def cmd_index(cfg):
    spec, mesh, forms, basis, pencil = _pipeline(cfg.surface, cfg.h)
    payload = {"mesh": _mesh_stats(mesh)}
    checks = []
    report = None
    if cfg.route in ("inertia", "both"):
        eigs = spectra.low_spectrum(pencil, min(cfg.k, pencil.m))
        report = spectra.classify(eigs.values, mesh.h, cfg.c0,
                                  surface=cfg.surface, route="bulk", pencil=pencil)
        payload["bulk"] = report.to_dict()
        checks.append(("bulk counts consistent with eigenvalue list",
                       report.counts_consistent))
    if cfg.route in ("dtn", "both") and spec.has_junction:
        spectrum, index, nullity = spectra.dtn_index(mesh, spec, c0=cfg.c0)
        payload["dtn"] = {
            "delta_head": [float(x) for x in spectrum.eigenvalues[:cfg.k]],
            "index": index, "nullity": nullity,
        }
        if report is not None:
            checks.append(("bulk and DtN routes agree on (index, nullity)",
                           (report.index, report.nullity) == (index, nullity)))
    payload["checks"] = [{"name": n, "pass": bool(p)} for n, p in checks]
    _write_json(cfg, _out(cfg, f"index_{cfg.surface}_h{cfg.h}.json"), payload)
    if cfg.figures and report is not None:
        plots.plot_spectrum(report.eigenvalues, report.zero_tolerance,
                            _out(cfg, f"index_{cfg.surface}_h{cfg.h}.png"),
                            title=f"{cfg.surface}, h = {mesh.h:.4g}")
    return all(p for _, p in checks)


def cmd_steklov(cfg):
    fm = ymesh_mod.mesh_face(geometry.FaceDomain("half-disk"), cfg.h)
    spectrum = spectra.steklov_face(fm, cfg.gamma)
    start = 0 if cfg.gamma == "neumann" else 1
    analytic = np.arange(start, start + cfg.modes, dtype=float)
    computed = spectrum.eigenvalues[:cfg.modes]
    rows, ok = [], True
    for n, (a, c) in enumerate(zip(analytic, computed)):
        err = abs(c - a) if a == 0.0 else abs(c - a) / a
        good = err <= cfg.rtol
        ok &= good
        rows.append([n, repr(float(c)), repr(float(a)), repr(float(err)), int(good)])
    base = f"steklov_{cfg.gamma}_h{cfg.h}"
    _write_csv(_out(cfg, base + ".csv"),
               ["mode", "computed", "analytic", "error", "pass"], rows)
    _write_json(cfg, _out(cfg, base + ".json"), {
        "mesh": {"h": float(fm.h), "n_vertices": int(fm.n_vertices)},
        "computed": [float(x) for x in computed],
        "analytic": [float(x) for x in analytic],
        "rtol": cfg.rtol,
        "pass": bool(ok),
    })
    if cfg.figures:
        plots.plot_steklov(computed, analytic, _out(cfg, base + ".png"),
                           title=f"half-disk Steklov, gamma = {cfg.gamma}")
    return ok


def cmd_dtn(cfg):
    spec, mesh, forms, basis, pencil = _pipeline(cfg.surface, cfg.h)
    if not spec.has_junction:
        raise UsageError("the dtn command needs a surface with a junction")
    spectrum, index, nullity = spectra.dtn_index(mesh, spec, c0=cfg.c0)
    _write_json(cfg, _out(cfg, f"dtn_{cfg.surface}_h{cfg.h}.json"), {
        "mesh": _mesh_stats(mesh),
        "delta_head": [float(x) for x in spectrum.eigenvalues[:cfg.k]],
        "index": index,
        "nullity": nullity,
        "zero_tolerance": spectra.default_zero_tolerance(mesh.h, cfg.c0),
    })
    if cfg.figures:
        plots.plot_spectrum(spectrum.eigenvalues[:cfg.k] - 1.0,
                            spectra.default_zero_tolerance(mesh.h, cfg.c0),
                            _out(cfg, f"dtn_{cfg.surface}_h{cfg.h}.png"),
                            title=f"{cfg.surface} DtN spectrum minus threshold")
    return True


def cmd_verify(cfg):
    if cfg.input is not None:
        grids = hopf.sample_immersion(cfg.input, cfg.n, cfg.n)
        label = os.path.basename(cfg.input)
    else:
        grids = hopf.sample_immersion(geometry.canonical_surface(cfg.surface),
                                      cfg.n, cfg.n)
        label = cfg.surface
    use_exact = None if not cfg.finite_differences else False
    derivs = hopf.derivative_grids(grids, use_exact=use_exact)
    report = hopf.certificate_residuals(derivs)
    base = f"verify_{label}_n{cfg.n}" + ("_fd" if cfg.finite_differences else "")
    _write_json(cfg, _out(cfg, base + ".json"), {"report": report.to_dict()})
    if cfg.figures and report.hopf is not None:
        plots.plot_hopf(report.hopf, grids.r, grids.theta, _out(cfg, base + ".png"),
                        title=f"certificate field, {label}")
    return report.passed


def cmd_converge(cfg):
    levels = sorted(cfg.levels, reverse=True)
    per_level, counts = [], []
    for h in levels:
        spec, mesh, forms, basis, pencil = _pipeline(cfg.surface, h)
        eigs = spectra.low_spectrum(pencil, min(cfg.k, pencil.m))
        rep = spectra.classify(eigs.values, mesh.h, cfg.c0,
                               surface=cfg.surface, route="bulk", pencil=pencil)
        cluster = [float(abs(x)) for x in
                   rep.eigenvalues[rep.index:rep.index + rep.nullity]]
        per_level.append({"h": float(mesh.h), "index": rep.index,
                          "nullity": rep.nullity, "zero_cluster": cluster,
                          "eigenvalues": [float(x) for x in rep.eigenvalues]})
        counts.append((rep.index, rep.nullity))
    n_common = min(len(lv["zero_cluster"]) for lv in per_level)
    hs = np.array([lv["h"] for lv in per_level])
    slopes = []
    for i in range(n_common):
        mags = np.array([lv["zero_cluster"][i] for lv in per_level])
        if np.all(mags > 1e-13):
            slopes.append(float(np.polyfit(np.log(hs), np.log(mags), 1)[0]))
        else:
            slopes.append(float("nan"))
    stable = len(set(counts)) == 1
    _write_json(cfg, _out(cfg, f"converge_{cfg.surface}.json"), {
        "levels": per_level,
        "zero_cluster_slopes": slopes,
        "counts_stable": bool(stable),
    })
    _write_csv(_out(cfg, f"converge_{cfg.surface}.csv"),
               ["h", "index", "nullity"] + [f"zero_{i}" for i in range(n_common)],
               [[repr(lv["h"]), lv["index"], lv["nullity"]]
                + [repr(x) for x in lv["zero_cluster"][:n_common]]
                for lv in per_level])
    if cfg.figures and n_common:
        series = {f"|lambda_{i}|": [lv["zero_cluster"][i] for lv in per_level]
                  for i in range(n_common)}
        plots.plot_convergence(hs, series, _out(cfg, f"converge_{cfg.surface}.png"),
                               title=f"{cfg.surface} zero-cluster decay")
    return stable


def cmd_null_basis(cfg):
    spec, mesh, forms, basis, pencil = _pipeline(cfg.surface, cfg.h)
    nb = spectra.analytic_null_basis(mesh)
    residuals = spectra.null_projection_residuals(nb, pencil)
    tol = spectra.default_zero_tolerance(mesh.h, cfg.c0)
    rows = [[name, repr(float(r)), repr(tol), int(r <= tol)]
            for name, r in zip(nb.names, residuals)]
    base = f"null_basis_{cfg.surface}_h{cfg.h}"
    _write_csv(_out(cfg, base + ".csv"), ["vector", "residual", "tol", "pass"], rows)
    _write_json(cfg, _out(cfg, base + ".json"), {
        "mesh": _mesh_stats(mesh),
        "residuals": dict(zip(nb.names, map(float, residuals))),
        "tol": tol,
    })
    return all(r <= tol for r in residuals)


def cmd_fields(cfg):
    spec, mesh, forms, basis, pencil = _pipeline(cfg.surface, cfg.h)
    axes = {"e1": (1.0, 0.0, 0.0), "e2": (0.0, 1.0, 0.0), "e3": (0.0, 0.0, 1.0)}
    out = {}
    for name, E in axes.items():
        res = spectra.coordinate_field_test(mesh, spec, E, forms=forms)
        out[name] = {"q_value": float(res.q_value), "tangential": bool(res.tangential)}
    _write_json(cfg, _out(cfg, f"fields_{cfg.surface}_h{cfg.h}.json"),
                {"mesh": _mesh_stats(mesh), "fields": out})
    _write_csv(_out(cfg, f"fields_{cfg.surface}_h{cfg.h}.csv"),
               ["axis", "q_value", "tangential"],
               [[k, repr(v["q_value"]), int(v["tangential"])] for k, v in out.items()])
    return True


_COMMANDS = {
    "index": cmd_index,
    "steklov": cmd_steklov,
    "dtn": cmd_dtn,
    "verify": cmd_verify,
    "converge": cmd_converge,
    "null-basis": cmd_null_basis,
    "fields": cmd_fields,
}


def build_parser():
    p = argparse.ArgumentParser(prog="ycone", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--out-dir", default=os.environ.get("YCONE_OUT_DIR", "."),
                   help="report output directory (default: $YCONE_OUT_DIR or .)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed echoed in reports")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        sp = sub.add_parser(name, **kw)
        return sp

    for name, help_ in (("index", "index/nullity of a canonical surface"),
                        ("dtn", "boundary (DtN) route spectrum and counts"),
                        ("null-basis", "projection residuals of the analytic null vectors"),
                        ("fields", "index form on coordinate normal fields")):
        sp = add(name, help=help_)
        sp.add_argument("--surface", default="ycone", choices=SURFACES)
        sp.add_argument("--h", type=float, default=0.1)
        sp.add_argument("--k", type=int, default=12)
        sp.add_argument("--c0", type=float, default=5.0)
        if name == "index":
            sp.add_argument("--route", default="both",
                            choices=("inertia", "dtn", "both"))

    sp = add("steklov", help="per-face half-disk Steklov oracle table")
    sp.add_argument("--gamma", default="neumann", choices=("neumann", "dirichlet"))
    sp.add_argument("--h", type=float, default=0.05)
    sp.add_argument("--modes", type=int, default=6)
    sp.add_argument("--rtol", type=float, default=0.01)

    sp = add("verify", help="minimality certificate for a surface or immersion file")
    sp.add_argument("--surface", default="ycone", choices=SURFACES)
    sp.add_argument("--input", default=None, help="JSON immersion file")
    sp.add_argument("--n", type=int, default=64, help="grid resolution (n_r = n_theta)")
    sp.add_argument("--fd", action="store_true", dest="finite_differences",
                    help="force finite-difference derivatives")

    sp = add("converge", help="refinement sweep with fitted slopes")
    sp.add_argument("--surface", default="ycone", choices=SURFACES)
    sp.add_argument("--levels", default="0.1,0.05,0.025",
                    help="comma-separated mesh sizes")
    sp.add_argument("--k", type=int, default=12)
    sp.add_argument("--c0", type=float, default=5.0)
    return p


def config_from_args(args):
    cfg = RunConfig(command=args.command, out_dir=args.out_dir, seed=args.seed,
                    figures=not args.no_figures)
    for name in ("surface", "h", "k", "c0", "modes", "gamma", "route", "n",
                 "rtol", "input", "finite_differences"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    if hasattr(args, "levels"):
        try:
            cfg.levels = [float(x) for x in str(args.levels).split(",") if x]
        except ValueError as exc:
            raise UsageError(f"bad --levels value: {exc}") from exc
    cfg.validate()
    return cfg


def execute(cfg):
    """Run one validated config; returns the process exit code."""
    try:
        ok = _COMMANDS[cfg.command](cfg)
    except (UsageError, OSError, hopf.ImmersionInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (spectra.SolverError, spectra.UnsupportedRouteError,
            ymesh_mod.MeshError, assembly.AssemblyError,
            geometry.GeometryError, hopf.DegenerateSampleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not ok:
        print("one or more checks failed; see report", file=sys.stderr)
        return 2
    return 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        cfg = config_from_args(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return execute(cfg)


if __name__ == "__main__":
    sys.exit(main())
