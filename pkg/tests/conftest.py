"""Shared fixtures: canonical surfaces and a few meshes/pencils reused across files."""

import pytest

from ycone import assembly, geometry, mesh


@pytest.fixture(scope="session")
def ycone_spec():
    return geometry.canonical_surface("ycone")


@pytest.fixture(scope="session")
def disk_spec():
    return geometry.canonical_surface("equatorial-disk")


@pytest.fixture(scope="session")
def ycone_mesh(ycone_spec):
    return mesh.build_ymesh(ycone_spec, 0.1)


@pytest.fixture(scope="session")
def disk_mesh(disk_spec):
    return mesh.build_ymesh(disk_spec, 0.1)


def make_pencil(spec, ym):
    forms = assembly.assemble_forms(ym, spec)
    basis = assembly.constraint_basis(ym)
    return forms, basis, assembly.reduce_pencil(forms, basis, h=ym.h, surface=spec.name)


@pytest.fixture(scope="session")
def ycone_setup(ycone_spec, ycone_mesh):
    """(spec, mesh, forms, basis, pencil) for the ycone at h = 0.1."""
    forms, basis, pencil = make_pencil(ycone_spec, ycone_mesh)
    return ycone_spec, ycone_mesh, forms, basis, pencil


@pytest.fixture(scope="session")
def disk_setup(disk_spec, disk_mesh):
    forms, basis, pencil = make_pencil(disk_spec, disk_mesh)
    return disk_spec, disk_mesh, forms, basis, pencil
