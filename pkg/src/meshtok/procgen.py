"""Procedural test meshes: closed solids, open patches, multi-component
scenes, and a bowtie (vertex-touching) configuration.

Builders return real meshes inside the [-0.5, 0.5] cube with consistent
winding (outward for closed solids); ``fixture_corpus`` quantizes the whole
family at a requested bit depth.
"""

from __future__ import annotations

import math

import numpy as np

from .core import MeshReal, QuantizedMesh
from .preprocess import quantize


def tetrahedron(scale: float = 0.35) -> MeshReal:
    s = scale
    verts = [(s, s, s), (s, -s, -s), (-s, s, -s), (-s, -s, s)]
    faces = [(0, 1, 2), (0, 2, 3), (0, 3, 1), (1, 3, 2)]
    return MeshReal(np.array(verts), np.array(faces))


def octahedron(scale: float = 0.45) -> MeshReal:
    s = scale
    verts = [(s, 0, 0), (-s, 0, 0), (0, s, 0), (0, -s, 0), (0, 0, s), (0, 0, -s)]
    faces = [
        (0, 2, 4), (2, 1, 4), (1, 3, 4), (3, 0, 4),
        (2, 0, 5), (1, 2, 5), (3, 1, 5), (0, 3, 5),
    ]
    return MeshReal(np.array(verts, dtype=float), np.array(faces))


def cube(scale: float = 0.4) -> MeshReal:
    s = scale
    verts = [
        (-s, -s, -s), (s, -s, -s), (-s, s, -s), (s, s, -s),
        (-s, -s, s), (s, -s, s), (-s, s, s), (s, s, s),
    ]
    faces = [
        (0, 2, 3), (0, 3, 1),  # bottom
        (4, 5, 7), (4, 7, 6),  # top
        (0, 1, 5), (0, 5, 4),  # -y
        (2, 6, 7), (2, 7, 3),  # +y
        (0, 4, 6), (0, 6, 2),  # -x
        (1, 3, 7), (1, 7, 5),  # +x
    ]
    return MeshReal(np.array(verts, dtype=float), np.array(faces))


def icosphere(subdivisions: int = 1, radius: float = 0.45) -> MeshReal:
    t = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    points = [np.asarray(v, dtype=float) for v in verts]
    points = [p / np.linalg.norm(p) for p in points]

    for _ in range(subdivisions):
        midpoint: dict[tuple[int, int], int] = {}

        def mid(i: int, j: int) -> int:
            key = (i, j) if i < j else (j, i)
            idx = midpoint.get(key)
            if idx is None:
                m = points[i] + points[j]
                m /= np.linalg.norm(m)
                idx = len(points)
                points.append(m)
                midpoint[key] = idx
            return idx

        next_faces = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            next_faces.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
        faces = next_faces

    return MeshReal(np.array(points) * radius, np.array(faces))


def torus(
    major_segments: int = 16,
    minor_segments: int = 12,
    major_radius: float = 0.33,
    minor_radius: float = 0.14,
) -> MeshReal:
    verts = []
    for i in range(major_segments):
        theta = 2.0 * math.pi * i / major_segments
        for j in range(minor_segments):
            phi = 2.0 * math.pi * j / minor_segments
            rad = major_radius + minor_radius * math.cos(phi)
            verts.append(
                (rad * math.cos(theta), rad * math.sin(theta), minor_radius * math.sin(phi))
            )
    faces = []
    for i in range(major_segments):
        for j in range(minor_segments):
            a = i * minor_segments + j
            b = ((i + 1) % major_segments) * minor_segments + j
            c = ((i + 1) % major_segments) * minor_segments + (j + 1) % minor_segments
            d = i * minor_segments + (j + 1) % minor_segments
            faces.append((a, b, c))
            faces.append((a, c, d))
    return MeshReal(np.array(verts), np.array(faces))


def grid_patch(nx: int = 4, ny: int = 4, width: float = 0.9) -> MeshReal:
    """Open flat patch with boundary on all four sides."""
    xs = np.linspace(-width / 2, width / 2, nx + 1)
    ys = np.linspace(-width / 2, width / 2, ny + 1)
    verts = [(x, y, 0.0) for x in xs for y in ys]
    faces = []
    for i in range(nx):
        for j in range(ny):
            a = i * (ny + 1) + j
            b = (i + 1) * (ny + 1) + j
            c = (i + 1) * (ny + 1) + j + 1
            d = i * (ny + 1) + j + 1
            faces.append((a, b, c))
            faces.append((a, c, d))
    return MeshReal(np.array(verts), np.array(faces))


def strip(n: int = 10) -> MeshReal:
    return grid_patch(n, 1)


def disk_fan(segments: int = 12, radius: float = 0.45) -> MeshReal:
    verts = [(0.0, 0.0, 0.0)]
    for k in range(segments):
        ang = 2.0 * math.pi * k / segments
        verts.append((radius * math.cos(ang), radius * math.sin(ang), 0.0))
    faces = [(0, 1 + k, 1 + (k + 1) % segments) for k in range(segments)]
    return MeshReal(np.array(verts), np.array(faces))


def open_cylinder(segments: int = 16, rows: int = 4, radius: float = 0.35, height: float = 0.8) -> MeshReal:
    verts = []
    for j in range(rows + 1):
        z = -height / 2 + height * j / rows
        for i in range(segments):
            ang = 2.0 * math.pi * i / segments
            verts.append((radius * math.cos(ang), radius * math.sin(ang), z))
    faces = []
    for j in range(rows):
        for i in range(segments):
            a = j * segments + i
            b = j * segments + (i + 1) % segments
            c = (j + 1) * segments + (i + 1) % segments
            d = (j + 1) * segments + i
            faces.append((a, b, c))
            faces.append((a, c, d))
    return MeshReal(np.array(verts), np.array(faces))


def cone(segments: int = 12, radius: float = 0.4, height: float = 0.8) -> MeshReal:
    """Open cone: apex fan over a boundary ring, no base cap."""
    verts = [(0.0, 0.0, height / 2)]
    for k in range(segments):
        ang = 2.0 * math.pi * k / segments
        verts.append((radius * math.cos(ang), radius * math.sin(ang), -height / 2))
    faces = [(1 + k, 1 + (k + 1) % segments, 0) for k in range(segments)]
    return MeshReal(np.array(verts), np.array(faces))


def bowtie() -> MeshReal:
    """Two triangles sharing exactly one vertex: edge-manifold but not
    vertex-manifold, and two components under edge connectivity."""
    verts = [
        (0.0, 0.0, 0.0),
        (0.3, 0.1, 0.0), (0.3, -0.1, 0.2),
        (-0.3, -0.1, 0.0), (-0.3, 0.1, 0.2),
    ]
    faces = [(0, 1, 2), (0, 3, 4)]
    return MeshReal(np.array(verts), np.array(faces))


def translated(mesh: MeshReal, offset) -> MeshReal:
    return MeshReal(mesh.vertices + np.asarray(offset, dtype=float), mesh.faces.copy())


def scaled(mesh: MeshReal, factor: float) -> MeshReal:
    return MeshReal(mesh.vertices * factor, mesh.faces.copy())


def concat(*meshes: MeshReal) -> MeshReal:
    verts = []
    faces = []
    base = 0
    for m in meshes:
        verts.append(m.vertices)
        faces.append(m.faces + base)
        base += len(m.vertices)
    return MeshReal(np.vstack(verts), np.vstack(faces))


def two_component_scene() -> MeshReal:
    lo = translated(scaled(tetrahedron(), 0.55), (-0.25, -0.25, -0.25))
    hi = translated(scaled(tetrahedron(), 0.55), (0.25, 0.25, 0.25))
    return concat(lo, hi)


def three_component_scene() -> MeshReal:
    a = translated(scaled(tetrahedron(), 0.45), (-0.3, -0.3, -0.3))
    b = translated(scaled(octahedron(), 0.3), (0.3, 0.3, 0.3))
    c = translated(scaled(torus(8, 6), 0.35), (0.3, -0.3, 0.0))
    return concat(a, b, c)


def bowtie_plus_tetra() -> MeshReal:
    return concat(
        translated(scaled(bowtie(), 0.8), (0.0, 0.0, 0.25)),
        translated(scaled(tetrahedron(), 0.5), (0.0, 0.0, -0.3)),
    )


def big_torus(target_faces: int = 5500) -> MeshReal:
    """Closed single-component torus with exactly ``target_faces`` faces
    (requires an even target)."""
    minor = 50
    major = target_faces // (2 * minor)
    return torus(major, minor)


def fixture_corpus(bits: int = 7) -> list[tuple[str, QuantizedMesh]]:
    """The standing fixture family, quantized at the requested depth."""
    shapes: list[tuple[str, MeshReal]] = [
        ("tetrahedron", tetrahedron()),
        ("octahedron", octahedron()),
        ("cube", cube()),
        ("icosphere0", icosphere(0)),
        ("icosphere1", icosphere(1)),
        ("icosphere2", icosphere(2)),
        ("icosphere3", icosphere(3)),
        ("torus_8x6", torus(8, 6)),
        ("torus_12x8", torus(12, 8)),
        ("torus_16x12", torus(16, 12)),
        ("torus_25x10", torus(25, 10)),
        ("grid_4x4", grid_patch(4, 4)),
        ("grid_8x5", grid_patch(8, 5)),
        ("strip_10", strip(10)),
        ("disk_12", disk_fan(12)),
        ("cylinder_16x4", open_cylinder(16, 4)),
        ("cone_12", cone(12)),
        ("two_components", two_component_scene()),
        ("three_components", three_component_scene()),
        ("bowtie", bowtie()),
        ("bowtie_plus_tetra", bowtie_plus_tetra()),
    ]
    return [(name, quantize(mesh, bits)) for name, mesh in shapes]
