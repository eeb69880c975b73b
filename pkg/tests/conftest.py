from __future__ import annotations

import pytest

from meshtok.core import Face, QuantizedMesh, QuantizedVertex
from meshtok.procgen import fixture_corpus


@pytest.fixture(scope="session")
def corpus7():
    return fixture_corpus(7)


@pytest.fixture(scope="session")
def corpus9():
    return fixture_corpus(9)


@pytest.fixture
def tetra() -> QuantizedMesh:
    """Tetrahedron with vertex 0 at the grid-lowest corner; faces wound outward."""
    verts = [
        QuantizedVertex(10, 10, 10),
        QuantizedVertex(90, 10, 10),
        QuantizedVertex(10, 90, 10),
        QuantizedVertex(10, 10, 90),
    ]
    faces = [Face(0, 2, 1), Face(0, 1, 3), Face(1, 2, 3), Face(2, 0, 3)]
    return QuantizedMesh(verts, faces, 7)


@pytest.fixture
def triangle() -> QuantizedMesh:
    """Single triangle whose start edge is (v0, v1) under the lowest-vertex rule."""
    verts = [
        QuantizedVertex(10, 10, 10),
        QuantizedVertex(90, 20, 10),
        QuantizedVertex(50, 80, 40),
    ]
    return QuantizedMesh(verts, [Face(0, 1, 2)], 7)
