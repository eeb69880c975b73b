"""Half-edge connectivity over a validated triangle mesh.

Handles are plain ints: face ``f`` owns half-edges ``3f``, ``3f+1``, ``3f+2``
for its directed edges ``a->b``, ``b->c``, ``c->a``. The structure is
immutable after build; traversals keep their own visited flags so one
connectivity can serve many walks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

from .core import QuantizedMesh


class DirectedEdge(NamedTuple):
    origin: int
    dest: int


class DuplicateHalfEdgeError(ValueError):
    """Raised when two faces claim the same directed edge."""


@dataclass
class HalfEdgeConnectivity:
    n_faces: int
    origin: list[int]
    dest: list[int]
    _by_edge: dict[tuple[int, int], int]

    def face_of(self, h: int) -> int:
        return h // 3

    def next_of(self, h: int) -> int:
        return h - h % 3 + (h + 1) % 3

    def lookup(self, origin: int, dest: int) -> Optional[int]:
        """Handle of the half-edge origin->dest, or None if no face contains it."""
        return self._by_edge.get((origin, dest))

    def lookup_edge(self, e: DirectedEdge) -> Optional[int]:
        return self._by_edge.get((e.origin, e.dest))

    def twin_of(self, h: int) -> Optional[int]:
        return self._by_edge.get((self.dest[h], self.origin[h]))

    def is_boundary(self, h: int) -> bool:
        return self.twin_of(h) is None

    def opposite_vertex(self, h: int) -> int:
        """Third vertex of the face containing h: origin of next(next(h))."""
        return self.origin[self.next_of(self.next_of(h))]

    def half_edges_of_face(self, f: int) -> tuple[int, int, int]:
        return (3 * f, 3 * f + 1, 3 * f + 2)


def build(mesh: QuantizedMesh) -> HalfEdgeConnectivity:
    """Construct connectivity; requires the directed-edge uniqueness the
    validator enforces and raises DuplicateHalfEdgeError otherwise."""
    origin: list[int] = []
    dest: list[int] = []
    by_edge: dict[tuple[int, int], int] = {}
    for fi, f in enumerate(mesh.faces):
        for k, (o, d) in enumerate(((f.a, f.b), (f.b, f.c), (f.c, f.a))):
            h = 3 * fi + k
            if (o, d) in by_edge:
                raise DuplicateHalfEdgeError(
                    f"directed edge ({o},{d}) appears in faces "
                    f"{by_edge[(o, d)] // 3} and {fi}"
                )
            origin.append(o)
            dest.append(d)
            by_edge[(o, d)] = h
    return HalfEdgeConnectivity(len(mesh.faces), origin, dest, by_edge)
