from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from meshtok.core import MeshReal, QuantizedMesh, dequantize_mesh
from meshtok.preprocess import (
    DegenerateExtentError,
    OutOfRangeError,
    PreprocessConfig,
    augment,
    filter_mesh,
    normalize,
    quantize,
    run_preprocess,
)
from meshtok.procgen import grid_patch, tetrahedron, torus, two_component_scene

TRI = np.array([[0, 1, 2]])


class TestNormalize:
    def test_unit_cube_centers_exactly(self):
        mesh = MeshReal(np.array([[0, 0, 0], [1, 1, 1], [1, 0, 0], [0, 1, 1]], float), TRI)
        out = normalize(mesh)
        assert np.allclose(out.vertices.min(axis=0), -0.5)
        assert np.allclose(out.vertices.max(axis=0), 0.5)

    def test_aspect_ratio_preserved(self):
        mesh = MeshReal(np.array([[0, 0, 0], [2, 1, 1], [2, 0, 1]], float), TRI)
        out = normalize(mesh)
        lo, hi = out.vertices.min(axis=0), out.vertices.max(axis=0)
        assert np.allclose(lo, [-0.5, -0.25, -0.25])
        assert np.allclose(hi, [0.5, 0.25, 0.25])

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        mesh = MeshReal(rng.uniform(-3, 9, size=(40, 3)), TRI)
        once = normalize(mesh)
        twice = normalize(once)
        assert np.abs(twice.vertices - once.vertices).max() <= 1e-12

    def test_degenerate_extent_raises(self):
        mesh = MeshReal(np.ones((5, 3)), TRI)
        with pytest.raises(DegenerateExtentError):
            normalize(mesh)
        with pytest.raises(DegenerateExtentError):
            normalize(MeshReal(np.zeros((0, 3)), np.zeros((0, 3), int)))


class TestQuantize:
    def test_boundary_cells(self):
        mesh = MeshReal(
            np.array([[-0.5, 0.0, 0.5], [0.0, -0.5, 0.0], [0.25, 0.25, -0.25]]), TRI
        )
        out = quantize(mesh, 7)
        assert tuple(out.vertices[0]) == (0, 64, 127)

    def test_close_vertices_merge(self):
        mesh = MeshReal(
            np.array([[0.1, 0.1, 0.1], [0.1 + 1e-6, 0.1, 0.1], [0.3, 0.3, 0.3], [0.1, 0.4, 0.1]]),
            np.array([[0, 2, 3], [1, 3, 2]]),
        )
        out = quantize(mesh, 7)
        assert len(out.vertices) == 3

    def test_sliver_face_dropped(self):
        mesh = MeshReal(
            np.array([[0.0, 0.0, 0.0], [1e-5, 1e-5, 0.0], [0.3, 0.3, 0.3]]), TRI
        )
        out = quantize(mesh, 7)
        assert out.faces == []

    def test_duplicate_faces_dropped_either_winding(self):
        verts = np.array([[0.0, 0.0, 0.0], [0.3, 0.0, 0.0], [0.0, 0.3, 0.0]])
        mesh = MeshReal(verts, np.array([[0, 1, 2], [0, 1, 2], [0, 2, 1]]))
        out = quantize(mesh, 7)
        assert len(out.faces) == 1

    def test_out_of_range_raises(self):
        mesh = MeshReal(np.array([[0.0, 0.0, 0.7], [0, 0, 0], [0.1, 0, 0]]), TRI)
        with pytest.raises(OutOfRangeError):
            quantize(mesh, 7)

    def test_quantize_is_idempotent_through_dequantize(self, corpus7):
        for name, mesh in corpus7:
            again = quantize(dequantize_mesh(mesh), mesh.bits)
            assert again == mesh, name

    @given(
        verts=st.lists(
            st.tuples(
                st.floats(-0.5, 0.5, exclude_max=True),
                st.floats(-0.5, 0.5, exclude_max=True),
                st.floats(-0.5, 0.5, exclude_max=True),
            ),
            min_size=3,
            max_size=24,
        ),
        seed=st.integers(0, 2**16),
        bits=st.sampled_from([4, 7, 9]),
    )
    @settings(max_examples=60, deadline=None)
    def test_output_invariants(self, verts, seed, bits):
        rng = np.random.default_rng(seed)
        faces = rng.integers(0, len(verts), size=(16, 3))
        out = quantize(MeshReal(np.array(verts), faces), bits)
        assert len(set(out.vertices)) == len(out.vertices)
        keys = [frozenset(f) for f in out.faces]
        assert len(set(keys)) == len(keys)
        for f in out.faces:
            assert len({f.a, f.b, f.c}) == 3
            assert max(f) < len(out.vertices)
        for v in out.vertices:
            assert all(0 <= q < (1 << bits) for q in v)


class TestFilter:
    def test_tetrahedron_accepted(self):
        decision = filter_mesh(quantize(tetrahedron(), 7))
        assert decision.accept and decision.reasons == []

    def test_face_budget(self):
        mesh = quantize(torus(60, 50), 7)
        assert len(mesh.faces) == 6000
        decision = filter_mesh(mesh, PreprocessConfig(max_faces=5500))
        assert not decision.accept
        assert any(r.startswith("face_count") for r in decision.reasons)

    def test_nonmanifold_rejected(self):
        from meshtok.core import Face, QuantizedVertex

        mesh = QuantizedMesh(
            [QuantizedVertex(i * 10, i * 7 % 30, i * 3 % 30) for i in range(4)],
            [Face(0, 1, 2), Face(0, 1, 3)],
            7,
        )
        decision = filter_mesh(mesh)
        assert not decision.accept and "manifold" in decision.reasons

    def test_two_far_bodies_reject_on_clusters(self):
        decision = filter_mesh(quantize(two_component_scene(), 7))
        assert not decision.accept
        assert any(r.startswith("projection_clusters") for r in decision.reasons)

    def test_flat_plate_rejects_on_projection_area(self):
        decision = filter_mesh(quantize(grid_patch(4, 4), 7))
        assert not decision.accept
        assert any(r.startswith("projection_area") for r in decision.reasons)

    def test_run_preprocess_pipeline(self):
        mesh = MeshReal(tetrahedron().vertices * 40.0 + 3.0, tetrahedron().faces)
        quantized, decision = run_preprocess(mesh)
        assert decision.accept
        assert len(quantized.faces) == 4


class TestAugment:
    def test_deterministic(self):
        mesh = torus(8, 6)
        a = augment(mesh, PreprocessConfig(), seed=123)
        b = augment(mesh, PreprocessConfig(), seed=123)
        assert np.array_equal(a.vertices, b.vertices)
        assert np.array_equal(a.faces, b.faces)

    def test_identity_config_is_identity(self):
        cfg = PreprocessConfig(
            scale_low=1.0, scale_high=1.0, flip_prob=0.0, z_rot_max_degrees=0.0
        )
        mesh = tetrahedron()
        out = augment(mesh, cfg, seed=5)
        assert np.array_equal(out.vertices, mesh.vertices)

    def test_scale_matches_replayed_draw(self):
        cfg = PreprocessConfig(flip_prob=0.0, z_rot_max_degrees=0.0)
        cube = MeshReal(
            np.array(
                [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]], dtype=float
            ),
            TRI,
        )
        seed = 99
        expected = np.random.default_rng(seed).uniform(0.75, 0.95, size=3)
        out = augment(cube, cfg, seed=seed)
        extent = out.vertices.max(axis=0) - out.vertices.min(axis=0)
        assert np.allclose(extent, expected, atol=1e-12)

    def test_fixed_scale_extents(self):
        cfg = PreprocessConfig(
            scale_low=0.8, scale_high=0.8, flip_prob=0.0, z_rot_max_degrees=0.0
        )
        cube = MeshReal(np.array([[0, 0, 0], [1, 1, 1], [1, 0, 1]], float), TRI)
        out = augment(cube, cfg, seed=0)
        extent = out.vertices.max(axis=0) - out.vertices.min(axis=0)
        assert np.allclose(extent, [0.8, 0.8, 0.8])

    def test_flip_is_an_exact_signed_permutation(self):
        cfg = PreprocessConfig(
            scale_low=1.0, scale_high=1.0, flip_prob=1.0, z_rot_max_degrees=0.0
        )
        mesh = torus(8, 6)
        out = augment(mesh, cfg, seed=21)
        assert np.allclose(
            np.sort(np.abs(out.vertices), axis=1),
            np.sort(np.abs(mesh.vertices), axis=1),
            atol=1e-15,
        )
        assert not np.array_equal(out.vertices, mesh.vertices)

    def test_z_rotation_preserves_height(self):
        cfg = PreprocessConfig(scale_low=1.0, scale_high=1.0, flip_prob=0.0)
        mesh = torus(8, 6)
        out = augment(mesh, cfg, seed=4)
        assert np.allclose(out.vertices[:, 2], mesh.vertices[:, 2])
        assert not np.allclose(out.vertices[:, 0], mesh.vertices[:, 0])


class TestConfigValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"bits": 0},
            {"bits": 17},
            {"scale_low": 0.0},
            {"scale_low": 0.9, "scale_high": 0.8},
            {"scale_high": 1.2},
        ],
    )
    def test_bad_configs_rejected(self, kwargs):
        with pytest.raises(ValueError):
            PreprocessConfig(**kwargs)
