from __future__ import annotations

import json
import os
import threading

import pytest

from meshtok.core import Face, QuantizedMesh, QuantizedVertex
from meshtok.sequencer import EDGE, EOS, SOS, STOP, VERTEX, StepRecord, encode, check_well_formed
from meshtok.generator import (
    ANSWER_EOS,
    ANSWER_STOP,
    DesyncError,
    GeneratorConfig,
    IllegalAnswerError,
    PipePredictor,
    answer_to_json,
    answer_vertex,
    decode,
    fuzz_predictor,
    query_from_json,
    replay_outputs,
    run,
)
from helpers import canonical_faces

V1 = QuantizedVertex(0, 0, 0)
V2 = QuantizedVertex(10, 0, 0)
C = QuantizedVertex(0, 10, 0)
D = QuantizedVertex(5, 5, 9)


def _script(*answers):
    done = list(answers)
    i = [0]

    def predict(query):
        ans = done[i[0]]
        i[0] += 1
        return ans

    return predict


class TestDecode:
    def test_roundtrip_tetrahedron(self, tetra):
        for order in ("dfs", "bfs"):
            out = decode(encode(tetra, order))
            assert canonical_faces(out) == canonical_faces(tetra)

    def test_roundtrip_single_triangle(self, triangle):
        out = decode(encode(triangle))
        assert len(out.faces) == 1
        assert canonical_faces(out) == canonical_faces(triangle)

    def test_opposite_winding_double_face_survives(self):
        # Two faces over the same unordered vertex set, opposite windings:
        # valid under the directed-edge rule, and decode must keep both.
        verts = [V1, V2, C]
        pillow = QuantizedMesh(verts, [Face(0, 1, 2), Face(0, 2, 1)], 7)
        out = decode(encode(pillow))
        assert len(out.faces) == 2
        assert canonical_faces(out) == canonical_faces(pillow)

    def test_tampered_edge_desyncs(self, tetra):
        seq = encode(tetra)
        bad = seq.records[2]
        assert bad.input_kind == EDGE
        seq.records[2] = StepRecord(
            EDGE, (bad.input_edge[1], bad.input_edge[0]), bad.output_kind, bad.output_vertex
        )
        with pytest.raises(DesyncError):
            decode(seq)

    def test_vertices_dedup_by_position(self, tetra):
        out = decode(encode(tetra))
        assert len(set(out.vertices)) == len(out.vertices)


class TestRunCoercions:
    def test_duplicate_face_coerced_to_stop(self):
        script = _script(
            answer_vertex(V1), answer_vertex(V2), answer_vertex(C),
            answer_vertex(V1),  # re-proposes {V1, V2, C}
            ANSWER_STOP, ANSWER_STOP, ANSWER_EOS,
        )
        result = run(script, GeneratorConfig(duplicate_check=True))
        assert result.halt == "eos"
        assert len(result.mesh.faces) == 1
        assert result.transcript.records[3].output_kind == STOP
        check_well_formed(result.transcript)

    def test_duplicate_face_kept_when_check_off(self):
        script = _script(
            answer_vertex(V1), answer_vertex(V2), answer_vertex(C),
            answer_vertex(V1),
            ANSWER_STOP, ANSWER_STOP, ANSWER_STOP, ANSWER_STOP, ANSWER_EOS,
        )
        result = run(script, GeneratorConfig(duplicate_check=False))
        assert len(result.mesh.faces) == 2

    def test_degenerate_vertex_coerced_to_stop(self):
        script = _script(
            answer_vertex(V1), answer_vertex(V2),
            answer_vertex(V1),  # would repeat an edge endpoint
            ANSWER_STOP, ANSWER_EOS,
        )
        result = run(script, GeneratorConfig(duplicate_check=False))
        assert result.halt == "eos"
        assert len(result.mesh.faces) == 0
        assert result.transcript.records[2].output_kind == STOP

    def test_edge_conflict_coerced_when_enabled(self):
        answers = [
            answer_vertex(V1), answer_vertex(V2), answer_vertex(C),
            answer_vertex(D),
            answer_vertex(C),  # face (D, V2, C) would reuse directed edge V2->C
            ANSWER_STOP, ANSWER_STOP, ANSWER_STOP, ANSWER_EOS,
        ]
        result = run(
            _script(*answers),
            GeneratorConfig(duplicate_check=False, edge_conflict_check=True),
        )
        assert len(result.mesh.faces) == 2
        assert result.transcript.records[4].output_kind == STOP

    def test_edge_conflict_allowed_when_disabled(self):
        answers = [
            answer_vertex(V1), answer_vertex(V2), answer_vertex(C),
            answer_vertex(D), answer_vertex(C),
            ANSWER_STOP, ANSWER_STOP, ANSWER_STOP, ANSWER_STOP, ANSWER_STOP,
            ANSWER_EOS,
        ]
        result = run(
            _script(*answers),
            GeneratorConfig(duplicate_check=False, edge_conflict_check=False),
        )
        assert len(result.mesh.faces) == 3


class TestRunHalts:
    def test_eos_to_first_query_yields_empty_mesh(self):
        result = run(_script(ANSWER_EOS))
        assert result.halt == "eos"
        assert result.mesh.faces == [] and result.mesh.vertices == []
        assert result.transcript.records == [StepRecord(SOS, None, EOS, None)]

    def test_component_without_faces_still_records_seen_vertices(self):
        script = _script(
            answer_vertex(V1), answer_vertex(V2), ANSWER_STOP, ANSWER_STOP, ANSWER_EOS
        )
        result = run(script)
        assert result.mesh.faces == []
        assert result.mesh.vertices == [V1, V2]

    def test_budget_halt_marks_truncated(self):
        counter = [0]

        def greedy(query):
            if query.kind in (SOS, "sos2"):
                counter[0] += 1
                return answer_vertex(QuantizedVertex(counter[0] % 128, 0, 1))
            counter[0] += 1
            return answer_vertex(
                QuantizedVertex(counter[0] % 128, (counter[0] // 128) % 128, 2)
            )

        result = run(greedy, GeneratorConfig(max_steps=10))
        assert result.halt == "budget"
        assert result.transcript.truncated
        assert len(result.transcript.records) == 10

    def test_illegal_answers_abort(self):
        with pytest.raises(IllegalAnswerError):
            run(_script(ANSWER_STOP))  # STOP answering SOS
        with pytest.raises(IllegalAnswerError):
            run(_script(answer_vertex(V1), ANSWER_EOS))  # EOS answering SOS2
        with pytest.raises(IllegalAnswerError):
            run(_script(answer_vertex(V1), answer_vertex(V2), ANSWER_EOS))


class TestReplayOutputs:
    def test_rebuilds_the_encoded_sequence(self, tetra):
        seq = encode(tetra)
        answers = [
            answer_vertex(r.output_vertex) if r.output_kind == VERTEX
            else (ANSWER_STOP if r.output_kind == STOP else ANSWER_EOS)
            for r in seq.records
        ]
        rebuilt = replay_outputs(answers, seq.bits, seq.order).transcript
        assert rebuilt == seq

    def test_trailing_outputs_rejected(self):
        with pytest.raises(DesyncError):
            replay_outputs([ANSWER_EOS, ANSWER_EOS], 7)

    def test_missing_eos_rejected(self):
        with pytest.raises(DesyncError):
            replay_outputs([answer_vertex(V1), answer_vertex(V2), ANSWER_STOP], 7)

    def test_degenerate_record_rejected_when_strict(self):
        answers = [
            answer_vertex(V1), answer_vertex(V2), answer_vertex(V1),
            ANSWER_STOP, ANSWER_EOS,
        ]
        with pytest.raises(DesyncError):
            replay_outputs(answers, 7)
        result = replay_outputs(answers, 7, coerce_degenerate=True)
        assert len(result.mesh.faces) == 0


class TestFuzzPredictor:
    def test_deterministic_per_seed(self):
        cfg = GeneratorConfig(max_steps=10000)
        r1 = run(fuzz_predictor(11), cfg)
        r2 = run(fuzz_predictor(11), cfg)
        assert r1.transcript == r2.transcript
        assert r1.mesh == r2.mesh

    @pytest.mark.parametrize("seed", range(10))
    def test_runs_are_legal_and_halt(self, seed):
        result = run(fuzz_predictor(seed), GeneratorConfig(max_steps=10000))
        assert result.halt in ("eos", "budget")
        if result.halt == "eos":
            check_well_formed(result.transcript)
        for f in result.mesh.faces:
            positions = {
                result.mesh.vertices[f.a],
                result.mesh.vertices[f.b],
                result.mesh.vertices[f.c],
            }
            assert len(positions) == 3

    def test_no_duplicate_faces_with_check_on(self):
        for seed in range(10):
            result = run(
                fuzz_predictor(seed, bits=3),
                GeneratorConfig(bits=3, duplicate_check=True, max_steps=10000),
            )
            keys = [frozenset(f) for f in result.mesh.faces]
            assert len(keys) == len(set(keys))


class TestPipeProtocol:
    def test_external_predictor_over_pipe_matches_direct_run(self):
        seed = 7
        cfg = GeneratorConfig(max_steps=500)
        direct = run(fuzz_predictor(seed), cfg)

        req_r, req_w = os.pipe()
        resp_r, resp_w = os.pipe()

        def serve():
            inner = fuzz_predictor(seed)
            with os.fdopen(req_r, "r") as rf, os.fdopen(resp_w, "w") as wf:
                for line in rf:
                    answer = inner(query_from_json(line))
                    wf.write(answer_to_json(answer) + "\n")
                    wf.flush()

        server = threading.Thread(target=serve)
        server.start()
        try:
            with os.fdopen(req_w, "w") as requests, os.fdopen(resp_r, "r") as responses:
                piped = run(PipePredictor(requests, responses), cfg)
        finally:
            server.join(timeout=10)
        assert piped.transcript == direct.transcript
        assert piped.mesh == direct.mesh

    def test_wire_forms_roundtrip(self):
        answers = [answer_vertex(QuantizedVertex(1, 2, 3)), ANSWER_STOP, ANSWER_EOS]
        lines = [answer_to_json(a) for a in answers]
        assert lines[0] == '{"op":"v","z":3,"y":2,"x":1}'
        assert lines[1] == '{"op":"stop"}'
        assert lines[2] == '{"op":"eos"}'

    def test_query_json_shapes(self, triangle):
        seen = []

        def spy(query):
            seen.append(query_from_json(json_line(query)))
            return replay[len(seen) - 1]

        from meshtok.generator import query_to_json as json_line

        seq = encode(triangle)
        replay = [
            answer_vertex(r.output_vertex) if r.output_kind == VERTEX
            else (ANSWER_STOP if r.output_kind == STOP else ANSWER_EOS)
            for r in seq.records
        ]
        run(spy, GeneratorConfig(max_steps=len(replay)))
        assert [q.kind for q in seen] == [r.input_kind for r in seq.records]
        assert seen[2].edge == seq.records[2].input_edge
