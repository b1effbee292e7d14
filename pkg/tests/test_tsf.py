import json

import pytest

from kresil import (
    TransitionSystem,
    TsfFormatError,
    TsfValidationError,
    load,
    save,
    to_dot,
    validate,
)
from kresil.tsf import dumps, from_json_dict, to_json_dict

from .conftest import build_fig1


class TestConstruction:
    def test_out_of_range_edge_rejected(self):
        with pytest.raises(ValueError):
            TransitionSystem(2, 0, [], [(0, 5)], [])

    def test_out_of_range_initial_rejected(self):
        with pytest.raises(ValueError):
            TransitionSystem(2, 7, [], [(0, 0)], [])

    def test_bad_kind(self, fig1):
        with pytest.raises(ValueError):
            fig1.successors(0, "sideways")

    def test_size_is_max_of_states_and_edges(self, fig1):
        assert fig1.size == 8  # 5 controlled + 3 uncontrolled edges > 4 states


class TestValidate:
    def test_fig1_is_clean(self, fig1):
        assert validate(fig1) == []

    def test_controlled_edge_into_error(self):
        s = TransitionSystem(3, 0, [2], [(0, 0), (1, 1), (1, 2)], [])
        rules = [v.rule for v in validate(s)]
        assert rules == ["controlled-into-error"]

    def test_repair_edge_into_error(self):
        s = TransitionSystem(3, 0, [2], [(0, 0), (1, 1)], [], repair=[(1, 2)])
        assert [v.rule for v in validate(s)] == ["repair-into-error"]

    def test_error_state_must_be_sink(self):
        s = TransitionSystem(3, 0, [2], [(0, 0), (1, 1), (2, 0)], [])
        assert "error-sink" in [v.rule for v in validate(s)]

    def test_uncontrolled_from_error_is_sink_violation(self):
        s = TransitionSystem(3, 0, [2], [(0, 0), (1, 1)], [(2, 0)])
        assert "error-sink" in [v.rule for v in validate(s)]

    def test_missing_controlled_successor(self):
        s = TransitionSystem(3, 0, [2], [(0, 0)], [(1, 2)])
        report = validate(s)
        assert [v.rule for v in report] == ["controlled-successor"]
        assert report[0].subject == (1,)

    def test_duplicate_edges_reported(self):
        s = TransitionSystem(2, 0, [], [(0, 0), (0, 0), (1, 1)], [])
        assert "duplicate-edge" in [v.rule for v in validate(s)]

    def test_overlapping_kinds_rejected_by_default(self):
        s = TransitionSystem(2, 0, [], [(0, 1), (0, 0), (1, 1)], [(0, 1)])
        assert "overlapping-kinds" in [v.rule for v in validate(s)]

    def test_overlap_flag_permits(self):
        s = TransitionSystem(
            2, 0, [], [(0, 1), (0, 0), (1, 1)], [(0, 1)], allow_overlap=True
        )
        assert validate(s) == []


class TestSuccessors:
    def test_fig1_controlled(self, fig1):
        # label "3" is index 2: moves stay or step back
        assert fig1.successors(2, "controlled") == {2, 1}

    def test_fig1_uncontrolled(self, fig1):
        assert fig1.successors(2, "uncontrolled") == {3}

    def test_error_state_is_sink(self, fig1):
        for kind in ("controlled", "uncontrolled", "repair"):
            assert fig1.successors(3, kind) == frozenset()

    def test_successors_match_edge_lists(self, fig1):
        for kind in ("controlled", "uncontrolled", "repair"):
            for s in range(fig1.num_states):
                expect = {t for (src, t) in fig1.edges(kind) if src == s}
                assert fig1.successors(s, kind) == expect


class TestRoundTrip:
    def test_save_load_identity(self, fig1, tmp_path):
        path = tmp_path / "x.tsf.json"
        save(fig1, path)
        assert load(path) == fig1

    def test_json_dict_round_trip(self, fig1):
        assert from_json_dict(to_json_dict(fig1)) == fig1

    def test_shipped_golden_is_fig1(self, fig1):
        assert fig1 == build_fig1()

    def test_save_refuses_invalid(self, tmp_path):
        s = TransitionSystem(3, 0, [2], [(0, 0), (1, 2), (1, 1)], [])
        with pytest.raises(TsfValidationError):
            save(s, tmp_path / "bad.json")

    def test_load_rejects_repair_into_error(self, tmp_path):
        doc = {
            "num_states": 3,
            "initial": 0,
            "errors": [2],
            "controlled": [[0, 0], [1, 1]],
            "uncontrolled": [],
            "repair": [[1, 2]],
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(TsfValidationError) as exc:
            load(path)
        assert any(v.rule == "repair-into-error" for v in exc.value.violations)

    def test_load_reports_parse_position(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"num_states": 4,,}')
        with pytest.raises(TsfFormatError) as exc:
            load(path)
        assert "line 1" in str(exc.value)

    def test_missing_field_diagnostic(self):
        with pytest.raises(TsfFormatError) as exc:
            from_json_dict({"num_states": 2, "initial": 0, "controlled": []})
        assert "uncontrolled" in str(exc.value)

    def test_dumps_is_deterministic(self, fig1):
        assert dumps(fig1) == dumps(build_fig1())


class TestDot:
    def test_styles_and_shapes(self, fig1):
        dot = to_dot(fig1)
        assert "style=solid" in dot
        assert "style=dashed" in dot
        assert "shape=doublecircle" in dot  # error state
        assert "__init -> 0" in dot

    def test_repair_edges_dotted(self):
        s = TransitionSystem(2, 0, [], [(0, 0), (1, 1)], [], repair=[(0, 1)])
        assert "style=dotted" in to_dot(s)

    def test_labels_quoted(self, fig1):
        assert 'label="1"' in to_dot(fig1)
