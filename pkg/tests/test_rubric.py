"""Criterion ids, lenient citation resolution, rubric serialization."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rubriclearn.errors import RubricError
from rubriclearn.rubric import (
    Criterion,
    CriterionRef,
    Rubric,
    deserialize_rubric,
    parse_criterion_id,
    render_criterion_id,
    resolve_cited_ids,
    serialize_rubric,
)


def crit(k=0, points=-1):
    return Criterion(
        text=f"Select this for issue {k}. Example pair 1: Target: \"t\" Comment: \"c\".",
        points=points,
        tags=("tag-a", f"tag-{k}"),
    )


def rubric(round_number=2, n=5):
    return Rubric(round=round_number, criteria=tuple(crit(k) for k in range(n)))


class TestCriterionIds:
    def test_render_basic(self):
        assert render_criterion_id(CriterionRef(round=3, index=2)) == "R3.2"

    def test_render_base_case(self):
        assert render_criterion_id(CriterionRef(round=0, index=0)) == "R0.0"

    def test_negative_rejected(self):
        with pytest.raises(RubricError):
            render_criterion_id(CriterionRef(round=-1, index=0))

    def test_round_trip_oracle(self):
        rng = random.Random(7)
        for _ in range(1000):
            ref = CriterionRef(round=rng.randrange(0, 500), index=rng.randrange(0, 500))
            assert parse_criterion_id(render_criterion_id(ref)) == ref

    @pytest.mark.parametrize("bad", ["", "R1", "R.2", "R1.2.3", "1.2", "Rx.y", "R-1.0"])
    def test_parse_rejects_garbage(self, bad):
        with pytest.raises(RubricError):
            parse_criterion_id(bad)


class TestResolveCitedIds:
    def test_in_range(self):
        valid, dropped = resolve_cited_ids([0, 3], rubric(2, 5))
        assert valid == [CriterionRef(2, 0), CriterionRef(2, 3)]
        assert dropped == []

    def test_out_of_range_dropped(self):
        valid, dropped = resolve_cited_ids([0, 7], rubric(2, 5))
        assert valid == [CriterionRef(2, 0)]
        assert dropped == [7]

    def test_empty(self):
        assert resolve_cited_ids([], rubric()) == ([], [])

    def test_digit_strings_accepted(self):
        valid, dropped = resolve_cited_ids(["1", " 2 "], rubric(0, 3))
        assert [ref.index for ref in valid] == [1, 2]
        assert dropped == []

    def test_qualified_ids_accepted_for_own_round(self):
        valid, dropped = resolve_cited_ids(["R2.1", "R3.0"], rubric(2, 5))
        assert valid == [CriterionRef(2, 1)]
        assert dropped == ["R3.0"]

    def test_duplicates_dropped(self):
        valid, dropped = resolve_cited_ids([1, 1, "1"], rubric(2, 5))
        assert valid == [CriterionRef(2, 1)]
        assert dropped == [1, "1"]

    def test_unparseable_dropped_not_raised(self):
        valid, dropped = resolve_cited_ids([None, "x", 2.5, True, -1], rubric(2, 5))
        assert valid == []
        assert dropped == [None, "x", 2.5, True, -1]


class TestCriterionValidation:
    def test_zero_points_rejected(self):
        with pytest.raises(RubricError, match="points"):
            Criterion(text="Example pair: x", points=0).validate()

    def test_points_out_of_band(self):
        with pytest.raises(RubricError, match="points"):
            Criterion(text="Example pair: x", points=11).validate()

    def test_bool_points_rejected(self):
        with pytest.raises(RubricError, match="integer"):
            Criterion(text="Example pair: x", points=True).validate()

    def test_missing_example_marker_warns_not_rejects(self, caplog):
        criterion = Criterion(text="No marker here at all.", points=-1)
        with caplog.at_level("WARNING"):
            criterion.validate()
        assert "example" in caplog.text.lower()

    def test_empty_text_rejected(self):
        with pytest.raises(RubricError, match="non-empty"):
            Criterion(text="  ", points=-1).validate()


def criteria_strategy():
    texts = st.text(
        alphabet=st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=60
    ).map(lambda t: f"Example pair: {t}")
    points = st.integers(-10, 10).filter(lambda p: p != 0)
    tags = st.lists(st.text(min_size=1, max_size=8), max_size=3).map(tuple)
    return st.builds(Criterion, text=texts, points=points, tags=tags)


class TestSerialization:
    def test_order_preserved(self):
        data = serialize_rubric(rubric(1, 5))
        loaded = deserialize_rubric(data)
        assert [c.text for c in loaded.criteria] == [c.text for c in rubric(1, 5).criteria]

    @given(
        st.lists(criteria_strategy(), min_size=1, max_size=6),
        st.integers(0, 50),
    )
    @settings(max_examples=50, deadline=None)
    def test_round_trip_identity(self, criteria, round_number):
        original = Rubric(round=round_number, criteria=tuple(criteria), run_id="r", parent_round=None)
        assert deserialize_rubric(serialize_rubric(original)) == original

    def test_round_trip_with_provenance(self):
        original = Rubric(round=3, criteria=(crit(),), run_id="run-9", parent_round=2)
        assert deserialize_rubric(serialize_rubric(original)) == original

    def test_zero_points_schema_error_with_path(self):
        bad = b'{"round": 0, "criteria": [{"criterion": "Example pair: x", "points": 0, "tags": [], "reasoning": ""}]}'
        with pytest.raises(RubricError, match=r"criteria\[0\]"):
            deserialize_rubric(bad)

    def test_missing_criteria_rejected(self):
        with pytest.raises(RubricError, match="criteria"):
            deserialize_rubric(b'{"round": 0}')

    def test_non_json_rejected(self):
        with pytest.raises(RubricError, match="JSON"):
            deserialize_rubric(b"not json")

    def test_empty_rubric_rejected(self):
        with pytest.raises(RubricError, match="at least one"):
            Rubric(round=0, criteria=()).validate()

    def test_provenance_round_order_enforced(self):
        with pytest.raises(RubricError, match="precede"):
            Rubric(round=1, criteria=(crit(),), parent_round=1).validate()
