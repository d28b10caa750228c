import numpy as np
import pytest

from scoregap import (
    CsvParseError,
    EmptyGroupError,
    GroupPredicate,
    GroupingSpec,
    IngestError,
    MissingColumnError,
    UnmappedCategoryError,
    fit_ground_truth,
    load_csv,
    split_groups,
    split_masks,
    standardize_columns,
)
from scoregap.ingest import normalize_manifest
from scoregap.linalg import min_norm_least_squares


def write_csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


NUMERIC_CSV = "age,income,score\n30,50000,1.5\n25,42000,-0.5\n41,61000,2.0\n"

MIXED_CSV = (
    "age,grade,label\n"
    "30,good,1\n"
    "25,bad,0\n"
    "41,great,1\n"
    "33,good,0\n"
)


class TestLoadCsv:
    def test_numeric_passthrough(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, NUMERIC_CSV))
        assert ds.column_names == ("age", "income", "score")
        assert ds.size == 3
        np.testing.assert_array_equal(ds.column("age"), [30, 25, 41])
        np.testing.assert_array_equal(ds.column("score"), [1.5, -0.5, 2.0])
        assert ds.n_dropped == 0

    def test_ordinal_list_encoding(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, MIXED_CSV),
                      manifest={"grade": ["bad", "good", "great"]})
        np.testing.assert_array_equal(ds.column("grade"), [2, 1, 3, 2])

    def test_explicit_mapping(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, MIXED_CSV),
                      manifest={"grade": {"bad": -1, "good": 0, "great": 5}})
        np.testing.assert_array_equal(ds.column("grade"), [0, -1, 5, 0])

    def test_unmapped_category(self, tmp_path):
        with pytest.raises(UnmappedCategoryError) as info:
            load_csv(write_csv(tmp_path, MIXED_CSV), manifest={"grade": ["bad", "good"]})
        assert info.value.column == "grade"
        assert info.value.value == "great"

    def test_manifest_names_absent_column(self, tmp_path):
        with pytest.raises(MissingColumnError):
            load_csv(write_csv(tmp_path, NUMERIC_CSV), manifest={"nope": ["a"]})

    def test_non_numeric_cell_reports_position(self, tmp_path):
        text = "a,b\n1,2\n3,oops\n"
        with pytest.raises(CsvParseError) as info:
            load_csv(write_csv(tmp_path, text))
        assert info.value.row == 3  # header is file line 1
        assert info.value.column == "b"

    def test_ragged_row(self, tmp_path):
        text = "a,b\n1,2\n3\n"
        with pytest.raises(CsvParseError) as info:
            load_csv(write_csv(tmp_path, text))
        assert info.value.row == 3

    def test_missing_tokens_drop_rows(self, tmp_path):
        text = "a,b\n1,2\n?,3\n4,NA\n5,6\n7,\n8,nan\n"
        ds = load_csv(write_csv(tmp_path, text))
        assert ds.size == 2
        assert ds.n_dropped == 4
        np.testing.assert_array_equal(ds.column("a"), [1, 5])

    def test_all_rows_missing(self, tmp_path):
        with pytest.raises(IngestError):
            load_csv(write_csv(tmp_path, "a,b\n?,1\n2,NA\n"))

    def test_empty_file(self, tmp_path):
        with pytest.raises(IngestError):
            load_csv(write_csv(tmp_path, ""))

    def test_duplicate_header(self, tmp_path):
        with pytest.raises(IngestError):
            load_csv(write_csv(tmp_path, "a,a\n1,2\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(IngestError):
            load_csv(str(tmp_path / "absent.csv"))

    def test_encoding_is_idempotent(self, tmp_path):
        # a file whose cells already hold the encoded values loads unchanged
        manifest = {"grade": ["bad", "good", "great"]}
        ds = load_csv(write_csv(tmp_path, MIXED_CSV), manifest=manifest)
        encoded_text = "age,grade,label\n" + "\n".join(
            ",".join(f"{v:g}" for v in row) for row in ds.rows
        ) + "\n"
        again = load_csv(write_csv(tmp_path, encoded_text, name="again.csv"),
                         manifest=manifest)
        np.testing.assert_array_equal(again.rows, ds.rows)

    def test_decode_column_round_trip(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, MIXED_CSV),
                      manifest={"grade": ["bad", "good", "great"]})
        assert ds.decode_column("grade") == ("good", "bad", "great", "good")
        with pytest.raises(IngestError):
            ds.decode_column("age")

    def test_deterministic_load(self, tmp_path):
        path = write_csv(tmp_path, MIXED_CSV)
        manifest = {"grade": ["bad", "good", "great"]}
        a = load_csv(path, manifest=manifest)
        b = load_csv(path, manifest=manifest)
        np.testing.assert_array_equal(a.rows, b.rows)
        assert a.column_names == b.column_names

    def test_rows_are_read_only(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, NUMERIC_CSV))
        with pytest.raises(ValueError):
            ds.rows[0, 0] = 99.0


class TestManifest:
    def test_list_maps_from_one(self):
        norm = normalize_manifest({"c": ["x", "y", "z"]})
        assert norm == {"c": {"x": 1.0, "y": 2.0, "z": 3.0}}

    def test_passthrough_and_none(self):
        norm = normalize_manifest({"a": "passthrough", "b": None})
        assert norm == {"a": None, "b": None}

    def test_bad_spec(self):
        with pytest.raises(IngestError):
            normalize_manifest({"a": 7})


class TestDatasetAccess:
    def test_feature_matrix_drops_named(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, NUMERIC_CSV))
        feats = ds.feature_matrix(drop=["income"])
        assert ds.feature_names(drop=["income"]) == ("age", "score")
        np.testing.assert_array_equal(feats[:, 0], ds.column("age"))
        np.testing.assert_array_equal(feats[:, 1], ds.column("score"))

    def test_drop_unknown_column(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, NUMERIC_CSV))
        with pytest.raises(MissingColumnError):
            ds.feature_matrix(drop=["absent"])

    def test_column_unknown(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, NUMERIC_CSV))
        with pytest.raises(MissingColumnError):
            ds.column("absent")

    def test_with_columns_replaces_values(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, NUMERIC_CSV))
        new_age = np.array([[1.0], [2.0], [3.0]])
        ds2 = ds.with_columns(["age"], new_age)
        np.testing.assert_array_equal(ds2.column("age"), [1, 2, 3])
        np.testing.assert_array_equal(ds.column("age"), [30, 25, 41])
        np.testing.assert_array_equal(ds2.column("income"), ds.column("income"))


class TestPredicates:
    def test_numeric_comparators(self):
        le = GroupPredicate("age", "le", 25)
        assert le.matches("25") and le.matches("24.5") and not le.matches("26")
        gt = GroupPredicate("age", "gt", 25)
        assert gt.matches("26") and not gt.matches("25")
        lt = GroupPredicate("age", "lt", 25)
        ge = GroupPredicate("age", "ge", 25)
        assert not lt.matches("25") and ge.matches("25")

    def test_text_equality_tolerates_numeric_forms(self):
        eq = GroupPredicate("sex", "eq", 1)
        assert eq.matches("1") and eq.matches("1.0") and not eq.matches("2")
        ne = GroupPredicate("sex", "ne", "1")
        assert not ne.matches("1.0") and ne.matches("2")

    def test_in_comparator(self):
        member = GroupPredicate("edu", "in", [1, 2])
        assert member.matches("1") and member.matches("2.0") and not member.matches("3")
        words = GroupPredicate("country", "in", ["US", "UK"])
        assert words.matches("US") and not words.matches("DE")

    def test_in_requires_a_list(self):
        with pytest.raises(IngestError):
            GroupPredicate("edu", "in", 3).matches("3")

    def test_numeric_comparator_on_text(self):
        with pytest.raises(IngestError):
            GroupPredicate("grade", "le", 2).matches("good")

    def test_unknown_comparator(self):
        with pytest.raises(IngestError):
            GroupPredicate("a", "between", 1)


class TestSplit:
    def test_threshold_with_complement(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, NUMERIC_CSV))
        spec = GroupingSpec(name="age", group1=GroupPredicate("age", "le", 25))
        result = split_groups(ds, spec)
        assert result.sizes == (1, 2)
        assert result.n_excluded == 0
        np.testing.assert_array_equal(result.mask1, [False, True, False])
        np.testing.assert_array_equal(result.group1, ds.rows[1:2])

    def test_two_predicates_can_exclude(self, tmp_path):
        text = "edu,x\n1,10\n2,20\n3,30\n4,40\n"
        ds = load_csv(write_csv(tmp_path, text))
        spec = GroupingSpec(
            name="edu",
            group1=GroupPredicate("edu", "in", [1, 2]),
            group2=GroupPredicate("edu", "eq", 3),
        )
        result = split_groups(ds, spec)
        assert result.sizes == (2, 1)
        assert result.n_excluded == 1
        assert result.sizes[0] + result.sizes[1] + result.n_excluded == ds.size

    def test_overlapping_predicates(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, NUMERIC_CSV))
        spec = GroupingSpec(
            name="bad",
            group1=GroupPredicate("age", "le", 30),
            group2=GroupPredicate("age", "ge", 30),
        )
        with pytest.raises(IngestError):
            split_masks(ds, spec)

    def test_empty_group(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, NUMERIC_CSV))
        spec = GroupingSpec(name="none", group1=GroupPredicate("age", "gt", 100))
        with pytest.raises(EmptyGroupError):
            split_groups(ds, spec)

    def test_split_respects_drop(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, NUMERIC_CSV))
        spec = GroupingSpec(name="age", group1=GroupPredicate("age", "le", 30))
        result = split_groups(ds, spec, drop=["score"])
        assert result.group1.shape[1] == 2

    def test_grouping_on_text_column(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, MIXED_CSV),
                      manifest={"grade": ["bad", "good", "great"]})
        spec = GroupingSpec(name="grade", group1=GroupPredicate("grade", "eq", "good"))
        result = split_groups(ds, spec)
        assert result.sizes == (2, 2)


class TestGroundTruth:
    def test_exact_recovery(self):
        rng = np.random.default_rng(20)
        x = rng.standard_normal((40, 6))
        w = rng.standard_normal(6)
        fitted = fit_ground_truth(x, x @ w)
        np.testing.assert_allclose(fitted, w, atol=1e-9)

    def test_rank_deficient_matches_pseudoinverse(self):
        rng = np.random.default_rng(21)
        basis = rng.standard_normal((3, 6))
        x = rng.standard_normal((40, 3)) @ basis
        y = rng.standard_normal(40)
        fitted = fit_ground_truth(x, y)
        np.testing.assert_allclose(fitted, np.linalg.pinv(x) @ y, atol=1e-9)

    def test_agrees_with_shared_solver(self):
        rng = np.random.default_rng(22)
        x = rng.standard_normal((15, 4))
        y = rng.standard_normal(15)
        np.testing.assert_allclose(
            fit_ground_truth(x, y), min_norm_least_squares(x, y), atol=0
        )


class TestStandardize:
    def test_zero_mean_unit_std(self):
        rng = np.random.default_rng(23)
        x = rng.standard_normal((50, 4)) * [1, 10, 100, 0.01] + [5, -3, 0, 2]
        z, means, stds = standardize_columns(x)
        np.testing.assert_allclose(z.mean(axis=0), 0, atol=1e-12)
        np.testing.assert_allclose(z.std(axis=0), 1, atol=1e-12)
        np.testing.assert_allclose(z * stds + means, x, atol=1e-9)

    def test_constant_column_stays_centered(self):
        x = np.array([[1.0, 7.0], [2.0, 7.0], [3.0, 7.0]])
        z, means, stds = standardize_columns(x)
        np.testing.assert_allclose(z[:, 1], 0.0, atol=0)
        assert stds[1] == 1.0
        assert means[1] == 7.0
