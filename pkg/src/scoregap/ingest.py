"""CSV loading, categorical encoding, and subgroup splitting.

The experiment pipeline consumes plain CSV files with a header row. An
encoding manifest says, per column, whether values pass through as
numbers or map through an explicit ordinal scale. Grouping specs are
declarative predicates on raw column values, so the same split is
reproducible from the config file alone.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    CsvParseError,
    EmptyGroupError,
    IngestError,
    MissingColumnError,
    ShapeMismatchError,
    UnmappedCategoryError,
)
from .linalg import as_matrix, as_vector, min_norm_least_squares

# Cell values treated as missing; rows containing one in any used column
# are dropped (and counted) rather than imputed.
MISSING_TOKENS = frozenset({"", "?", "NA", "N/A", "nan", "NaN"})

PASSTHROUGH = "passthrough"

# name -> PASSTHROUGH, ordered category list (mapped to 1..n), or explicit
# category -> number mapping
ManifestSpec = Mapping[str, Union[str, Sequence[str], Mapping[str, float]]]


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


def normalize_manifest(manifest: Optional[ManifestSpec]) -> Dict[str, Optional[Dict[str, float]]]:
    """Resolve manifest shorthand to {column: None | category->value dict}.

    None means passthrough. An ordered list [a, b, c] becomes a->1, b->2,
    c->3, preserving the stated ordering.
    """
    out: Dict[str, Optional[Dict[str, float]]] = {}
    for name, spec in (manifest or {}).items():
        if spec == PASSTHROUGH or spec is None:
            out[name] = None
        elif isinstance(spec, Mapping):
            out[name] = {str(k): float(v) for k, v in spec.items()}
        elif isinstance(spec, (list, tuple)):
            out[name] = {str(cat): float(i) for i, cat in enumerate(spec, start=1)}
        else:
            raise IngestError(f"bad encoding spec for column {name!r}: {spec!r}")
    return out


def _encode_cell(raw: str, mapping: Optional[Dict[str, float]], row: int, column: str) -> float:
    if mapping is None:
        try:
            return float(raw)
        except ValueError:
            raise CsvParseError(row, column, f"not numeric: {raw!r}") from None
    if raw in mapping:
        return mapping[raw]
    # Already-encoded values pass through, so applying a manifest twice is
    # a no-op.
    try:
        num = float(raw)
    except ValueError:
        raise UnmappedCategoryError(column, raw) from None
    if num in mapping.values():
        return num
    raise UnmappedCategoryError(column, raw)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Encoded table plus the raw text needed for predicates and decoding."""

    column_names: Tuple[str, ...]
    rows: np.ndarray
    manifest: Dict[str, Optional[Dict[str, float]]]
    raw_columns: Dict[str, Tuple[str, ...]]
    n_dropped: int = 0

    def __post_init__(self):
        object.__setattr__(self, "rows", _frozen(as_matrix(self.rows, "rows")))
        if self.rows.shape[1] != len(self.column_names):
            raise ShapeMismatchError(
                f"{self.rows.shape[1]} columns of data for {len(self.column_names)} names"
            )

    @property
    def size(self) -> int:
        return self.rows.shape[0]

    def column_index(self, name: str) -> int:
        try:
            return self.column_names.index(name)
        except ValueError:
            raise MissingColumnError(f"no column named {name!r}") from None

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.column_index(name)]

    def raw_column(self, name: str) -> Tuple[str, ...]:
        self.column_index(name)
        return self.raw_columns[name]

    def decode_column(self, name: str) -> Tuple[str, ...]:
        """Recover the original categories of an ordinal column."""
        mapping = self.manifest.get(name)
        if mapping is None:
            raise IngestError(f"column {name!r} has no ordinal encoding to invert")
        inverse = {v: k for k, v in mapping.items()}
        return tuple(inverse[v] for v in self.column(name))

    def feature_names(self, drop: Sequence[str] = ()) -> Tuple[str, ...]:
        for name in drop:
            self.column_index(name)
        dropped = set(drop)
        return tuple(n for n in self.column_names if n not in dropped)

    def feature_matrix(self, drop: Sequence[str] = ()) -> np.ndarray:
        """All columns except `drop`, in file order."""
        keep = [self.column_index(n) for n in self.feature_names(drop)]
        return self.rows[:, keep]

    def with_columns(self, names: Sequence[str], values: np.ndarray) -> "Dataset":
        """Copy of the dataset with the named columns replaced."""
        new_rows = np.array(self.rows)
        for j, name in enumerate(names):
            new_rows[:, self.column_index(name)] = values[:, j]
        return Dataset(
            column_names=self.column_names,
            rows=new_rows,
            manifest=self.manifest,
            raw_columns=self.raw_columns,
            n_dropped=self.n_dropped,
        )


def load_csv(path: str, manifest: Optional[ManifestSpec] = None) -> Dataset:
    """Load a header-row CSV, encoding columns per the manifest.

    Unlisted columns pass through as numbers. Rows with a missing cell in
    any column are dropped and counted in n_dropped. Row numbers in errors
    are file line numbers (header is line 1).
    """
    norm = normalize_manifest(manifest)
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot open {path}: {exc}") from None
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path} is empty; a header row is required") from None
        names = tuple(h.strip() for h in header)
        if len(set(names)) != len(names):
            raise IngestError(f"{path} has duplicate column names")
        for name in norm:
            if name not in names:
                raise MissingColumnError(f"manifest names column {name!r} not present in {path}")

        encoded: list = []
        raw_rows: list = []
        dropped = 0
        for line_no, record in enumerate(reader, start=2):
            if len(record) != len(names):
                raise CsvParseError(line_no, "<row>", f"expected {len(names)} cells, got {len(record)}")
            cells = [c.strip() for c in record]
            if any(c in MISSING_TOKENS for c in cells):
                dropped += 1
                continue
            encoded.append(
                [_encode_cell(c, norm.get(n), line_no, n) for n, c in zip(names, cells)]
            )
            raw_rows.append(cells)

    if not encoded:
        raise IngestError(f"{path} contains no usable data rows")
    matrix = np.array(encoded, dtype=float)
    raw_columns = {n: tuple(r[j] for r in raw_rows) for j, n in enumerate(names)}
    return Dataset(
        column_names=names,
        rows=matrix,
        manifest=norm,
        raw_columns=raw_columns,
        n_dropped=dropped,
    )


@dataclass(frozen=True)
class GroupPredicate:
    """Declarative row test on one raw column.

    Comparators le/lt/ge/gt parse the raw value as a number; eq/ne/in
    compare text, accepting a numeric match as equal so "1" and "1.0"
    agree.
    """

    column: str
    op: str
    value: object

    _NUMERIC_OPS = ("le", "lt", "ge", "gt")
    _SET_OPS = ("eq", "ne", "in")

    def __post_init__(self):
        if self.op not in self._NUMERIC_OPS + self._SET_OPS:
            raise IngestError(f"unknown comparator {self.op!r}")

    def _values(self) -> Tuple[object, ...]:
        if self.op == "in":
            if not isinstance(self.value, (list, tuple, set, frozenset)):
                raise IngestError(f"'in' comparator needs a value list, got {self.value!r}")
            return tuple(self.value)
        return (self.value,)

    def matches(self, raw: str) -> bool:
        if self.op in self._NUMERIC_OPS:
            try:
                x = float(raw)
                threshold = float(self.value)  # type: ignore[arg-type]
            except (TypeError, ValueError):
                raise IngestError(
                    f"comparator {self.op!r} on column {self.column!r} needs numeric "
                    f"values, got cell {raw!r} vs {self.value!r}"
                ) from None
            return {"le": x <= threshold, "lt": x < threshold, "ge": x >= threshold, "gt": x > threshold}[self.op]
        hit = any(_text_equal(raw, v) for v in self._values())
        return not hit if self.op == "ne" else hit


def _text_equal(raw: str, value: object) -> bool:
    if raw == str(value):
        return True
    try:
        return float(raw) == float(value)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        return False


@dataclass(frozen=True)
class GroupingSpec:
    """Assigns each row to group 1, group 2, or neither.

    group2 = None means "everything group 1 does not match", so no row is
    excluded. With two explicit predicates, rows matching neither are
    excluded and rows matching both are an error.
    """

    name: str
    group1: GroupPredicate
    group2: Optional[GroupPredicate] = None


@dataclass(frozen=True, eq=False)
class SplitResult:
    """Feature matrices of the two subgroups plus the row masks behind them."""

    group1: np.ndarray
    group2: np.ndarray
    mask1: np.ndarray
    mask2: np.ndarray

    @property
    def sizes(self) -> Tuple[int, int]:
        return (self.group1.shape[0], self.group2.shape[0])

    @property
    def n_excluded(self) -> int:
        return int(self.mask1.shape[0] - self.mask1.sum() - self.mask2.sum())


def split_masks(ds: Dataset, spec: GroupingSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Boolean row masks for the two groups; disjoint by construction or error."""
    raw = ds.raw_column(spec.group1.column)
    mask1 = np.array([spec.group1.matches(v) for v in raw], dtype=bool)
    if spec.group2 is None:
        mask2 = ~mask1
    else:
        raw2 = ds.raw_column(spec.group2.column)
        mask2 = np.array([spec.group2.matches(v) for v in raw2], dtype=bool)
        overlap = int(np.sum(mask1 & mask2))
        if overlap:
            raise IngestError(
                f"grouping {spec.name!r}: predicates overlap on {overlap} rows"
            )
    return mask1, mask2


def split_groups(ds: Dataset, spec: GroupingSpec, drop: Sequence[str] = ()) -> SplitResult:
    """Split the dataset's feature matrix into the two subgroups.

    `drop` names columns excluded from features (identifiers, the outcome
    column); the grouping column itself stays a feature unless dropped.
    """
    mask1, mask2 = split_masks(ds, spec)
    features = ds.feature_matrix(drop)
    n1, n2 = int(mask1.sum()), int(mask2.sum())
    if n1 == 0:
        raise EmptyGroupError(f"grouping {spec.name!r}: group 1 received zero rows")
    if n2 == 0:
        raise EmptyGroupError(f"grouping {spec.name!r}: group 2 received zero rows")
    return SplitResult(
        group1=_frozen(features[mask1]),
        group2=_frozen(features[mask2]),
        mask1=mask1,
        mask2=mask2,
    )


def fit_ground_truth(x_mat, y) -> np.ndarray:
    """Fit a true-quality rule from observed outcomes by min-norm least squares."""
    x = as_matrix(x_mat, "X")
    yv = as_vector(y, "y")
    return min_norm_least_squares(x, yv)


def standardize_columns(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Center each column and scale unit variance; constant columns stay centered.

    Returns (standardized, means, stds) with stds as used (zeros replaced
    by one).
    """
    x = as_matrix(matrix, "matrix")
    means = x.mean(axis=0)
    stds = x.std(axis=0)
    stds = np.where(stds > 0, stds, 1.0)
    return (x - means) / stds, means, stds
