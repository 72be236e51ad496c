"""Tabular dataset ingestion, automated repair, and scaling.

Loads CSV / JSON-lines files against a column schema, then applies the
standard cleanup pipeline: NaN-row removal, optional IQR outlier trimming,
zero-variance and high-correlation feature pruning, standardization, and
covariance repair so downstream linear algebra stays well conditioned.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

NUMERIC = "numeric"
CATEGORICAL = "categorical"

ROLES = ("feature", "target", "dropped", "fixed")


class DatasetError(ValueError):
    """Raised for unreadable files, schema mismatches, or degenerate data."""


@dataclass
class ColumnSchema:
    """One column: its value kind and its role in modeling."""

    name: str
    kind: str = NUMERIC
    role: str = "feature"
    units: str = ""
    levels: list[str] | None = None  # categorical only; filled from data if absent

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise DatasetError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.role not in ROLES:
            raise DatasetError(f"column {self.name!r}: unknown role {self.role!r}")

    @property
    def is_feature(self) -> bool:
        # fixed columns stay in the feature matrix; they are pinned during search
        return self.role in ("feature", "fixed")

    def to_dict(self) -> dict:
        d = {"name": self.name, "kind": self.kind, "role": self.role}
        if self.units:
            d["units"] = self.units
        if self.levels is not None:
            d["levels"] = list(self.levels)
        return d


def schema_from_json(obj) -> list[ColumnSchema]:
    """Parse a schema document: a list of column dicts (or {"columns": [...]})."""
    if isinstance(obj, dict):
        obj = obj.get("columns")
    if not isinstance(obj, list) or not obj:
        raise DatasetError("schema must be a non-empty list of column objects")
    out = []
    for entry in obj:
        unknown = set(entry) - {"name", "kind", "role", "units", "levels"}
        if unknown:
            raise DatasetError(f"schema entry has unknown fields: {sorted(unknown)}")
        out.append(ColumnSchema(**entry))
    names = [c.name for c in out]
    if len(set(names)) != len(names):
        raise DatasetError("schema contains duplicate column names")
    return out


@dataclass
class Dataset:
    """Parsed tabular data: one array per retained (non-dropped) column.

    Numeric columns are float arrays (NaN marks missing values); categorical
    columns are object arrays of level strings.
    """

    schema: list[ColumnSchema]
    values: dict[str, np.ndarray]
    source: tuple[str, str] = ("<memory>", "memory")
    content_hash: str = ""

    @property
    def n(self) -> int:
        first = next(iter(self.values.values()))
        return len(first)

    def column(self, name: str) -> np.ndarray:
        return self.values[name]


def _parse_numeric(cell, row_idx: int, col: str) -> float:
    if cell is None:
        return math.nan
    if isinstance(cell, (int, float)):
        return float(cell)
    text = str(cell).strip()
    if text == "" or text.lower() in ("nan", "null", "na"):
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise DatasetError(
            f"unparseable numeric cell at row {row_idx}, column {col!r}: {cell!r}"
        ) from None


def load_dataset(path, schema: list[ColumnSchema]) -> Dataset:
    """Load a CSV or JSON-lines file, keeping only non-dropped schema columns.

    The schema's column names must all be present in the file. Cells of
    numeric columns must parse as floats (empty cells become NaN); failures
    report the offending row index and column name.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset file not found: {path}")
    raw = path.read_bytes()
    content_hash = hashlib.sha256(raw).hexdigest()
    fmt = "jsonl" if path.suffix.lower() in (".jsonl", ".ndjson", ".json") else "csv"

    retained = [c for c in schema if c.role != "dropped"]
    if not retained:
        raise DatasetError("schema retains no columns")

    records: list[dict] = []
    if fmt == "csv":
        text = raw.decode("utf-8-sig")
        reader = csv.reader(text.splitlines())
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"empty CSV file: {path}") from None
        header = [h.strip() for h in header]
        missing = [c.name for c in retained if c.name not in header]
        if missing:
            raise DatasetError(f"schema column(s) missing from file: {missing}")
        idx = {name: header.index(name) for name in (c.name for c in retained)}
        for i, row in enumerate(reader):
            if not row:
                continue
            records.append({name: row[j] if j < len(row) else "" for name, j in idx.items()})
    else:
        for i, line in enumerate(raw.decode("utf-8").splitlines()):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"invalid JSON on line {i}: {exc}") from None
            for c in retained:
                if c.name not in obj:
                    raise DatasetError(f"record {len(records)} missing column {c.name!r}")
            records.append(obj)

    if not records:
        raise DatasetError(f"no data rows in {path}")

    values: dict[str, np.ndarray] = {}
    out_schema = []
    for c in retained:
        col_schema = ColumnSchema(c.name, c.kind, c.role, c.units,
                                  list(c.levels) if c.levels is not None else None)
        if c.kind == NUMERIC:
            values[c.name] = np.array(
                [_parse_numeric(r[c.name], i, c.name) for i, r in enumerate(records)],
                dtype=np.float64,
            )
        else:
            labels = np.array([str(r[c.name]).strip() for r in records], dtype=object)
            if col_schema.levels is None:
                col_schema.levels = sorted({v for v in labels if v != ""})
            values[c.name] = labels
        out_schema.append(col_schema)

    return Dataset(out_schema, values, (str(path), fmt), content_hash)


@dataclass
class PreprocessReport:
    """Record of every repair applied by preprocess()."""

    dropped_zero_variance: list[str] = field(default_factory=list)
    dropped_correlated: list[tuple[str, str, float]] = field(default_factory=list)  # kept, dropped, corr
    dropped_nan_rows: int = 0
    dropped_outlier_rows: int = 0
    covariance_repair: tuple[str, float] = ("none", 0.0)
    scaler: dict[str, tuple[float, float]] = field(default_factory=dict)  # name -> (mean, std)
    mad: dict[str, float] = field(default_factory=dict)

    @property
    def is_empty(self) -> bool:
        """True when no destructive action was taken (scaler stats aside)."""
        return (
            not self.dropped_zero_variance
            and not self.dropped_correlated
            and self.dropped_nan_rows == 0
            and self.dropped_outlier_rows == 0
            and self.covariance_repair[0] == "none"
        )

    def to_dict(self) -> dict:
        return {
            "dropped_zero_variance": self.dropped_zero_variance,
            "dropped_correlated": [
                {"kept": a, "dropped": b, "correlation": c} for a, b, c in self.dropped_correlated
            ],
            "dropped_nan_rows": self.dropped_nan_rows,
            "dropped_outlier_rows": self.dropped_outlier_rows,
            "covariance_repair": {"method": self.covariance_repair[0], "param": self.covariance_repair[1]},
            "scaler": {k: {"mean": m, "std": s} for k, (m, s) in self.scaler.items()},
            "mad": self.mad,
        }


def repair_covariance(cov: np.ndarray, jitter_eps: float = 1e-6,
                      pca_variance: float = 0.99, ridge: float = 1e-3):
    """Return a positive-definite version of cov plus the repair tag.

    Escalation is cheapest-first: diagonal jitter, then spectral truncation
    with the discarded variance spread back on the trailing eigenvalues,
    then a ridge term. Each stage is only tried if the previous one left the
    minimum eigenvalue at or below zero.
    """
    cov = np.asarray(cov, dtype=np.float64)

    def min_eig(m):
        return float(np.linalg.eigvalsh(m)[0])

    if min_eig(cov) > 0:
        return cov, ("none", 0.0)

    jittered = cov + jitter_eps * np.eye(cov.shape[0])
    if min_eig(jittered) > 0:
        return jittered, ("jitter", jitter_eps)

    # probabilistic-PCA style: keep the leading spectrum, floor the rest at
    # the mean of what was discarded
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals, eigvecs = eigvals[order], eigvecs[:, order]
    pos = np.clip(eigvals, 0.0, None)
    total = pos.sum()
    if total > 0:
        k = int(np.searchsorted(np.cumsum(pos) / total, pca_variance) + 1)
        floor = float(np.clip(eigvals[k:], 0.0, None).mean()) if k < len(eigvals) else 0.0
        repaired_vals = np.concatenate([eigvals[:k], np.full(len(eigvals) - k, floor)])
        repaired = (eigvecs * repaired_vals) @ eigvecs.T
        repaired = (repaired + repaired.T) / 2
        if min_eig(repaired) > 0:
            return repaired, ("pca", float(k))

    lam = ridge
    for _ in range(12):
        ridged = cov + lam * np.eye(cov.shape[0])
        if min_eig(ridged) > 0:
            return ridged, ("l2", lam)
        lam *= 10
    raise DatasetError("covariance repair failed: matrix is too indefinite")


class PreprocessedDataset:
    """Scaled, repaired view of a Dataset ready for modeling and search.

    X holds features in "search space": standardized numeric columns and
    integer level codes for categorical ones. Y holds targets in their
    original units.
    """

    def __init__(self, schema, X, Y, scaler, mads, cov, report):
        self.schema: list[ColumnSchema] = schema
        self.X: np.ndarray = X
        self.Y: np.ndarray = Y
        self.scaler: dict[str, tuple[float, float]] = scaler
        self.mads: np.ndarray = mads
        self.cov: np.ndarray = cov
        self.report: PreprocessReport = report

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def feature_columns(self) -> list[ColumnSchema]:
        return [c for c in self.schema if c.is_feature]

    @property
    def target_columns(self) -> list[ColumnSchema]:
        return [c for c in self.schema if c.role == "target"]

    @property
    def feature_names(self) -> list[str]:
        return [c.name for c in self.feature_columns]

    @property
    def target_names(self) -> list[str]:
        return [c.name for c in self.target_columns]

    def feature_index(self, name: str) -> int:
        return self.feature_names.index(name)

    def scale_value(self, name: str, value: float) -> float:
        """Map one raw feature value into search space."""
        if name in self.scaler:
            mean, std = self.scaler[name]
            return (float(value) - mean) / std
        return float(value)

    def unscale_value(self, name: str, value: float) -> float:
        if name in self.scaler:
            mean, std = self.scaler[name]
            return float(value) * std + mean
        return float(value)

    def scale_row(self, raw: np.ndarray) -> np.ndarray:
        return np.array(
            [self.scale_value(n, v) for n, v in zip(self.feature_names, raw)],
            dtype=np.float64,
        )

    def unscale_row(self, scaled: np.ndarray) -> np.ndarray:
        return np.array(
            [self.unscale_value(n, v) for n, v in zip(self.feature_names, scaled)],
            dtype=np.float64,
        )

    def unscale_matrix(self, scaled: np.ndarray) -> np.ndarray:
        return np.vstack([self.unscale_row(r) for r in np.atleast_2d(scaled)])

    def code_to_level(self, name: str, code: float) -> str:
        col = next(c for c in self.schema if c.name == name)
        return col.levels[int(round(code))]

    def level_to_code(self, name: str, level: str) -> int:
        col = next(c for c in self.schema if c.name == name)
        try:
            return col.levels.index(str(level))
        except ValueError:
            raise DatasetError(f"unknown level {level!r} for column {name!r}") from None

    def schema_hash(self) -> str:
        doc = json.dumps([c.to_dict() for c in self.schema], sort_keys=True)
        return hashlib.sha256(doc.encode()).hexdigest()

    def subset(self, indices: np.ndarray) -> "PreprocessedDataset":
        """Row view sharing scaler / MAD / covariance statistics."""
        return PreprocessedDataset(
            self.schema, self.X[indices], self.Y[indices],
            self.scaler, self.mads, self.cov, self.report,
        )

    def to_dataset(self) -> Dataset:
        """Re-wrap the processed values as a Dataset (used to check idempotence)."""
        values: dict[str, np.ndarray] = {}
        for j, col in enumerate(self.feature_columns):
            if col.kind == NUMERIC:
                values[col.name] = self.X[:, j].copy()
            else:
                values[col.name] = np.array(
                    [col.levels[int(round(v))] for v in self.X[:, j]], dtype=object
                )
        for j, col in enumerate(self.target_columns):
            values[col.name] = self.Y[:, j].copy()
        return Dataset([ColumnSchema(**c.to_dict()) for c in self.schema], values)


def mad(values) -> float:
    """Median absolute deviation from the median."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise DatasetError("mad of empty vector")
    med = float(np.median(v))
    return float(np.median(np.abs(v - med)))


def preprocess(ds: Dataset, corr_threshold: float = 0.95,
               outlier_trim: bool = False) -> tuple[PreprocessedDataset, PreprocessReport]:
    """Run the full repair pipeline on a loaded Dataset.

    Steps, in order: drop NaN rows, optionally trim IQR outlier rows, drop
    zero-variance features, prune one of each feature pair with
    |correlation| > corr_threshold (the lexicographically later name is
    dropped), encode categoricals as level codes, standardize numeric
    features, and repair the feature covariance matrix to positive definite.
    """
    report = PreprocessReport()
    schema = [ColumnSchema(**c.to_dict()) for c in ds.schema]
    features = [c for c in schema if c.is_feature]
    targets = [c for c in schema if c.role == "target"]
    if not features:
        raise DatasetError("no feature columns in schema")
    if not targets:
        raise DatasetError("no target columns in schema")

    n = ds.n
    keep = np.ones(n, dtype=bool)
    for c in schema:
        col = ds.values[c.name]
        if c.kind == NUMERIC:
            keep &= ~np.isnan(col.astype(np.float64))
        else:
            keep &= np.array([str(v) != "" for v in col])
    report.dropped_nan_rows = int(n - keep.sum())
    cols = {name: v[keep] for name, v in ds.values.items()}
    n = int(keep.sum())

    if outlier_trim and n > 0:
        fence = np.ones(n, dtype=bool)
        for c in schema:
            if c.kind != NUMERIC:
                continue
            v = cols[c.name].astype(np.float64)
            q1, q3 = np.percentile(v, [25, 75])
            iqr = q3 - q1
            fence &= (v >= q1 - 1.5 * iqr) & (v <= q3 + 1.5 * iqr)
        report.dropped_outlier_rows = int(n - fence.sum())
        cols = {name: v[fence] for name, v in cols.items()}
        n = int(fence.sum())

    if n < 2:
        raise DatasetError(f"fewer than 2 rows remain after cleaning ({n})")

    # zero-variance features (constant categoricals count too)
    retained_features = []
    for c in features:
        v = cols[c.name]
        if c.kind == NUMERIC:
            constant = float(np.var(v.astype(np.float64))) == 0.0
        else:
            constant = len({str(x) for x in v}) <= 1
        if constant:
            report.dropped_zero_variance.append(c.name)
        else:
            retained_features.append(c)

    # correlation pruning over numeric features, one pass in name order
    numeric_names = [c.name for c in retained_features if c.kind == NUMERIC]
    dropped_corr: set[str] = set()
    if len(numeric_names) > 1:
        mat = np.vstack([cols[name].astype(np.float64) for name in numeric_names])
        corr = np.corrcoef(mat)
        for i in range(len(numeric_names)):
            for j in range(i + 1, len(numeric_names)):
                a, b = numeric_names[i], numeric_names[j]
                if a in dropped_corr or b in dropped_corr:
                    continue
                r = float(corr[i, j])
                if abs(r) > corr_threshold:
                    kept, gone = sorted((a, b))
                    dropped_corr.add(gone)
                    report.dropped_correlated.append((kept, gone, r))
    retained_features = [c for c in retained_features if c.name not in dropped_corr]

    if not retained_features:
        raise DatasetError("all feature columns were dropped during preprocessing")

    # build the search-space feature matrix
    X = np.empty((n, len(retained_features)), dtype=np.float64)
    for j, c in enumerate(retained_features):
        if c.kind == NUMERIC:
            v = cols[c.name].astype(np.float64)
            mean = float(np.mean(v))
            std = float(np.std(v))
            if std <= 0:
                raise DatasetError(f"column {c.name!r} has zero variance after trimming")
            report.scaler[c.name] = (mean, std)
            X[:, j] = (v - mean) / std
        else:
            observed = {str(x) for x in cols[c.name]}
            if c.levels is None:
                c.levels = sorted(observed)
            elif observed - set(c.levels):
                bad = sorted(observed - set(c.levels))[0]
                raise DatasetError(f"value {bad!r} outside declared levels of {c.name!r}")
            lookup = {lv: k for k, lv in enumerate(c.levels)}
            X[:, j] = [lookup[str(x)] for x in cols[c.name]]

    Y = np.empty((n, len(targets)), dtype=np.float64)
    for j, c in enumerate(targets):
        if c.kind != NUMERIC:
            raise DatasetError(f"target column {c.name!r} must be numeric")
        Y[:, j] = cols[c.name].astype(np.float64)

    mads = np.empty(len(retained_features))
    for j, c in enumerate(retained_features):
        m = mad(X[:, j])
        if m == 0.0:
            m = float(np.std(X[:, j]))  # fallback; zero-variance columns are already gone
        mads[j] = m
        report.mad[c.name] = float(m)

    cov = np.cov(X, rowvar=False, ddof=0)
    cov = np.atleast_2d(cov)
    cov, repair = repair_covariance(cov)
    report.covariance_repair = repair

    out_schema = retained_features + targets
    pre = PreprocessedDataset(out_schema, X, Y, report.scaler, mads, cov, report)
    return pre, report


def csv_cell(v) -> str:
    """Stable text for one cell: shortest float repr, ints without '.0'."""
    if isinstance(v, str):
        return v
    f = float(v)
    if f == int(f) and abs(f) < 1e15:
        return str(int(f))
    return repr(f)


def write_csv(ds: Dataset, path) -> None:
    """Write a Dataset back out with columns in schema order."""
    names = [c.name for c in ds.schema]
    lines = [",".join(names)]
    cols = [ds.values[n] for n in names]
    for i in range(ds.n):
        lines.append(",".join(csv_cell(col[i]) for col in cols))
    Path(path).write_text("\n".join(lines) + "\n")


def medoid_index(ds: PreprocessedDataset, cap: int = 2000, seed: int = 0) -> int:
    """Index of the most central row: smallest total euclidean distance to
    the others. Above cap rows, distances are taken against a fixed-seed
    subsample so the choice stays deterministic and cheap.
    """
    X = ds.X
    n = X.shape[0]
    if n > cap:
        ref = X[np.random.default_rng(seed).choice(n, size=cap, replace=False)]
    else:
        ref = X
    totals = np.empty(n)
    sq_ref = (ref * ref).sum(axis=1)
    for i in range(0, n, 512):
        block = X[i:i + 512]
        d2 = ((block * block).sum(axis=1)[:, None] - 2 * block @ ref.T + sq_ref)
        totals[i:i + 512] = np.sqrt(np.clip(d2, 0.0, None)).sum(axis=1)
    return int(np.argmin(totals))


def train_test_split(ds: PreprocessedDataset, ratio: float = 0.8,
                     seed: int = 0) -> tuple[PreprocessedDataset, PreprocessedDataset]:
    """Deterministic shuffled split; train gets floor(ratio * n) rows."""
    if not 0 < ratio < 1:
        raise DatasetError(f"split ratio must be in (0, 1), got {ratio}")
    n = ds.n
    n_train = int(math.floor(ratio * n))
    if n_train == 0 or n_train == n:
        raise DatasetError(f"split of {n} rows at ratio {ratio} leaves an empty partition")
    perm = np.random.default_rng(seed).permutation(n)
    return ds.subset(perm[:n_train]), ds.subset(perm[n_train:])
