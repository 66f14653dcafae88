"""Classical-to-quantum data pipeline.

CSV rows become feature vectors in [0,1]^n (categoricals mapped to
integers, every column divided by its maximum), and feature vectors become
n-qubit product states through the fractional-power feature map

    x ↦ ⊗_j X^{x_j} |0⟩,

with X^t defined through the principal branch of the eigendecomposition
X = H diag(1, -1) H, i.e. X^t = H diag(1, e^{iπt}) H.  All distances and
probabilities downstream are phase invariant, so the branch choice carries
no physical weight; it is fixed here for reproducibility.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .config import TOL
from .qstate import PureState


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    column_names: tuple[str, ...]

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "column_names", tuple(self.column_names))
        if v.shape != (len(self.column_names),):
            raise ValueError("one value per column required")
        if np.min(v) < 0.0 or np.max(v) > 1.0:
            raise ValueError(f"values outside [0,1]: {v!r}")


@dataclass(frozen=True)
class Dataset:
    rows: tuple[FeatureVector, ...]
    labels: tuple[int, ...] | None
    column_names: tuple[str, ...]
    column_max: dict[str, float]
    categorical_maps: dict[str, dict[str, int]] = field(default_factory=dict)

    @property
    def num_features(self) -> int:
        return len(self.column_names)


def _is_float(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def load_csv(path, label_column: str | None = None,
             categorical_map: dict | None = None) -> Dataset:
    """Read a CSV with header into normalized feature vectors.

    Categorical columns are mapped through `categorical_map` when provided
    (one sub-map per column), otherwise to first-seen-order integers
    starting at 1.  Every column is divided by its maximum; the maxima and
    the categorical maps are stored for reproducible round trips.  Missing
    values, negative numerics and all-zero columns are rejected.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("empty CSV") from None
        raw_rows = [row for row in reader if row]
    header = [h.strip() for h in header]
    if label_column is not None and label_column not in header:
        raise ValueError(f"label column {label_column!r} not in header {header}")
    feature_cols = [h for h in header if h != label_column]
    if not feature_cols:
        raise ValueError("no feature columns left")

    columns: dict[str, list[str]] = {h: [] for h in header}
    for lineno, row in enumerate(raw_rows, start=2):
        if len(row) != len(header):
            raise ValueError(f"line {lineno}: expected {len(header)} cells, got {len(row)}")
        for h, cell in zip(header, row):
            cell = cell.strip()
            if cell == "":
                raise ValueError(f"line {lineno}: missing value in column {h!r}")
            columns[h].append(cell)

    cat_maps: dict[str, dict[str, int]] = {}
    encoded: dict[str, np.ndarray] = {}
    provided = categorical_map or {}
    for h in feature_cols:
        cells = columns[h]
        if all(_is_float(c) for c in cells):
            vals = np.array([float(c) for c in cells])
            if np.min(vals) < 0:
                raise ValueError(f"column {h!r} contains negative values")
        else:
            mapping = dict(provided.get(h, {}))
            if not mapping:
                seen: dict[str, int] = {}
                for c in cells:
                    if c not in seen:
                        seen[c] = len(seen) + 1
                mapping = seen
            try:
                vals = np.array([float(mapping[c]) for c in cells])
            except KeyError as exc:
                raise ValueError(f"column {h!r}: unmappable category {exc.args[0]!r}") from None
            if np.min(vals) < 0:
                raise ValueError(f"column {h!r}: categorical codes must be non-negative")
            cat_maps[h] = mapping
        encoded[h] = vals

    column_max = {}
    for h in feature_cols:
        mx = float(np.max(encoded[h]))
        if mx <= 0.0:
            raise ValueError(f"column {h!r} has non-positive maximum {mx}")
        column_max[h] = mx
        encoded[h] = encoded[h] / mx

    labels = None
    if label_column is not None:
        lab_cells = columns[label_column]
        if not all(_is_float(c) for c in lab_cells):
            mapping = dict(provided.get(label_column, {}))
            if not mapping:
                seen = {}
                for c in lab_cells:
                    if c not in seen:
                        seen[c] = len(seen)
                mapping = seen
            cat_maps[label_column] = mapping
            labels = tuple(int(mapping[c]) for c in lab_cells)
        else:
            labels = tuple(int(float(c)) for c in lab_cells)

    names = tuple(feature_cols)
    rows = tuple(
        FeatureVector(np.array([encoded[h][i] for h in feature_cols]), names)
        for i in range(len(raw_rows))
    )
    return Dataset(rows, labels, names, column_max, cat_maps)


def feature_map(x: FeatureVector) -> PureState:
    """Product state ⊗_j X^{x_j}|0⟩; one qubit per feature."""
    amps = np.array([1.0 + 0j])
    for t in x.values:
        phase = np.exp(1j * np.pi * t)
        qubit = np.array([(1 + phase) / 2, (1 - phase) / 2])
        amps = np.kron(amps, qubit)
    nrm = np.linalg.norm(amps)
    if abs(nrm - 1.0) > TOL.state_norm:
        amps = amps / nrm
    return PureState(len(x.values), amps)


def save_sidecar(dataset: Dataset, path) -> None:
    """Persist categorical maps and column maxima next to the data."""
    payload = {
        "categorical_map": dataset.categorical_maps,
        "column_max": dataset.column_max,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)


def load_sidecar(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return data.get("categorical_map", {})
