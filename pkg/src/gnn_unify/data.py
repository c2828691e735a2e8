"""Dataset container, graph-bundle file format, SBM generator.

A bundle directory holds five files: meta.json, edges.tsv, features.csv,
labels.csv, splits.json.  Loading is strict (every violation raises
BundleError naming the file and row); writing is canonical, so loading and
rewriting a valid bundle reproduces edges.tsv and labels.csv byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BundleError, ConfigError, DatasetError
from .graphs import Graph, build_graph

__all__ = [
    "Dataset",
    "SbmConfig",
    "SBM_PRESETS",
    "load_bundle",
    "write_bundle",
    "generate_sbm",
    "homophily_ratio",
]

_SPLIT_KEYS = ("train", "val", "test")


@dataclass(frozen=True)
class Dataset:
    graph: Graph
    features: np.ndarray
    labels: np.ndarray
    splits: dict
    num_classes: int

    @property
    def num_nodes(self) -> int:
        return self.graph.num_nodes

    @property
    def num_features(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class SbmConfig:
    """Planted-partition generator settings.

    Nodes split into near-equal contiguous class blocks; same-class pairs
    connect with probability p_in, cross-class with p_out.  Features are
    ``feature_signal`` times the one-hot class mean plus unit Gaussian
    noise.  Splits follow the citation-benchmark shape: 20 train nodes per
    class, up to 500 validation, up to 1000 test.
    """

    num_nodes: int
    num_classes: int
    p_in: float
    p_out: float
    feature_dim: int
    feature_signal: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.num_classes < 2:
            raise ConfigError(f"num_classes must be >= 2, got {self.num_classes}")
        if not 0.0 <= self.p_out <= self.p_in <= 1.0:
            raise ConfigError(
                f"need 0 <= p_out <= p_in <= 1, got p_in={self.p_in} p_out={self.p_out}"
            )
        if self.feature_dim < self.num_classes:
            raise ConfigError(
                f"feature_dim {self.feature_dim} < num_classes {self.num_classes}"
            )
        if self.num_nodes < 21 * self.num_classes + 2:
            # 20 train per class, at least one val and one test node, and
            # every class must keep a node outside train
            raise ConfigError(
                f"num_nodes {self.num_nodes} too small for 20-per-class splits"
            )


SBM_PRESETS = {
    "easy": SbmConfig(
        num_nodes=400, num_classes=2, p_in=0.12, p_out=0.01,
        feature_dim=8, feature_signal=1.5,
    ),
    "classes4": SbmConfig(
        num_nodes=1000, num_classes=4, p_in=0.03, p_out=0.005,
        feature_dim=16, feature_signal=1.0,
    ),
}


def _validate(ds: Dataset, err=DatasetError) -> Dataset:
    n = ds.graph.num_nodes
    if ds.features.shape[0] != n:
        raise err(f"features have {ds.features.shape[0]} rows, graph has {n} nodes")
    if ds.labels.shape != (n,):
        raise err(f"labels shape {ds.labels.shape}, expected ({n},)")
    bad = np.flatnonzero((ds.labels < 0) | (ds.labels >= ds.num_classes))
    if bad.size:
        raise err(
            f"labels.csv row {bad[0]}: label {ds.labels[bad[0]]} outside "
            f"[0, {ds.num_classes})"
        )
    seen = set()
    for key in _SPLIT_KEYS:
        idx = ds.splits[key]
        for pos, i in enumerate(idx):
            if not 0 <= i < n:
                raise err(f"splits.json {key}[{pos}]: index {i} outside [0, {n})")
            if i in seen:
                raise err(f"splits.json {key}[{pos}]: index {i} appears twice")
            seen.add(i)
    train_classes = set(int(ds.labels[i]) for i in ds.splits["train"])
    missing = sorted(set(range(ds.num_classes)) - train_classes)
    if missing:
        raise err(f"splits.json train: no node of class {missing[0]}")
    return ds


def _read_lines(path: Path) -> list[str]:
    if not path.is_file():
        raise BundleError(f"missing {path.name}")
    text = path.read_text()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def load_bundle(path, normalize_features: bool = False) -> Dataset:
    """Read and validate a bundle directory.

    Every format violation raises BundleError naming the offending file,
    row and field.  ``normalize_features=True`` applies row-L1 scaling to
    the feature matrix after validation (zero rows are left alone).
    """
    root = Path(path)
    if not root.is_dir():
        raise BundleError(f"not a directory: {root}")

    meta_path = root / "meta.json"
    if not meta_path.is_file():
        raise BundleError("missing meta.json")
    try:
        meta = json.loads(meta_path.read_text())
    except ValueError as exc:
        raise BundleError(f"meta.json: {exc}") from exc
    for key in ("num_nodes", "num_features", "num_classes"):
        if not isinstance(meta.get(key), int) or meta[key] < 1:
            raise BundleError(f"meta.json: {key} must be a positive integer")
    n, f, c = meta["num_nodes"], meta["num_features"], meta["num_classes"]

    edges = []
    prev = None
    for row, line in enumerate(_read_lines(root / "edges.tsv")):
        parts = line.split("\t")
        if len(parts) != 2:
            raise BundleError(f"edges.tsv row {row}: expected 'u\\tv'")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise BundleError(f"edges.tsv row {row}: non-integer endpoint") from None
        if not (0 <= u < v < n):
            raise BundleError(
                f"edges.tsv row {row}: need 0 <= u < v < {n}, got ({u}, {v})"
            )
        if prev is not None and (u, v) <= prev:
            raise BundleError(f"edges.tsv row {row}: edges not strictly ascending")
        prev = (u, v)
        edges.append((u, v))

    feat_lines = _read_lines(root / "features.csv")
    if len(feat_lines) != n:
        raise BundleError(f"features.csv: {len(feat_lines)} rows, expected {n}")
    features = np.empty((n, f), dtype=np.float64)
    for row, line in enumerate(feat_lines):
        parts = line.split(",")
        if len(parts) != f:
            raise BundleError(
                f"features.csv row {row}: {len(parts)} fields, expected {f}"
            )
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise BundleError(f"features.csv row {row}: non-numeric field") from None
        features[row] = values
    if not np.all(np.isfinite(features)):
        row = int(np.flatnonzero(~np.isfinite(features).all(axis=1))[0])
        raise BundleError(f"features.csv row {row}: non-finite value")

    label_lines = _read_lines(root / "labels.csv")
    if len(label_lines) != n:
        raise BundleError(f"labels.csv: {len(label_lines)} rows, expected {n}")
    labels = np.empty(n, dtype=np.int64)
    for row, line in enumerate(label_lines):
        try:
            labels[row] = int(line)
        except ValueError:
            raise BundleError(f"labels.csv row {row}: non-integer label") from None

    splits_path = root / "splits.json"
    if not splits_path.is_file():
        raise BundleError("missing splits.json")
    try:
        raw_splits = json.loads(splits_path.read_text())
    except ValueError as exc:
        raise BundleError(f"splits.json: {exc}") from exc
    if sorted(raw_splits) != sorted(_SPLIT_KEYS):
        raise BundleError(f"splits.json: keys must be {list(_SPLIT_KEYS)}")
    splits = {}
    for key in _SPLIT_KEYS:
        idx = raw_splits[key]
        if not all(isinstance(i, int) for i in idx):
            raise BundleError(f"splits.json {key}: non-integer index")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise BundleError(f"splits.json {key}: indices not strictly ascending")
        splits[key] = tuple(idx)

    ds = Dataset(
        graph=build_graph(n, edges),
        features=features,
        labels=labels,
        splits=splits,
        num_classes=c,
    )
    _validate(ds, err=BundleError)
    if normalize_features:
        norms = np.abs(ds.features).sum(axis=1, keepdims=True)
        np.divide(ds.features, norms, out=ds.features, where=norms > 0)
    return ds


def write_bundle(ds: Dataset, path) -> None:
    """Write a dataset as a bundle directory in canonical form."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    meta = {
        "num_nodes": ds.num_nodes,
        "num_features": ds.num_features,
        "num_classes": ds.num_classes,
    }
    (root / "meta.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    (root / "edges.tsv").write_text(
        "".join(f"{u}\t{v}\n" for u, v in ds.graph.edges)
    )
    (root / "features.csv").write_text(
        "".join(",".join(repr(float(x)) for x in row) + "\n" for row in ds.features)
    )
    (root / "labels.csv").write_text(
        "".join(f"{int(y)}\n" for y in ds.labels)
    )
    splits = {key: list(ds.splits[key]) for key in _SPLIT_KEYS}
    (root / "splits.json").write_text(
        json.dumps(splits, sort_keys=True, indent=2) + "\n"
    )


def generate_sbm(cfg: SbmConfig) -> Dataset:
    """Draw a seeded planted-partition dataset.

    Draw order is fixed (edges, then features, then splits) so adding a
    downstream consumer never shifts earlier draws.  Validation and test
    splits are capped at 500 and 1000 nodes but shrink on small graphs:
    after the 20-per-class train draw, validation takes at most half the
    remainder.
    """
    rng = np.random.default_rng(cfg.seed)
    n, c = cfg.num_nodes, cfg.num_classes
    counts = [n // c + (1 if i < n % c else 0) for i in range(c)]
    labels = np.repeat(np.arange(c, dtype=np.int64), counts)

    iu, ju = np.triu_indices(n, k=1)
    probs = np.where(labels[iu] == labels[ju], cfg.p_in, cfg.p_out)
    mask = rng.random(iu.size) < probs
    edges = list(zip(iu[mask].tolist(), ju[mask].tolist()))

    features = rng.standard_normal((n, cfg.feature_dim))
    features[np.arange(n), labels] += cfg.feature_signal

    order = rng.permutation(n)
    want = {cls: 20 for cls in range(c)}
    train, rest = [], []
    for i in order:
        cls = int(labels[i])
        if want[cls] > 0:
            want[cls] -= 1
            train.append(int(i))
        else:
            rest.append(int(i))
    if any(want.values()):
        raise ConfigError("a class has fewer than 20 nodes; enlarge the graph")
    n_val = min(500, len(rest) // 2)
    val = rest[:n_val]
    test = rest[n_val:n_val + min(1000, len(rest) - n_val)]
    splits = {
        "train": tuple(sorted(train)),
        "val": tuple(sorted(val)),
        "test": tuple(sorted(test)),
    }

    ds = Dataset(
        graph=build_graph(n, edges),
        features=features,
        labels=labels,
        splits=splits,
        num_classes=c,
    )
    return _validate(ds)


def homophily_ratio(ds: Dataset) -> float:
    """Fraction of edges joining same-class endpoints."""
    if not ds.graph.edges:
        raise DatasetError("graph has no edges")
    same = sum(1 for u, v in ds.graph.edges if ds.labels[u] == ds.labels[v])
    return same / len(ds.graph.edges)
