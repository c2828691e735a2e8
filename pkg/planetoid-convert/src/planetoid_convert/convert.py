"""Convert the pickled citation-network distribution into a graph bundle.

Input is the eight-file layout ind.<name>.{x,y,tx,ty,allx,ally,graph,test.index}:
pickled sparse feature blocks and one-hot label blocks for the training pool
(allx/ally) and the test block (tx/ty), a pickled adjacency dict, and a text
file giving the graph index of each tx row.  Output is a bundle directory
(meta.json, edges.tsv, features.csv, labels.csv, splits.json) written in
canonical form, so converting twice yields byte-identical files.

Test indices may leave gaps in their range (citeseer ships that way); rows
for the missing indices are zero-filled and the nodes are left out of every
split, matching the reference loader for these files.
"""

from __future__ import annotations

import json
import pickle
from pathlib import Path

import numpy as np

__all__ = ["ConvertError", "DATASET_NAMES", "convert", "load_planetoid"]

DATASET_NAMES = ("cora", "citeseer", "pubmed")

VALIDATION_SIZE = 500


class ConvertError(Exception):
    """Unusable input: missing file, bad pickle, or inconsistent blocks."""


def _read_pickle(path: Path):
    if not path.is_file():
        raise ConvertError(f"missing {path.name}")
    try:
        with open(path, "rb") as fh:
            # the canonical distribution is python-2 pickles; latin1 keeps
            # the embedded numpy byte strings intact
            return pickle.load(fh, encoding="latin1")
    except Exception as exc:
        raise ConvertError(f"{path.name}: not a readable pickle ({exc})") from exc


def _read_test_index(path: Path) -> list[int]:
    if not path.is_file():
        raise ConvertError(f"missing {path.name}")
    indices = []
    for line_no, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            value = int(line)
        except ValueError:
            raise ConvertError(
                f"{path.name}: line {line_no} is not an integer: {line!r}"
            ) from None
        if value < 0:
            raise ConvertError(f"{path.name}: line {line_no} is negative")
        indices.append(value)
    if not indices:
        raise ConvertError(f"{path.name}: no test indices")
    if len(set(indices)) != len(indices):
        raise ConvertError(f"{path.name}: duplicate test indices")
    return indices


def _as_dense(obj, fname: str) -> np.ndarray:
    if hasattr(obj, "toarray"):
        obj = obj.toarray()
    arr = np.asarray(obj, dtype=np.float64)
    if arr.ndim != 2:
        raise ConvertError(f"{fname}: expected a 2-d block, got {arr.ndim}-d")
    return arr


def load_planetoid(input_dir, name: str) -> dict:
    """Read and cross-check the eight files; return the assembled arrays.

    The result dict has dense ``features`` (n x f), integer ``labels`` (n),
    ``edges`` as a sorted list of (u, v) with u < v, ``splits`` and
    ``num_classes``.
    """
    if name not in DATASET_NAMES:
        raise ConvertError(
            f"unknown dataset {name!r}, expected one of {', '.join(DATASET_NAMES)}"
        )
    root = Path(input_dir)
    if not root.is_dir():
        raise ConvertError(f"input directory not found: {root}")

    blocks = {}
    for ext in ("x", "y", "tx", "ty", "allx", "ally"):
        blocks[ext] = _read_pickle(root / f"ind.{name}.{ext}")
    graph = _read_pickle(root / f"ind.{name}.graph")
    test_idx = _read_test_index(root / f"ind.{name}.test.index")

    x = _as_dense(blocks["x"], f"ind.{name}.x")
    tx = _as_dense(blocks["tx"], f"ind.{name}.tx")
    allx = _as_dense(blocks["allx"], f"ind.{name}.allx")
    y = _as_dense(blocks["y"], f"ind.{name}.y")
    ty = _as_dense(blocks["ty"], f"ind.{name}.ty")
    ally = _as_dense(blocks["ally"], f"ind.{name}.ally")

    num_features = allx.shape[1]
    for fname, block in ((f"ind.{name}.x", x), (f"ind.{name}.tx", tx)):
        if block.shape[1] != num_features:
            raise ConvertError(
                f"{fname}: {block.shape[1]} feature columns, allx has {num_features}"
            )
    num_classes = y.shape[1]
    for fname, block in ((f"ind.{name}.ty", ty), (f"ind.{name}.ally", ally)):
        if block.shape[1] != num_classes:
            raise ConvertError(
                f"{fname}: {block.shape[1]} label columns, y has {num_classes}"
            )
    if y.shape[0] != x.shape[0]:
        raise ConvertError(
            f"ind.{name}.y: {y.shape[0]} rows, x has {x.shape[0]}"
        )
    if ty.shape[0] != tx.shape[0]:
        raise ConvertError(
            f"ind.{name}.ty: {ty.shape[0]} rows, tx has {tx.shape[0]}"
        )
    if ally.shape[0] != allx.shape[0]:
        raise ConvertError(
            f"ind.{name}.ally: {ally.shape[0]} rows, allx has {allx.shape[0]}"
        )
    if len(test_idx) != tx.shape[0]:
        raise ConvertError(
            f"ind.{name}.test.index: {len(test_idx)} entries, tx has "
            f"{tx.shape[0]} rows"
        )

    pool = allx.shape[0]
    first_test = min(test_idx)
    if first_test != pool:
        raise ConvertError(
            f"ind.{name}.test.index: test block must start at row {pool}, "
            f"found {first_test}"
        )
    train_size = y.shape[0]
    if pool < train_size + VALIDATION_SIZE:
        raise ConvertError(
            f"ind.{name}.ally: needs at least {train_size + VALIDATION_SIZE} "
            f"rows to carve the {VALIDATION_SIZE}-node validation split, "
            f"found {pool}"
        )

    num_nodes = pool + max(test_idx) - first_test + 1
    features = np.zeros((num_nodes, num_features))
    features[:pool] = allx
    label_rows = np.zeros((num_nodes, num_classes))
    label_rows[:pool] = ally
    for row, idx in enumerate(test_idx):
        features[idx] = tx[row]
        label_rows[idx] = ty[row]
    # gap rows stay all-zero; argmax files them under class 0, and they are
    # excluded from every split below
    labels = np.argmax(label_rows, axis=1).astype(np.int64)

    if not isinstance(graph, dict):
        raise ConvertError(f"ind.{name}.graph: expected a dict adjacency")
    edge_set = set()
    for node, neighbors in graph.items():
        u = int(node)
        if not 0 <= u < num_nodes:
            raise ConvertError(
                f"ind.{name}.graph: node {u} out of range (graph has "
                f"{num_nodes} nodes)"
            )
        for neighbor in neighbors:
            v = int(neighbor)
            if not 0 <= v < num_nodes:
                raise ConvertError(
                    f"ind.{name}.graph: neighbor {v} of node {u} out of range"
                )
            if u == v:
                continue
            edge_set.add((u, v) if u < v else (v, u))
    edges = sorted(edge_set)

    train = list(range(train_size))
    for cls in range(num_classes):
        if not np.any(labels[:train_size] == cls):
            raise ConvertError(
                f"ind.{name}.y: class {cls} has no training rows"
            )
    splits = {
        "train": train,
        "val": list(range(train_size, train_size + VALIDATION_SIZE)),
        "test": sorted(test_idx),
    }
    return {
        "features": features,
        "labels": labels,
        "edges": edges,
        "splits": splits,
        "num_classes": num_classes,
    }


def _write_bundle(data: dict, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    features = data["features"]
    meta = {
        "num_nodes": int(features.shape[0]),
        "num_features": int(features.shape[1]),
        "num_classes": int(data["num_classes"]),
    }
    (out_dir / "meta.json").write_text(
        json.dumps(meta, sort_keys=True, indent=2) + "\n"
    )
    (out_dir / "edges.tsv").write_text(
        "".join(f"{u}\t{v}\n" for u, v in data["edges"])
    )
    (out_dir / "features.csv").write_text(
        "".join(",".join(repr(float(x)) for x in row) + "\n" for row in features)
    )
    (out_dir / "labels.csv").write_text(
        "".join(f"{int(label)}\n" for label in data["labels"])
    )
    (out_dir / "splits.json").write_text(
        json.dumps(data["splits"], sort_keys=True, indent=2) + "\n"
    )


def convert(input_dir, name: str, output_dir) -> Path:
    """Convert one dataset and return the written bundle directory."""
    data = load_planetoid(input_dir, name)
    out = Path(output_dir)
    _write_bundle(data, out)
    return out
