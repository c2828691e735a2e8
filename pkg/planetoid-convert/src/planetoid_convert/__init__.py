"""One-shot converter from pickled citation datasets to graph bundles."""

from planetoid_convert.convert import (
    DATASET_NAMES,
    ConvertError,
    convert,
    load_planetoid,
)

__all__ = ["DATASET_NAMES", "ConvertError", "convert", "load_planetoid"]
