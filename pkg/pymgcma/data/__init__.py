# pymgcma/data/__init__.py

"""
Feature files, manifests, synthetic data and session folds.
"""

from .batch import LabeledPair, PairBatch
from .feature_files import (
    FEATURE_MAGIC,
    FEATURE_VERSION,
    FeatureSequence,
    encode_feature_sequence,
    read_feature_file,
    read_feature_header,
    write_feature_file,
)
from .folds import Fold, split_folds
from .manifest import DatasetManifest, ManifestRecord, load_manifest, write_manifest
from .synthetic import generate_synthetic

__all__ = [
    "FEATURE_MAGIC",
    "FEATURE_VERSION",
    "FeatureSequence",
    "read_feature_file",
    "read_feature_header",
    "write_feature_file",
    "encode_feature_sequence",
    "LabeledPair",
    "PairBatch",
    "ManifestRecord",
    "DatasetManifest",
    "load_manifest",
    "write_manifest",
    "generate_synthetic",
    "Fold",
    "split_folds",
]
