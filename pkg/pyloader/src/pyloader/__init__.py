"""Zero-copy reader for traffic-graph sample datasets (.crg + manifest)."""
from .loader import (
    MAGIC,
    SUPPORTED_FORMAT_VERSION,
    SUPPORTED_MANIFEST_VERSION,
    DatasetReader,
    LoadedSample,
    LoaderError,
    ReadError,
    UnsupportedVersionError,
    load_dataset,
    parse_sample,
    to_hetero_dict,
)

__version__ = "0.1.0"

__all__ = [
    "MAGIC",
    "SUPPORTED_FORMAT_VERSION",
    "SUPPORTED_MANIFEST_VERSION",
    "DatasetReader",
    "LoadedSample",
    "LoaderError",
    "ReadError",
    "UnsupportedVersionError",
    "load_dataset",
    "parse_sample",
    "to_hetero_dict",
    "__version__",
]
