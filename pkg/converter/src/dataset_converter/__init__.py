"""Dataset conversion into the neutral JSON graph container."""

from .container import CONTAINER_FORMAT_VERSION, graph_record, write_container
from .convert import (
    DATASETS,
    PLANETOID_DATASETS,
    ConversionManifest,
    checksum_sources,
    convert,
    default_manifest_path,
)
from .errors import ConversionError
from .planetoid import assemble_planetoid, load_planetoid, planetoid_files
from .ppi import PPI_FILES, assemble_ppi, load_ppi

__all__ = [
    "CONTAINER_FORMAT_VERSION",
    "ConversionError",
    "ConversionManifest",
    "DATASETS",
    "PLANETOID_DATASETS",
    "PPI_FILES",
    "assemble_planetoid",
    "assemble_ppi",
    "checksum_sources",
    "convert",
    "default_manifest_path",
    "graph_record",
    "load_planetoid",
    "load_ppi",
    "planetoid_files",
    "write_container",
]
