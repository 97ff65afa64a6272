"""End-to-end conversion: source artifacts -> container + manifest."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .container import graph_record, write_container
from .errors import ConversionError
from .planetoid import assemble_planetoid, load_planetoid, planetoid_files
from .ppi import PPI_FILES, assemble_ppi, load_ppi

PLANETOID_DATASETS = ("cora", "citeseer", "pubmed")
DATASETS = PLANETOID_DATASETS + ("ppi",)


@dataclass
class ConversionManifest:
    """Summary emitted alongside every container: provenance and counts."""

    dataset: str
    sources: list = field(default_factory=list)  # [{"file": name, "sha256": hex}]
    num_graphs: int = 0
    num_nodes: int = 0
    num_edges: int = 0
    num_features: int = 0
    num_classes: int = 0
    splits: dict = field(default_factory=dict)  # node counts per split

    def to_dict(self) -> dict:
        return asdict(self)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def checksum_sources(src_dir, files, expected: dict | None = None) -> list[dict]:
    src_dir = Path(src_dir)
    out = []
    for name in files:
        path = src_dir / name
        if not path.exists():
            raise ConversionError(f"missing source file: {name}")
        digest = _sha256(path)
        if expected is not None and name in expected and expected[name] != digest:
            raise ConversionError(
                f"checksum mismatch for {name}: expected {expected[name]}, got {digest}"
            )
        out.append({"file": name, "sha256": digest})
    return out


def default_manifest_path(out_path) -> Path:
    out_path = Path(out_path)
    return out_path.with_name(out_path.stem + ".manifest.json")


def convert(
    src_dir,
    dataset: str,
    out_path,
    expected_checksums: dict | None = None,
    manifest_path=None,
) -> ConversionManifest:
    """Convert one dataset and write the container plus its manifest."""
    if dataset not in DATASETS:
        raise ConversionError(
            f"unknown dataset {dataset!r}; expected one of {', '.join(DATASETS)}"
        )
    files = planetoid_files(dataset) if dataset in PLANETOID_DATASETS else list(PPI_FILES)
    sources = checksum_sources(src_dir, files, expected_checksums)

    if dataset in PLANETOID_DATASETS:
        assembled = [assemble_planetoid(load_planetoid(src_dir, dataset))]
        label_mode = "single"
    else:
        assembled = assemble_ppi(load_ppi(src_dir))
        label_mode = "multi"

    records = [
        graph_record(
            num_nodes=a["num_nodes"],
            edges=a["edges"],
            features=a["features"],
            labels=a["labels"],
            label_mode=label_mode,
            train_idx=a["train_idx"],
            val_idx=a["val_idx"],
            test_idx=a["test_idx"],
        )
        for a in assembled
    ]
    write_container(records, out_path)

    manifest = ConversionManifest(
        dataset=dataset,
        sources=sources,
        num_graphs=len(assembled),
        num_nodes=sum(a["num_nodes"] for a in assembled),
        num_edges=sum(len(a["edges"]) for a in assembled),
        num_features=assembled[0]["num_features"],
        num_classes=assembled[0]["num_classes"],
        splits={
            split: sum(len(a[f"{split}_idx"]) for a in assembled)
            for split in ("train", "val", "test")
        },
    )
    manifest.write(manifest_path or default_manifest_path(out_path))
    return manifest
