"""Dataset persistence: 8-bit grayscale PNG pairs plus a JSON-lines manifest.

Images store round(intensity * 255); labels store the raw class index per
pixel. One manifest record per sample:
  {"id": ..., "image_path": ..., "label_path": ..., "split": ..., "spacing": ...}
with label_path omitted for unlabeled samples. Paths are relative to the
manifest's directory. A meta.json sidecar records num_classes and, for
generated datasets, the phantom spec.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image as PilImage

from ..core.types import Image, LabelMap
from ..errors import InvalidInputError
from .splits import Sample, SplitDataset

MANIFEST_NAME = "manifest.jsonl"
META_NAME = "meta.json"


def save_image_png(img: Image, path) -> None:
    data = np.rint(img.data * 255.0).astype(np.uint8)
    PilImage.fromarray(data, mode="L").save(path, format="PNG")


def load_image_png(path, spacing: float = 1.0) -> Image:
    arr = np.asarray(PilImage.open(path).convert("L"), dtype=np.float64)
    return Image(arr / 255.0, spacing)


def save_label_png(lbl: LabelMap, path) -> None:
    if lbl.num_classes > 256:
        raise InvalidInputError("PNG label storage supports at most 256 classes")
    PilImage.fromarray(lbl.data.astype(np.uint8), mode="L").save(path, format="PNG")


def load_label_png(path, num_classes: int) -> LabelMap:
    arr = np.asarray(PilImage.open(path), dtype=np.int64)
    return LabelMap(arr, num_classes)


def save_manifest(ds: SplitDataset, out_dir, extra_meta: dict | None = None) -> Path:
    """Write PNGs and the manifest under out_dir; returns the manifest path."""
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "labels").mkdir(parents=True, exist_ok=True)
    records = []
    num_classes = None
    for split_name, samples in ds.splits().items():
        for s in samples:
            image_rel = f"images/{s.sample_id}.png"
            save_image_png(s.image, out_dir / image_rel)
            rec = {
                "id": s.sample_id,
                "image_path": image_rel,
                "split": split_name,
                "spacing": s.image.spacing,
            }
            if s.label is not None:
                label_rel = f"labels/{s.sample_id}.png"
                save_label_png(s.label, out_dir / label_rel)
                rec["label_path"] = label_rel
                num_classes = max(num_classes or 0, s.label.num_classes)
            records.append(rec)
    manifest = out_dir / MANIFEST_NAME
    with open(manifest, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec, sort_keys=True) + "\n")
    meta = {"num_classes": num_classes}
    meta.update(extra_meta or {})
    with open(out_dir / META_NAME, "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
    return manifest


def load_manifest(path, num_classes: int | None = None) -> SplitDataset:
    """Load a dataset from its manifest (or its directory)."""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    if not path.is_file():
        raise InvalidInputError(f"manifest not found: {path}")
    root = path.parent
    if num_classes is None:
        meta_path = root / META_NAME
        if meta_path.is_file():
            with open(meta_path, encoding="utf-8") as f:
                num_classes = json.load(f).get("num_classes")
    buckets: dict[str, list[Sample]] = {"labeled": [], "unlabeled": [], "validation": [], "test": []}
    records = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise InvalidInputError(f"malformed manifest record at line {lineno}: {e}") from None
    if num_classes is None:
        # no meta sidecar: infer from the stored label values
        peak = 0
        for rec in records:
            if "label_path" in rec:
                arr = np.asarray(PilImage.open(root / rec["label_path"]))
                peak = max(peak, int(arr.max()))
        num_classes = peak + 1
    for rec in records:
        for key in ("id", "image_path", "split"):
            if key not in rec:
                raise InvalidInputError(f"manifest record missing {key!r}: {rec}")
        split = rec["split"]
        if split not in buckets:
            raise InvalidInputError(f"record {rec['id']!r} has unknown split {split!r}")
        image_path = root / rec["image_path"]
        if not image_path.is_file():
            raise InvalidInputError(f"record {rec['id']!r}: image file missing: {image_path}")
        img = load_image_png(image_path, spacing=float(rec.get("spacing", 1.0)))
        lbl = None
        if "label_path" in rec:
            label_path = root / rec["label_path"]
            if not label_path.is_file():
                raise InvalidInputError(f"record {rec['id']!r}: label file missing: {label_path}")
            lbl = load_label_png(label_path, num_classes)
            if lbl.data.shape != img.data.shape:
                raise InvalidInputError(
                    f"record {rec['id']!r}: label dims {lbl.data.shape} != image dims {img.data.shape}"
                )
        buckets[split].append(Sample(rec["id"], img, lbl))
    return SplitDataset(**buckets)
