#!/usr/bin/env python3
"""Run an externally trained PyTorch model over a manifest and write
prediction records in the contre JSON-lines format.

Model specs:
  torchscript:<path>      a scripted or traced module
  torchvision:<name>      torchvision.models.get_model(name, weights="DEFAULT")
  <module>:<callable>     a factory returning an nn.Module

Images are decoded to float CHW tensors in [0, 1]; any normalisation the
model needs belongs inside the model.
"""

import argparse
import base64
import csv
import dataclasses
import decimal
import importlib
import json
import pathlib
import sys

import numpy as np
from PIL import Image

VIEWS = ("train_orig", "train_contre", "test_orig", "test_contre")


class ModelLoadError(RuntimeError):
    pass


class SchemaError(ValueError):
    pass


@dataclasses.dataclass
class AdapterConfig:
    model: str
    manifest: pathlib.Path
    view: str
    output: pathlib.Path
    model_id: str
    batch_size: int = 32
    device: str = "cpu"
    feature_layer: str | None = None


@dataclasses.dataclass
class Row:
    sample_id: str
    view_index: int
    path: pathlib.Path
    label: int


def read_manifest(path):
    """Dataset manifests (sample_id,path,label) or generation manifests
    (sample_id,view_index,path,label,ops,seed)."""
    path = pathlib.Path(path)
    base = path.parent
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        if header[:3] != ["sample_id", "path", "label"] and header[:4] != ["sample_id", "view_index", "path", "label"]:
            raise SchemaError(f"{path}: unrecognised manifest header {header}")
        rows = []
        for rec in reader:
            p = pathlib.Path(rec["path"])
            rows.append(Row(rec["sample_id"], int(rec.get("view_index") or 0), p if p.is_absolute() else base / p,
                            int(rec["label"])))
    return rows


def format_number(x):
    """Shortest round-trip decimal laid out as nlohmann::json prints doubles."""
    x = float(x)
    if not np.isfinite(x):
        raise SchemaError(f"non-finite value {x}")
    if x == 0:
        return "-0.0" if np.signbit(x) else "0.0"
    sign, digits, exp = decimal.Decimal(repr(x)).as_tuple()
    digits = "".join(map(str, digits)).lstrip("0")
    stripped = digits.rstrip("0")
    exp += len(digits) - len(stripped)
    digits = stripped
    k = len(digits)
    n = k + exp
    if k <= n <= 15:
        body = digits + "0" * (n - k) + ".0"
    elif 0 < n <= 15:
        body = digits[:n] + "." + digits[n:]
    elif -4 < n <= 0:
        body = "0." + "0" * -n + digits
    else:
        e = n - 1
        mant = digits if k == 1 else digits[0] + "." + digits[1:]
        body = f"{mant}e{'-' if e < 0 else '+'}{abs(e):02d}"
    return ("-" if sign else "") + body


def encode_feature(values):
    return base64.b64encode(np.asarray(values, dtype="<f4").tobytes()).decode("ascii")


def format_record(rec):
    """One JSON line with the field order and number layout of the C++ writer."""
    parts = [
        f'"model_id":{json.dumps(rec["model_id"], ensure_ascii=False)}',
        f'"view":{json.dumps(rec["view"])}',
        f'"sample_id":{json.dumps(rec["sample_id"], ensure_ascii=False)}',
        f'"view_index":{int(rec["view_index"])}',
        f'"label":{int(rec["label"])}',
        f'"pred":{int(rec["pred"])}',
    ]
    if rec.get("logits") is not None:
        parts.append('"logits":[' + ",".join(format_number(v) for v in rec["logits"]) + "]")
    if rec.get("feature") is not None:
        parts.append(f'"feature":"{rec["feature"]}"')
        parts.append(f'"feature_dim":{int(rec["feature_dim"])}')
    return "{" + ",".join(parts) + "}"


def validate_record(rec, lineno):
    def fail(msg):
        raise SchemaError(f"record {lineno}: {msg}: {rec}")

    for key in ("model_id", "sample_id"):
        if not isinstance(rec.get(key), str):
            fail(f"{key} must be a string")
    if rec.get("view") not in VIEWS:
        fail("unknown view")
    for key in ("view_index", "label", "pred"):
        if not isinstance(rec.get(key), int) or rec[key] < 0:
            fail(f"{key} must be a non-negative integer")
    logits = rec.get("logits")
    if logits is not None:
        if not all(np.isfinite(v) for v in logits):
            fail("non-finite logit")
    if rec.get("feature") is not None:
        raw = base64.b64decode(rec["feature"], validate=True)
        if len(raw) != 4 * rec["feature_dim"]:
            fail("feature length does not match feature_dim")
        if not np.all(np.isfinite(np.frombuffer(raw, dtype="<f4"))):
            fail("non-finite feature value")


def load_model(spec, device):
    import torch

    try:
        if spec.startswith("torchscript:"):
            model = torch.jit.load(spec.split(":", 1)[1], map_location=device)
        elif spec.startswith("torchvision:"):
            import torchvision

            model = torchvision.models.get_model(spec.split(":", 1)[1], weights="DEFAULT")
        else:
            module, _, attr = spec.partition(":")
            if not attr:
                raise ValueError("expected torchscript:<path>, torchvision:<name> or <module>:<callable>")
            model = getattr(importlib.import_module(module), attr)()
    except Exception as e:
        raise ModelLoadError(f"cannot load model '{spec}': {e}") from e
    return model.to(device).eval()


def feature_hook(model, layer):
    """Captures the named layer's output, or by default the input of the
    last Linear layer."""
    import torch

    captured = {}
    if layer:
        modules = dict(model.named_modules())
        if layer not in modules:
            raise ModelLoadError(f"no layer named '{layer}'")
        modules[layer].register_forward_hook(lambda m, i, o: captured.__setitem__("x", o))
    else:
        linears = [m for m in model.modules() if isinstance(m, torch.nn.Linear)]
        if not linears:
            raise ModelLoadError("model has no Linear layer; pass --feature-layer")
        linears[-1].register_forward_pre_hook(lambda m, i: captured.__setitem__("x", i[0]))
    return captured


def load_image(path):
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB") if im.mode not in ("L", "RGB") else im, dtype=np.uint8)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return np.ascontiguousarray(arr.transpose(2, 0, 1), dtype=np.float32) / 255.0


def export_predictions(config):
    import torch

    if config.view not in VIEWS:
        raise SchemaError(f"unknown view '{config.view}'")
    rows = read_manifest(config.manifest)
    model = load_model(config.model, config.device)
    captured = feature_hook(model, config.feature_layer)
    lines = []
    with torch.no_grad():
        for start in range(0, len(rows), config.batch_size):
            batch = rows[start:start + config.batch_size]
            x = torch.from_numpy(np.stack([load_image(r.path) for r in batch])).to(config.device)
            logits = model(x).double().cpu().numpy()
            feats = captured["x"].flatten(1).float().cpu().numpy()
            for row, lg, ft in zip(batch, logits, feats):
                rec = {
                    "model_id": config.model_id,
                    "view": config.view,
                    "sample_id": row.sample_id,
                    "view_index": row.view_index,
                    "label": row.label,
                    "pred": int(np.argmax(lg)),
                    "logits": [float(v) for v in lg],
                    "feature": encode_feature(ft),
                    "feature_dim": int(ft.size),
                }
                validate_record(rec, len(lines) + 1)
                lines.append(format_record(rec))
    config.output.parent.mkdir(parents=True, exist_ok=True)
    with open(config.output, "w", encoding="utf-8", newline="\n") as f:
        f.writelines(line + "\n" for line in lines)
    return len(lines)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True, type=pathlib.Path)
    p.add_argument("--view", required=True, choices=VIEWS)
    p.add_argument("--output", required=True, type=pathlib.Path)
    p.add_argument("--model-id", required=True)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--device", default="cpu")
    p.add_argument("--feature-layer")
    args = p.parse_args(argv)
    try:
        n = export_predictions(AdapterConfig(**vars(args)))
    except (ModelLoadError, SchemaError) as e:
        print(f"export_predictions: {e}", file=sys.stderr)
        return 1
    print(f"{n} records written to {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
