"""Self-describing model files.

A model file is JSON: a header (format name, version, method id, seed,
class names), a ``model`` block holding every matrix as
``{"shape": [r, c], "data": <base64 little-endian float64>}``, and a SHA-256
checksum over the canonical encoding of everything else in the document.
Loading verifies the checksum and every shape before rebuilding the model,
so predictions after a round-trip are bit-identical.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import tempfile

import numpy as np

from .data import NormalizationParams
from .deep import DeepModel
from .ensemble import EnsembleDeepModel, TrueEnsemble
from .shallow import HiddenLayerParams, NetworkConfig, ShallowModel

__all__ = ["FORMAT_NAME", "FORMAT_VERSION", "ModelFormatError", "dumps", "loads", "save", "load",
           "atomic_write_text"]

FORMAT_NAME = "randlink-model"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """A model file failed checksum, schema or shape validation."""


def _enc(a):
    a = np.ascontiguousarray(a, dtype="<f8")
    if a.ndim == 1:
        a = a[None, :]
    return {"shape": list(a.shape), "data": base64.b64encode(a.tobytes()).decode("ascii")}


def _dec(obj, expect_shape=None, vector=False):
    try:
        shape = tuple(int(s) for s in obj["shape"])
        raw = base64.b64decode(obj["data"].encode("ascii"), validate=True)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ModelFormatError(f"malformed matrix entry: {exc}") from None
    if len(shape) != 2 or min(shape) < 1 or len(raw) != shape[0] * shape[1] * 8:
        raise ModelFormatError(f"matrix payload of {len(raw)} bytes does not match shape {shape}")
    a = np.frombuffer(raw, dtype="<f8").reshape(shape).astype(np.float64)
    if not np.all(np.isfinite(a)):
        raise ModelFormatError("matrix contains non-finite values")
    if vector:
        if shape[0] != 1:
            raise ModelFormatError(f"expected a row vector, got shape {shape}")
        a = a[0]
    if expect_shape is not None and a.shape != tuple(expect_shape):
        raise ModelFormatError(f"expected shape {tuple(expect_shape)}, got {a.shape}")
    return a


def _layer_enc(layer):
    return {"W": _enc(layer.W), "b": _enc(layer.b), "activation": layer.activation}


def _layer_dec(obj, n_in=None):
    W = _dec(obj["W"])
    if n_in is not None and W.shape[0] != n_in:
        raise ModelFormatError(f"layer expects {W.shape[0]} inputs, chain provides {n_in}")
    b = _dec(obj["b"], (W.shape[1],), vector=True)
    return HiddenLayerParams(W, b, obj["activation"])


def _common_enc(model):
    return {
        "kind": model.kind,
        "config": model.config.to_dict(),
        "norm": {
            "method": model.norm_params.method,
            "shift": _enc(model.norm_params.shift),
            "scale": _enc(model.norm_params.scale),
        },
        "direct_links": bool(model.direct_links),
        "bias_column": bool(model.bias_column),
        "train_accuracy": model.train_accuracy,
    }


def _model_enc(model):
    if isinstance(model, TrueEnsemble):
        return {
            "type": "true_ensemble",
            "kind": model.kind,
            "combine_rule": model.combine_rule,
            "members": [_model_enc(m) for m in model.members],
        }
    block = _common_enc(model)
    if isinstance(model, ShallowModel):
        block.update(type="shallow", layers=[_layer_enc(model.layer)], beta=_enc(model.beta))
    elif isinstance(model, DeepModel):
        block.update(type="deep", layers=[_layer_enc(l) for l in model.layers],
                     beta=_enc(model.beta))
    elif isinstance(model, EnsembleDeepModel):
        block.update(type="implicit_ensemble", layers=[_layer_enc(l) for l in model.layers],
                     betas=[_enc(b) for b in model.betas], combine_rule=model.combine_rule)
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return block


def _design_width(n_hidden_total, d, direct, bias):
    return n_hidden_total + (d if direct else 0) + (1 if bias else 0)


def _model_dec(block):
    kind_of = block.get("type")
    if kind_of == "true_ensemble":
        members = tuple(_model_dec(m) for m in block["members"])
        try:
            return TrueEnsemble(members, block["combine_rule"], block.get("kind", "tedrvfl"))
        except ValueError as exc:
            raise ModelFormatError(str(exc)) from None

    cfg = NetworkConfig.from_dict(block["config"])
    norm = block["norm"]
    shift = _dec(norm["shift"], vector=True)
    scale = _dec(norm["scale"], shift.shape, vector=True)
    params = NormalizationParams(norm["method"], shift, scale)
    d = shift.shape[0]
    direct, bias = bool(block["direct_links"]), bool(block["bias_column"])
    layer_objs = block["layers"]
    common = dict(config=cfg, norm_params=params, direct_links=direct, bias_column=bias,
                  kind=block["kind"], train_accuracy=float(block["train_accuracy"]))

    if kind_of in ("shallow", "deep"):
        layers = []
        width = d
        for obj in layer_objs:
            layer = _layer_dec(obj, width)
            layers.append(layer)
            width = layer.n_out
        rows = _design_width(sum(l.n_out for l in layers), d, direct, bias)
        beta = _dec(block["beta"])
        if beta.shape[0] != rows:
            raise ModelFormatError(f"beta has {beta.shape[0]} rows, design has {rows} columns")
        if kind_of == "shallow":
            if len(layers) != 1:
                raise ModelFormatError("shallow model must have exactly one layer")
            return ShallowModel(layers[0], beta, **common)
        return DeepModel(tuple(layers), beta, **common)

    if kind_of == "implicit_ensemble":
        layers = []
        width = d
        for obj in layer_objs:
            layer = _layer_dec(obj, width)
            layers.append(layer)
            width = layer.n_out + (d if direct else 0)
        betas = tuple(_dec(b) for b in block["betas"])
        if len(betas) != len(layers):
            raise ModelFormatError("one beta block per layer required")
        K = betas[0].shape[1]
        for layer, beta in zip(layers, betas):
            rows = _design_width(layer.n_out, d, direct, bias)
            if beta.shape != (rows, K):
                raise ModelFormatError(f"beta shape {beta.shape} does not match ({rows}, {K})")
        return EnsembleDeepModel(tuple(layers), betas, combine_rule=block["combine_rule"], **common)

    raise ModelFormatError(f"unknown model type {kind_of!r}")


def _checksum(doc):
    body = {k: v for k, v in doc.items() if k != "checksum"}
    canon = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def dumps(model, method=None, class_names=()):
    block = _model_enc(model)
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "method": method or model.kind,
        "seed": model.config.seed,
        "class_names": list(class_names),
        "model": block,
    }
    doc["checksum"] = _checksum(doc)
    return json.dumps(doc, indent=1, sort_keys=True)


def loads(text):
    """Parse a model file; returns ``(model, header)``."""
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise ModelFormatError("not a randlink model file")
    if doc.get("version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {doc.get('version')!r}")
    if _checksum(doc) != doc.get("checksum"):
        raise ModelFormatError("model checksum mismatch; file is corrupted")
    block = doc.get("model")
    if not isinstance(block, dict):
        raise ModelFormatError("model block missing")
    try:
        model = _model_dec(block)
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"invalid model block: {exc}") from None
    try:
        header = {k: doc[k] for k in ("method", "seed", "class_names", "version")}
    except KeyError as exc:
        raise ModelFormatError(f"missing header field {exc}") from None
    return model, header


def atomic_write_text(path, text):
    """Write via a temp file in the target directory, then rename over ``path``."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save(path, model, method=None, class_names=()):
    atomic_write_text(path, dumps(model, method, class_names))


def load(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ModelFormatError(f"model file is not UTF-8: {exc}") from None
    return loads(text)
