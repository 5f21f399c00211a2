"""Binary parameter checkpoints.

Layout: the magic string "ADVT1", a little-endian uint32 header
(kind, ndims, dims...), then every tensor as raw little-endian float64 in
declaration order. LSTM tensors are written per gate (input, forget, cell,
output), each gate as weight, recurrent, bias. A JSON sidecar next to the
file records the dims and the training seed.
"""

from __future__ import annotations

import json
import os

import numpy as np

from advtext.errors import InvalidCheckpointError
from advtext.nn.params import ClassifierParams, LMParams

MAGIC = b"ADVT1"
KIND_CLASSIFIER = 1
KIND_LM = 2
_KIND_NAMES = {KIND_CLASSIFIER: "classifier", KIND_LM: "lm"}


def _gate_arrays(params, hidden):
    out = []
    for k in range(4):
        sl = slice(k * hidden, (k + 1) * hidden)
        out += [params.wx[:, sl], params.wh[:, sl], params.b[sl]]
    return out


def _declaration_order(params):
    h = params.wh.shape[0]
    arrays = [params.embedding] + _gate_arrays(params, h)
    if isinstance(params, ClassifierParams):
        arrays += [params.w1, params.b1, params.w2, params.b2]
    else:
        arrays += [params.out_w, params.out_b]
    return arrays


def _dims_of(params):
    if isinstance(params, ClassifierParams):
        d = params.dims
        return KIND_CLASSIFIER, [d.vocab_rows, d.embed_dim, d.hidden_dim, d.head_dim, d.n_classes]
    d = params.dims
    return KIND_LM, [d.vocab_rows, d.embed_dim, d.hidden_dim]


def save_checkpoint(path, params, seed=None):
    """Write params (ClassifierParams or LMParams) plus the JSON sidecar."""
    kind, dims = _dims_of(params)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(np.asarray([kind, len(dims)] + dims, dtype="<u4").tobytes())
        for arr in _declaration_order(params):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    sidecar = {
        "kind": _KIND_NAMES[kind],
        "dims": dims,
        "seed": seed,
    }
    with open(str(path) + ".json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _take(buf, offset, shape):
    n = int(np.prod(shape))
    end = offset + n
    if end > buf.size:
        raise InvalidCheckpointError("checkpoint file truncated")
    return buf[offset:end].reshape(shape).astype(np.float64), end


def load_checkpoint(path):
    """Read a checkpoint; returns (params, meta) with meta = kind/dims/seed."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(MAGIC)] != MAGIC:
        raise InvalidCheckpointError(f"{path}: bad magic")
    header = np.frombuffer(blob, dtype="<u4", count=2, offset=len(MAGIC))
    kind, ndims = int(header[0]), int(header[1])
    if kind not in _KIND_NAMES:
        raise InvalidCheckpointError(f"{path}: unknown checkpoint kind {kind}")
    dims = [int(v) for v in np.frombuffer(blob, dtype="<u4", count=ndims, offset=len(MAGIC) + 8)]
    body = np.frombuffer(blob, dtype="<f8", offset=len(MAGIC) + 8 + 4 * ndims)

    if kind == KIND_CLASSIFIER:
        if ndims != 5:
            raise InvalidCheckpointError(f"{path}: classifier checkpoints carry 5 dims, got {ndims}")
        rows, d, h, f, n_classes = dims
        off = 0
        embedding, off = _take(body, off, (rows, d))
        wx = np.empty((d, 4 * h))
        wh = np.empty((h, 4 * h))
        b = np.empty(4 * h)
        for k in range(4):
            sl = slice(k * h, (k + 1) * h)
            wx[:, sl], off = _take(body, off, (d, h))
            wh[:, sl], off = _take(body, off, (h, h))
            b[sl], off = _take(body, off, (h,))
        w1, off = _take(body, off, (h, f))
        b1, off = _take(body, off, (f,))
        w2, off = _take(body, off, (f, n_classes))
        b2, off = _take(body, off, (n_classes,))
        params = ClassifierParams(embedding, wx, wh, b, w1, b1, w2, b2)
    else:
        if ndims != 3:
            raise InvalidCheckpointError(f"{path}: lm checkpoints carry 3 dims, got {ndims}")
        rows, d, h = dims
        off = 0
        embedding, off = _take(body, off, (rows, d))
        wx = np.empty((d, 4 * h))
        wh = np.empty((h, 4 * h))
        b = np.empty(4 * h)
        for k in range(4):
            sl = slice(k * h, (k + 1) * h)
            wx[:, sl], off = _take(body, off, (d, h))
            wh[:, sl], off = _take(body, off, (h, h))
            b[sl], off = _take(body, off, (h,))
        out_w, off = _take(body, off, (h, rows))
        out_b, off = _take(body, off, (rows,))
        params = LMParams(embedding, wx, wh, b, out_w, out_b)

    if off != body.size:
        raise InvalidCheckpointError(f"{path}: {body.size - off} unexpected trailing floats")

    meta = {"kind": _KIND_NAMES[kind], "dims": dims, "seed": None}
    sidecar = str(path) + ".json"
    if os.path.exists(sidecar):
        with open(sidecar, "r", encoding="utf-8") as fh:
            meta["seed"] = json.load(fh).get("seed")
    return params, meta
