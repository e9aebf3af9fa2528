"""``DGCK`` checkpoint files.

Layout (little-endian)::

    b"DGCK" | u16 version | u8 variant tag | u32 json_len | JSON metadata
    | u32 n_tensors | (u16 name_len | name | TENS record) * n_tensors
    | 32-byte BLAKE2b digest of everything before it

The JSON block holds the run and model configuration, the data split,
the inhibitor SMILES, the pocket (atom types and typed edges) and the
optimizer step counters.  The tensor table holds every parameter and the
Adam moment estimates.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..nets import ModelConfig
from ..numcore import AdamState, CorruptTensor, read_tensor, write_tensor
from ..pocket.matrices import PocketMatrices
from ..pocket.types import N_POCKET_EDGES, N_POCKET_TYPES
from .config import Variant
from .errors import CheckpointCorrupt
from .model import GANModel

MAGIC = b"DGCK"
VERSION = 1
DIGEST = 32


@dataclass
class Checkpoint:
    variant: Variant
    meta: dict
    tensors: dict[str, np.ndarray]

    def model(self) -> GANModel:
        """Rebuild the networks and optimizer states stored in this checkpoint."""
        try:
            mcfg = ModelConfig.from_dict(self.meta["model_config"])
            betas = tuple(self.meta["betas"])
        except (KeyError, TypeError, ValueError) as exc:
            raise CheckpointCorrupt(f"bad model configuration: {exc}") from exc
        model = GANModel(mcfg, self.variant, np.random.default_rng(0), betas)
        for name, p in model.params("g1", "d1", "g2", "d2").items():
            arr = self.tensors.get(name)
            if arr is None or arr.shape != p.shape:
                raise CheckpointCorrupt(f"parameter {name} missing or misshapen")
            p.data = arr.copy()
        for net, state in model.opt.items():
            state.step = int(self.meta["adam_steps"].get(net, 0))
            for key, arr in self.tensors.items():
                for slot, store in (("m", state.m), ("v", state.v)):
                    prefix = f"adam.{slot}."
                    if key.startswith(prefix) and key[len(prefix):].split(".", 1)[0] == net:
                        store[key[len(prefix):]] = arr.copy()
        return model

    def pocket(self) -> PocketMatrices | None:
        p = self.meta.get("pocket")
        if not p:
            return None
        rows = int(p["rows"])
        types = np.asarray(p["types"], dtype=np.int64)
        edges = np.zeros((rows, rows), dtype=np.int64)
        for i, j, t in p["edges"]:
            edges[i, j] = edges[j, i] = t
        return PocketMatrices(np.eye(N_POCKET_TYPES, dtype=np.uint8)[types],
                              np.eye(N_POCKET_EDGES, dtype=np.uint8)[edges])


def pocket_meta(p: PocketMatrices | None) -> dict | None:
    if p is None:
        return None
    edges = p.adjacency.argmax(-1)
    iu, ju = np.nonzero(np.triu(edges, 1))
    return {"rows": int(p.n_atoms), "types": p.annotation.argmax(-1).tolist(),
            "edges": [[int(i), int(j), int(edges[i, j])] for i, j in zip(iu, ju)]}


def model_tensors(model: GANModel) -> dict[str, np.ndarray]:
    out = {k: v.data for k, v in model.params("g1", "d1", "g2", "d2").items()}
    for state in model.opt.values():
        for k in sorted(state.m):
            out[f"adam.m.{k}"] = state.m[k]
            out[f"adam.v.{k}"] = state.v[k]
    return out


def encode_checkpoint(variant: Variant, meta: dict, tensors: dict[str, np.ndarray]) -> bytes:
    buf = io.BytesIO()
    blob = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    buf.write(MAGIC)
    buf.write(struct.pack("<HBI", VERSION, variant.tag, len(blob)))
    buf.write(blob)
    buf.write(struct.pack("<I", len(tensors)))
    for name in tensors:
        raw = name.encode("utf-8")
        buf.write(struct.pack("<H", len(raw)))
        buf.write(raw)
        write_tensor(buf, tensors[name])
    body = buf.getvalue()
    return body + hashlib.blake2b(body, digest_size=DIGEST).digest()


def save_checkpoint(path: str | Path, variant: Variant, meta: dict, tensors: dict[str, np.ndarray]) -> Path:
    """Write atomically: a temporary file in the same directory, then rename."""
    path = Path(path)
    data = encode_checkpoint(variant, meta, tensors)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)
    return path


def decode_checkpoint(data: bytes) -> Checkpoint:
    if len(data) < 4 + 7 + DIGEST or data[:4] != MAGIC:
        raise CheckpointCorrupt("not a checkpoint (bad magic or too short)")
    body, digest = data[:-DIGEST], data[-DIGEST:]
    if hashlib.blake2b(body, digest_size=DIGEST).digest() != digest:
        raise CheckpointCorrupt("checksum mismatch")
    version, tag, n_json = struct.unpack_from("<HBI", body, 4)
    if version != VERSION:
        raise CheckpointCorrupt(f"unsupported checkpoint version {version}")
    if tag >= len(Variant):
        raise CheckpointCorrupt(f"unknown variant tag {tag}")
    fh = io.BytesIO(body[11:])
    try:
        meta = json.loads(fh.read(n_json).decode("utf-8"))
        (count,) = struct.unpack("<I", fh.read(4))
        tensors = {}
        for _ in range(count):
            (k,) = struct.unpack("<H", fh.read(2))
            name = fh.read(k).decode("utf-8")
            tensors[name] = read_tensor(fh)
    except (ValueError, struct.error, CorruptTensor, UnicodeDecodeError) as exc:
        raise CheckpointCorrupt(f"malformed checkpoint body: {exc}") from exc
    if fh.read(1):
        raise CheckpointCorrupt("trailing bytes after the tensor table")
    return Checkpoint(list(Variant)[tag], meta, tensors)


def load_checkpoint(path: str | Path) -> Checkpoint:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointCorrupt(f"cannot read checkpoint {path}: {exc}") from exc
    return decode_checkpoint(data)
