"""Single-file model archives.

Layout (all integers little-endian)::

    8 bytes   magic  b"LSTMCRF\\0"
    4 bytes   uint32 format version
    8 bytes   uint64 manifest length N
    N bytes   UTF-8 JSON manifest (vocabulary, tags, hyperparameters,
              config, tensor names and shapes, CRC32 of the tensor block)
    ...       float64 tensors, C order, in manifest order

The manifest is plain text, so the format can be read without this package.
"""

import json
import struct
import zlib

import numpy as np

from .corpus import TagSet
from .crf import CRF, iob_transition_mask
from .embeddings import EmbeddingTable
from .encoder import BiEncoder
from .estimator import BiLSTMCRFTagger
from .exceptions import ArchiveError, LstmCrfError
from .nncore import make_rng
from .training import TrainConfig

MAGIC = b"LSTMCRF\0"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sIQ")


def dumps(tagger):
    """Serialize a fitted tagger to bytes."""
    if not hasattr(tagger, "encoder_"):
        raise ArchiveError("only fitted taggers can be saved")
    params = tagger.params_
    blob = b"".join(np.ascontiguousarray(p.value, dtype="<f8").tobytes() for p in params)
    config = getattr(tagger, "config_", None)
    manifest = {
        "format_version": FORMAT_VERSION,
        "classes": list(tagger.tag_set_.classes),
        "tags": list(tagger.tag_set_.tags),
        "vocab": tagger.embeddings_.tokens,
        "origin": tagger.embeddings_.origin,
        "unk": tagger.embeddings_.unk,
        "estimator": tagger.get_params(),
        "n_tags": tagger.encoder_.n_tags,
        "config": config.to_dict() if config is not None else None,
        "tensors": [{"name": p.name, "shape": list(p.value.shape)} for p in params],
        "crc32": zlib.crc32(blob),
        "best_epoch": getattr(tagger, "best_epoch_", None),
    }
    text = json.dumps(manifest, sort_keys=True, ensure_ascii=False).encode("utf-8")
    return _HEADER.pack(MAGIC, FORMAT_VERSION, len(text)) + text + blob


def loads(data):
    """Rebuild a tagger from :func:`dumps` output."""
    if len(data) < _HEADER.size:
        raise ArchiveError("file too short to be a model archive")
    magic, version, n = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ArchiveError("not a model archive (bad magic)")
    if version != FORMAT_VERSION:
        raise ArchiveError(f"unsupported archive version {version}")
    start = _HEADER.size
    try:
        manifest = json.loads(data[start:start + n].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ArchiveError(f"corrupt manifest: {exc}") from None
    blob = data[start + n:]
    try:
        if zlib.crc32(blob) != manifest["crc32"]:
            raise ArchiveError("tensor data checksum mismatch")
        tagger = BiLSTMCRFTagger(**manifest["estimator"])
        tag_set = TagSet(tuple(manifest["classes"]))
        if list(tag_set.tags) != manifest["tags"]:
            raise ArchiveError("tag list does not match the class list")
        arrays = []
        offset = 0
        for entry in manifest["tensors"]:
            shape = tuple(entry["shape"])
            size = int(np.prod(shape)) * 8
            if offset + size > len(blob):
                raise ArchiveError(f"truncated tensor {entry['name']}")
            arrays.append(np.frombuffer(blob, dtype="<f8", count=size // 8, offset=offset)
                          .reshape(shape).astype(np.float64))
            offset += size
        if offset != len(blob):
            raise ArchiveError("trailing bytes after the last tensor")
        names = [s["name"] for s in manifest["tensors"]]
        emb = arrays[names.index("embeddings")]
        tagger.tag_set_ = tag_set
        tagger.embeddings_ = EmbeddingTable(manifest["vocab"], emb, manifest["origin"],
                                            unk=manifest["unk"])
        tagger.encoder_ = BiEncoder(emb.shape[1], tagger.hidden_size, manifest["n_tags"],
                                    cell=tagger.cell, rng=make_rng(0), init=tagger.init)
        if tagger.output_layer == "crf":
            mask = iob_transition_mask(tag_set) if tagger.constrain_transitions else None
            tagger.crf_ = CRF(manifest["n_tags"], constraint_mask=mask)
        else:
            tagger.crf_ = None
        params = tagger.params_
        if [p.name for p in params] != names:
            raise ArchiveError("tensor list does not match the model layout")
        for p, arr in zip(params, arrays):
            if p.value.shape != arr.shape:
                raise ArchiveError(f"shape mismatch for {p.name}: {arr.shape} vs {p.value.shape}")
            p.value[...] = arr
        if manifest.get("config") is not None:
            tagger.config_ = TrainConfig.from_dict(manifest["config"])
        tagger.best_epoch_ = manifest.get("best_epoch")
    except ArchiveError:
        raise
    except (KeyError, TypeError, ValueError, LstmCrfError) as exc:
        raise ArchiveError(f"corrupt archive: {exc}") from None
    return tagger


def save_model(tagger, path):
    with open(path, "wb") as fh:
        fh.write(dumps(tagger))


def load_model(path):
    with open(path, "rb") as fh:
        return loads(fh.read())
