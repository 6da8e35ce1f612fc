"""
Binary state files.

Layout:
    b"TNS1"                      magic
    uint32 little-endian         format version
    uint64 little-endian         length of the JSON header in bytes
    JSON header (UTF-8)          {"graph", "tensors": [{"vertex", "indices"}], "metadata"}
    tensor data                  per vertex, '<c16' in C order, in header order
"""

import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from .network import NetworkGraph, TensorNetworkState
from .tensor_core import Index, IndexedTensor
from .utils import json_default
from .validators import ValidationError, validate_file_path

logger = logging.getLogger(__name__)

MAGIC = b"TNS1"
FORMAT_VERSION = 1
_PREAMBLE = struct.Struct("<4sIQ")
_DTYPE = np.dtype("<c16")


def save_state(
    state: TensorNetworkState, path: Union[str, Path], metadata: Optional[Dict[str, Any]] = None
) -> Path:
    """Write the state with its graph and free-form metadata."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "graph": state.graph.to_dict(),
        "tensors": [
            {"vertex": v, "indices": [[i.label, i.dimension] for i in t.indices]}
            for v, t in enumerate(state.tensors)
        ],
        "metadata": metadata or {},
    }
    encoded = json.dumps(header, sort_keys=True, default=json_default).encode("utf-8")
    with path.open("wb") as handle:
        handle.write(_PREAMBLE.pack(MAGIC, FORMAT_VERSION, len(encoded)))
        handle.write(encoded)
        for tensor in state.tensors:
            handle.write(np.ascontiguousarray(tensor.data, dtype=_DTYPE).tobytes())
    logger.info("Saved %d-qubit state to %s", state.n_qubits, path)
    return path


def load_state(path: Union[str, Path]) -> Tuple[TensorNetworkState, Dict[str, Any]]:
    """
    Read a state file.

    Raises:
        ValidationError: Missing file, bad magic, unknown version or truncated data
    """
    path = validate_file_path(path, must_exist=True)
    raw = path.read_bytes()
    if len(raw) < _PREAMBLE.size:
        raise ValidationError(f"{path} is too short to be a state file")
    magic, version, header_length = _PREAMBLE.unpack_from(raw)
    if magic != MAGIC:
        raise ValidationError(f"{path} is not a state file (magic {magic!r})")
    if version != FORMAT_VERSION:
        raise ValidationError(f"{path} has state format version {version}; this build reads {FORMAT_VERSION}")

    offset = _PREAMBLE.size
    try:
        header = json.loads(raw[offset: offset + header_length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ValidationError(f"{path}: corrupt header: {e}") from e
    offset += header_length

    graph = NetworkGraph.from_dict(header["graph"])
    tensors = []
    for entry in header["tensors"]:
        indices = [Index(label, int(dim)) for label, dim in entry["indices"]]
        count = int(np.prod([i.dimension for i in indices], dtype=np.int64))
        size = count * _DTYPE.itemsize
        if offset + size > len(raw):
            raise ValidationError(f"{path}: data for vertex {entry['vertex']} is truncated")
        data = np.frombuffer(raw, dtype=_DTYPE, count=count, offset=offset)
        tensors.append(IndexedTensor(indices, data))
        offset += size
    if offset != len(raw):
        logger.warning("%s has %d trailing bytes", path, len(raw) - offset)

    state = TensorNetworkState(graph, tuple(tensors))
    logger.debug("Loaded %d-qubit state from %s", state.n_qubits, path)
    return state, header.get("metadata", {})
