"""MOESAC1 checkpoint format.

Layout::

    b"MOESAC1\\n"
    uint32 LE   length of the JSON header in bytes
    JSON header {"version", "state_dim", "n_actions", "sac", "meta", "arrays": [[name, shape], ...]}
    float64 LE  raw array data, concatenated in header order

Parameters round-trip bit-exactly. Optimizer moments are not stored.
"""

from __future__ import annotations

import dataclasses
import json
import struct
from pathlib import Path

import numpy as np

from .config import SacConfig
from .errors import CheckpointFormatError
from .sac import SacAgent

MAGIC = b"MOESAC1\n"
VERSION = 1


def _named_arrays(agent: SacAgent) -> list[tuple[str, np.ndarray]]:
    out = []
    for net_name, net in agent.networks.items():
        for i, p in enumerate(net.params):
            kind = "W" if i % 2 == 0 else "b"
            out.append((f"{net_name}.{kind}{i // 2}", p))
    out.append(("log_alpha", agent.log_alpha))
    return out


def save_checkpoint(agent: SacAgent, path: str | Path) -> Path:
    path = Path(path)
    arrays = _named_arrays(agent)
    sac = dataclasses.asdict(agent.config)
    sac["hidden"] = list(sac["hidden"])
    header = {
        "version": VERSION,
        "state_dim": agent.state_dim,
        "n_actions": agent.n_actions,
        "sac": sac,
        "meta": agent.meta,
        "arrays": [[name, list(a.shape)] for name, a in arrays],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for _, a in arrays:
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())
    return path


def load_checkpoint(path: str | Path) -> SacAgent:
    data = Path(path).read_bytes()
    if not data.startswith(MAGIC):
        raise CheckpointFormatError(f"{path}: missing MOESAC1 header")
    offset = len(MAGIC)
    try:
        (hlen,) = struct.unpack_from("<I", data, offset)
        offset += 4
        header = json.loads(data[offset : offset + hlen].decode("utf-8"))
    except (struct.error, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointFormatError(f"{path}: corrupt header ({exc})") from exc
    offset += hlen
    if header.get("version") != VERSION:
        raise CheckpointFormatError(f"{path}: unsupported version {header.get('version')}")

    sac = dict(header["sac"])
    sac["hidden"] = tuple(sac["hidden"])
    agent = SacAgent(header["state_dim"], header["n_actions"], SacConfig(**sac))
    agent.meta = header["meta"]
    arrays = dict(_named_arrays(agent))
    for name, shape in header["arrays"]:
        target = arrays.get(name)
        if target is None or list(target.shape) != shape:
            raise CheckpointFormatError(f"{path}: unexpected array {name} {shape}")
        nbytes = 8 * int(np.prod(shape, dtype=np.int64))
        if offset + nbytes > len(data):
            raise CheckpointFormatError(f"{path}: truncated at {name}")
        target[...] = np.frombuffer(data, dtype="<f8", count=nbytes // 8, offset=offset).reshape(shape)
        offset += nbytes
    if offset != len(data):
        raise CheckpointFormatError(f"{path}: {len(data) - offset} trailing bytes")
    return agent
