"""JSON readers/writers for states, channels, Hamiltonian paths and TFD specs.

Complex numbers are two-element ``[re, im]`` arrays; matrices are row-major
lists of rows.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .channels import KrausChannel, new_channel
from .dynamics import HamiltonianPath, TfdSpec
from .states import PureState


class MalformedInput(ValueError):
    pass


def _complex(x) -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    raise MalformedInput(f"expected [re, im], got {x!r}")


def _complex_matrix(rows) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise MalformedInput("matrix must be a non-empty list of rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise MalformedInput("ragged matrix rows")
    return np.array([[_complex(v) for v in r] for r in rows], dtype=complex)


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [float(f"{z.real:.12g}"), float(f"{z.imag:.12g}")]


def encode_matrix(m) -> list:
    return [[encode_complex(v) for v in row] for row in np.asarray(m)]


def _load(path_or_doc):
    if isinstance(path_or_doc, dict):
        return path_or_doc
    try:
        return json.loads(Path(path_or_doc).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInput(f"cannot read {path_or_doc}: {exc}") from exc


def state_from_json(doc) -> PureState:
    doc = _load(doc)
    try:
        dims = [int(d) for d in doc["dims"]]
        amps = [_complex(a) for a in doc["amplitudes"]]
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"bad state document: {exc}") from exc
    return PureState(tuple(dims), np.array(amps))


def state_to_json(psi: PureState) -> dict:
    return {"dims": list(psi.dims), "amplitudes": [encode_complex(a) for a in psi.amplitudes]}


def channel_from_json(doc) -> KrausChannel:
    doc = _load(doc)
    try:
        dim = int(doc["dim"])
        ops = [_complex_matrix(k) for k in doc["kraus"]]
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"bad channel document: {exc}") from exc
    if any(k.shape != (dim, dim) for k in ops):
        raise MalformedInput(f"Kraus operators must be {dim}x{dim}")
    return new_channel(ops)


def channel_to_json(ch: KrausChannel) -> dict:
    return {"dim": ch.dim, "kraus": [encode_matrix(k) for k in ch.kraus]}


def path_from_json(doc) -> HamiltonianPath:
    doc = _load(doc)
    try:
        times = [float(t) for t in doc["times"]]
        hs = [_complex_matrix(h) for h in doc["hamiltonians"]]
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"bad path document: {exc}") from exc
    return HamiltonianPath(np.array(times), np.array(hs))


def tfd_from_json(doc) -> TfdSpec:
    doc = _load(doc)
    try:
        return TfdSpec(np.array([float(e) for e in doc["energies"]]), float(doc["beta"]))
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"bad TFD document: {exc}") from exc
