# hnls/storage/field_store.py
"""
Field dumps.

<name>.bin   Fourier coefficients in the unitary convention of
             spectral_core, little-endian float64 (re, im) pairs, C order
             over FFT-ordered lattice indices.
<name>.json  header: dim, n, box, space, real, dtype, normalization,
             sha256 of the .bin payload.
"""

import hashlib
import json
import os
from typing import Dict, Tuple

import numpy as np

from hnls.errors import FieldError
from hnls.numerics.spectral_core import Field, GridSpec, to_physical

FORMAT = "hnls-field/1"
NORMALIZATION = "fftn(u, norm='ortho'), dV=(L/n)^d"


def _paths(directory: str, name: str) -> Tuple[str, str]:
    return os.path.join(directory, f"{name}.bin"), os.path.join(directory, f"{name}.json")


def save_field(directory: str, name: str, field: Field) -> Dict:
    os.makedirs(directory, exist_ok=True)
    bin_path, header_path = _paths(directory, name)
    coeffs = np.ascontiguousarray(field.fourier(), dtype=np.complex128)
    payload = coeffs.view(np.float64).astype("<f8").tobytes()
    with open(bin_path, "wb") as f:
        f.write(payload)
    header = {
        "format": FORMAT,
        "dim": field.grid.dim,
        "n": field.grid.n,
        "box": field.grid.box,
        "space": "fourier",
        "real": bool(field.real),
        "dtype": "<f8 (re, im) pairs",
        "normalization": NORMALIZATION,
        "sha256": hashlib.sha256(payload).hexdigest(),
    }
    with open(header_path, "w", encoding="utf-8") as f:
        json.dump(header, f, indent=2, sort_keys=True)
        f.write("\n")
    return header


def load_field(directory: str, name: str) -> Field:
    bin_path, header_path = _paths(directory, name)
    try:
        with open(header_path, "r", encoding="utf-8") as f:
            header = json.load(f)
        with open(bin_path, "rb") as f:
            payload = f.read()
    except OSError as e:
        raise FieldError(f"cannot read field dump {name!r} in {directory}: {e}") from e
    if header.get("format") != FORMAT:
        raise FieldError(f"unknown field format {header.get('format')!r}")
    grid = GridSpec(dim=int(header["dim"]), n=int(header["n"]), box=float(header["box"]))
    if len(payload) != 16 * grid.size:
        raise FieldError(f"payload holds {len(payload)} bytes, expected {16 * grid.size}")
    if hashlib.sha256(payload).hexdigest() != header["sha256"]:
        raise FieldError("field payload checksum mismatch")
    pairs = np.frombuffer(payload, dtype="<f8")
    coeffs = (pairs[0::2] + 1j * pairs[1::2]).reshape(grid.shape)
    return to_physical(Field.from_fourier(grid, coeffs, real=bool(header["real"])))
