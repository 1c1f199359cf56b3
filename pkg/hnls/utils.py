# hnls/utils.py
"""
Small utilities used by coordinator and CLI
"""

import hashlib
import json
import math
import os
import platform
from typing import Any, Dict

import numpy as np
import pandas as pd
import scipy

from hnls import __version__


def fingerprint_config(config: Dict) -> str:
    """
    Stable fingerprint of a resolved configuration (sha256 of canonical JSON).
    """
    key = json.dumps(config, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(key).hexdigest()


def versions() -> Dict[str, str]:
    return {
        "hnls": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "python": platform.python_version(),
    }


def to_jsonable(obj: Any) -> Any:
    """numpy scalars/arrays and non-finite floats into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        # JSON has no NaN/inf
        return value if math.isfinite(value) else None
    return obj


def write_json(path: str, obj: Any) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(to_jsonable(obj), f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def write_csv(path: str, frame: pd.DataFrame) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.12e", lineterminator="\n")
    return path
