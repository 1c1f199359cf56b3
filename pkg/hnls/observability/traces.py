# hnls/observability/traces.py
"""
Run traces: one trace object per CLI run, one step per solver phase, saved
as JSON in the trace directory (HNLS_TRACE_DIR, default .hnls/traces).
Traces hold wall-clock timings, so they never go into the output directory.
"""

import json
import os
import time
import uuid
from typing import Any, Dict, Optional


def _trace_dir() -> str:
    path = os.getenv("HNLS_TRACE_DIR", os.path.join(".hnls", "traces"))
    os.makedirs(path, exist_ok=True)
    return path


def new_trace(name: str = "run") -> Dict[str, Any]:
    return {
        "trace_id": str(uuid.uuid4()),
        "name": name,
        "start_time": time.time(),
        "steps": [],
        "end_time": None,
    }


def add_step(trace: Dict[str, Any], name: str, duration_ms: float, status: str = "ok", meta: Optional[dict] = None):
    trace["steps"].append({
        "name": name,
        "duration_ms": int(duration_ms),
        "status": status,
        "meta": meta or {},
    })


def end_trace(trace: Dict[str, Any]) -> str:
    trace["end_time"] = time.time()
    path = os.path.join(_trace_dir(), f"{trace['trace_id']}.json")
    with open(path, "w", encoding="utf-8") as f:
        json.dump(trace, f, indent=2, default=str)
    return path


def record_step(trace: Dict[str, Any], name: str, func, *args, **kwargs):
    """
    Time func(*args, **kwargs) as one step of an open trace. Failures are
    recorded with status "error" and re-raised.
    """
    start = time.time()
    try:
        result = func(*args, **kwargs)
    except Exception as e:
        add_step(trace, name, (time.time() - start) * 1000, status="error", meta={"error": str(e)})
        raise
    add_step(trace, name, (time.time() - start) * 1000, status="ok")
    return result

