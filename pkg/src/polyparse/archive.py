"""Parameter checkpoint files.

A checkpoint is a zip archive holding ``header.json``, optional extra JSON
members, and one ``.npy`` member per parameter.  Values are row-major float32,
except that float64 arrays are kept at full width so that a 64-bit model
reloads bit for bit.  Member timestamps are pinned so identical contents give
identical bytes.
"""

from __future__ import annotations

import io
import json
import zipfile
from pathlib import Path
from typing import Any, Mapping

import numpy as np

FORMAT_VERSION = 1
_EPOCH = (1980, 1, 1, 0, 0, 0)


class ArchiveError(ValueError):
    pass


def _write(zf: zipfile.ZipFile, name: str, data: bytes) -> None:
    info = zipfile.ZipInfo(name, date_time=_EPOCH)
    info.compress_type = zipfile.ZIP_DEFLATED
    info.external_attr = 0o644 << 16
    zf.writestr(info, data)


def save_archive(
    path: str | Path,
    params: Mapping[str, np.ndarray],
    header: Mapping[str, Any],
    extras: Mapping[str, Any] | None = None,
) -> None:
    head = dict(header)
    head["format_version"] = FORMAT_VERSION
    head["parameters"] = {name: list(np.shape(v)) for name, v in params.items()}
    with zipfile.ZipFile(path, "w") as zf:
        _write(zf, "header.json", json.dumps(head, sort_keys=True, ensure_ascii=False).encode("utf-8"))
        for key, value in (extras or {}).items():
            _write(zf, f"{key}.json", json.dumps(value, sort_keys=True, ensure_ascii=False).encode("utf-8"))
        for name, value in params.items():
            buf = io.BytesIO()
            arr = np.asarray(value)
            dtype = "<f8" if arr.dtype == np.float64 else "<f4"
            np.save(buf, np.ascontiguousarray(arr, dtype=dtype), allow_pickle=False)
            _write(zf, f"params/{name}.npy", buf.getvalue())


def load_archive(path: str | Path) -> tuple[dict, dict[str, np.ndarray], dict[str, Any]]:
    """Return ``(header, parameters, extras)``."""
    try:
        zf = zipfile.ZipFile(path)
    except (OSError, zipfile.BadZipFile) as exc:
        raise ArchiveError(f"{path}: not a checkpoint archive ({exc})") from exc
    with zf:
        names = zf.namelist()
        if "header.json" not in names:
            raise ArchiveError(f"{path}: missing header")
        header = json.loads(zf.read("header.json"))
        if header.get("format_version") != FORMAT_VERSION:
            raise ArchiveError(f"{path}: unsupported format version {header.get('format_version')}")
        params = {}
        for name, shape in header["parameters"].items():
            arr = np.load(io.BytesIO(zf.read(f"params/{name}.npy")), allow_pickle=False)
            if list(arr.shape) != shape:
                raise ArchiveError(f"{path}: parameter {name} has shape {arr.shape}, header says {shape}")
            params[name] = arr
        extras = {
            n[: -len(".json")]: json.loads(zf.read(n))
            for n in names
            if n.endswith(".json") and n != "header.json"
        }
    return header, params, extras
