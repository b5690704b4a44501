"""Writers that stamp every output file with run metadata.

CSV files start with ``# key: value`` comment lines (read them back with
``pandas.read_csv(path, comment="#")``); JSON files carry a top-level
``metadata`` object. No timestamps are written, so reruns with the same
inputs and seed are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import pandas as pd

from . import __version__


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def base_metadata(**items) -> dict:
    return {"tool": "mrioembed", "version": __version__, **items}


def write_csv(df: pd.DataFrame, path, metadata: dict, float_format: str = "%.10g") -> Path:
    path = Path(path)
    lines = [f"# {k}: {json.dumps(v, sort_keys=True)}" for k, v in metadata.items()]
    body = df.to_csv(index=False, lineterminator="\n", float_format=float_format)
    path.write_text("\n".join(lines) + "\n" + body, encoding="utf-8")
    return path


def write_json(obj: dict, path, metadata: dict) -> Path:
    path = Path(path)
    payload = {"metadata": metadata, **obj}
    path.write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n", encoding="utf-8")
    return path


def read_csv(path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def read_metadata(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("# "):
                break
            k, _, v = line[2:].partition(": ")
            out[k] = json.loads(v)
    return out
