"""Small helpers for the flat-file artifact formats (CSV, JSON, sparse maps, digests)."""

from __future__ import annotations

import csv
import hashlib
import json
import os
from typing import Iterable, Mapping

from .errors import InputError

# Sparse mappings are serialized into a single CSV cell as "key:value;key:value".
# Keys therefore must not contain the separators.
_RESERVED = (":", ";")


def ser_map(mapping: Mapping[str, float | int], sort: bool = True) -> str:
    items = sorted(mapping.items()) if sort else list(mapping.items())
    parts = []
    for k, v in items:
        if any(ch in k for ch in _RESERVED):
            raise InputError(f"key {k!r} contains a reserved separator")
        parts.append(f"{k}:{v!r}" if isinstance(v, float) else f"{k}:{v}")
    return ";".join(parts)


def parse_map(text: str, value_type=float) -> dict:
    out = {}
    if not text:
        return out
    for part in text.split(";"):
        k, _, v = part.partition(":")
        out[k] = value_type(v)
    return out


def write_csv(path: str | os.PathLike, header: list[str], rows: Iterable[Iterable]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])


def read_csv(path: str | os.PathLike) -> tuple[list[str], list[list[str]]]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file, expected a header row")
        return header, [row for row in reader]


def write_json(path: str | os.PathLike, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path: str | os.PathLike):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def sha256_file(path: str | os.PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def money(x: float) -> float:
    """Round a dollar amount to cents."""
    return round(float(x), 2)
