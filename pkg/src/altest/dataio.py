"""Dataset file format: one JSON header line naming p, m, n, seed, then a
binary little-endian float64 payload, row-major per observation (the m x p
design block followed by the m response values)."""

import json
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError
from .model import Dataset

_MAGIC = "altest-dataset"


def write_dataset(path: str | Path, data: Dataset, seed: int = 0) -> None:
    header = {
        "format": _MAGIC,
        "p": data.p,
        "m": data.m,
        "n": data.n,
        "seed": seed,
    }
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode("ascii"))
        for x_i, y_i in data.observations():
            fh.write(x_i.astype("<f8").tobytes())
            fh.write(y_i.astype("<f8").tobytes())


def read_dataset(path: str | Path) -> Dataset:
    """Load a dataset file. The realized noise is not stored, so loaded data
    cannot drive the exact-noise gamma rule."""
    with open(path, "rb") as fh:
        line = fh.readline()
        try:
            header = json.loads(line.decode("ascii"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise InvalidParameterError(f"{path}: bad dataset header: {exc}") from exc
        if header.get("format") != _MAGIC:
            raise InvalidParameterError(f"{path}: not a dataset file")
        n, m, p = int(header["n"]), int(header["m"]), int(header["p"])
        per_obs = m * p + m
        payload = np.frombuffer(fh.read(), dtype="<f8")
    if payload.size != n * per_obs:
        raise InvalidParameterError(
            f"{path}: payload holds {payload.size} floats, expected {n * per_obs}"
        )
    rows = payload.reshape(n, per_obs)
    x = rows[:, : m * p].reshape(n, m, p)
    y = rows[:, m * p :]
    return Dataset(x, y)
