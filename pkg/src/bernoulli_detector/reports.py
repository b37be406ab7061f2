"""Report and manifest schemas shared by the CLI.

Every output embeds a RunManifest (command, parameters, seed, input
digest, tool version); reruns with an identical manifest are expected to
be byte-identical, which holds because sampling is seed-deterministic and
the JSON encoding below is canonical (sorted keys, fixed separators).

All time indices in reports are 1-based; the library itself is 0-based.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

TOOL_NAME = "bernoulli-detector"


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def canonical_json(payload: dict) -> str:
    return json.dumps(_jsonable(payload), sort_keys=True, separators=(",", ":"))


def sha256_of_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass(frozen=True)
class RunManifest:
    command: str
    parameters: dict
    seed: int | None
    input_sha256: str | None
    version: str

    def to_dict(self) -> dict:
        return {
            "tool": TOOL_NAME,
            "version": self.version,
            "command": self.command,
            "parameters": _jsonable(self.parameters),
            "seed": self.seed,
            "input_sha256": self.input_sha256,
        }


@dataclass(frozen=True)
class DetectionReport:
    """CLI-facing detection summary (1-based change-point positions)."""

    method: str
    series_names: tuple[str, ...]
    n_points: int
    change_points: dict[str, list[int]]
    marginal_probability: dict[str, list[float]]
    map_log_score: float | None
    manifest: RunManifest
    p_config_summary: dict | None = None

    def to_dict(self) -> dict:
        payload = {
            "manifest": self.manifest.to_dict(),
            "method": self.method,
            "series_names": list(self.series_names),
            "n_points": self.n_points,
            "change_points": _jsonable(self.change_points),
            "marginal_probability": _jsonable(self.marginal_probability),
            "map_log_score": self.map_log_score,
        }
        if self.p_config_summary is not None:
            payload["p_config_summary"] = _jsonable(self.p_config_summary)
        return payload

    def to_json(self) -> str:
        return canonical_json(self.to_dict())
