"""JSON model files: arrival matrices, initial law and service law in one document.

    {"states": K,
     "batches": [D_0, D_1, ..., D_L],      # each K x K, row-major
     "initial": [p0_1, ..., p0_K],
     "service": {"type": "geometric", "alpha": 0.5}}
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import service
from .arrival import DBmapModel, ValidationReport, Violation, validate
from .service import ServiceLaw


class MalformedModelFile(ValueError):
    """The document cannot be read as a model at all."""


def parse(doc: dict) -> tuple[DBmapModel, ServiceLaw | None, ValidationReport]:
    """Build model and law without rejecting invalid probabilities.

    Structural problems raise :class:`MalformedModelFile`; probability
    defects (and an unbuildable service law) come back in the report.
    """
    if not isinstance(doc, dict):
        raise MalformedModelFile("model file must hold a JSON object")
    missing = {"states", "batches", "initial", "service"} - set(doc)
    if missing:
        raise MalformedModelFile(f"missing keys: {sorted(missing)}")
    k = doc["states"]
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise MalformedModelFile(f"'states' must be a positive integer, got {k!r}")
    try:
        d = np.array(doc["batches"], dtype=float)
        p0 = np.array(doc["initial"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise MalformedModelFile(f"non-numeric matrix data: {exc}") from exc
    if d.ndim != 3 or d.shape[1:] != (k, k) or d.shape[0] == 0:
        raise MalformedModelFile(f"'batches' must be a nonempty list of {k}x{k} matrices, got shape {d.shape}")
    if p0.shape != (k,):
        raise MalformedModelFile(f"'initial' must have length {k}, got shape {p0.shape}")
    if not isinstance(doc["service"], dict):
        raise MalformedModelFile("'service' must be an object")
    model = DBmapModel(d, p0)
    report = validate(model)
    law = None
    try:
        law = service.from_dict(doc["service"])
    except KeyError as exc:
        raise MalformedModelFile(f"service object lacks {exc}") from exc
    except (TypeError, ValueError) as exc:
        report = ValidationReport(report.violations + (Violation("service", str(exc), float("nan")),))
    return model, law, report


def load(path: str | Path) -> tuple[DBmapModel, ServiceLaw | None, ValidationReport]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedModelFile(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise MalformedModelFile(f"{path}: {exc}") from exc
    return parse(doc)


def to_dict(model: DBmapModel, law: ServiceLaw) -> dict:
    return {
        "states": model.num_states,
        "batches": model.batch_matrices.tolist(),
        "initial": model.initial_dist.tolist(),
        "service": law.to_dict(),
    }


def dump(model: DBmapModel, law: ServiceLaw, path: str | Path) -> None:
    # json writes floats with repr(), which round-trips exactly
    doc = to_dict(model, law)
    body = ",\n".join(f"  {json.dumps(k)}: {json.dumps(v)}" for k, v in doc.items())
    Path(path).write_text("{\n" + body + "\n}\n")
