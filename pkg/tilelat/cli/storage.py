"""
Artifact files: group, certificate, polytope, report and basis documents.

Every document is canonical JSON (sorted keys, two-space indent) and is
written to a temporary file in the target directory, then renamed.
"""
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List

import structlog
from pydantic import ValidationError

from tilelat.builder.models import Subgroup
from tilelat.cli.models import RunConfig
from tilelat.config import get_settings
from tilelat.errors import StorageError
from tilelat.exactvec import SparseVector

logger = structlog.get_logger("storage")


def document(config: RunConfig, **payload: Any) -> Dict[str, Any]:
    """Wrap a payload with the format version and the full run config"""
    return {"format_version": get_settings().format_version, "config": config.to_json(), **payload}


def dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_text_atomic(path: str, text: str) -> None:
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc.strerror or exc}", path=path) from exc
    logger.debug("file_written", path=str(target), bytes=len(text))


def write_json_atomic(path: str, payload: Any) -> None:
    write_text_atomic(path, dumps(payload))


def read_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise StorageError(f"cannot read {path}: {exc.strerror or exc}", path=path) from exc
    except json.JSONDecodeError as exc:
        raise StorageError(f"{path} is not valid JSON: {exc.msg}", path=path) from exc


def group_payload(D: Subgroup) -> Dict[str, Any]:
    return {"group": D.model_dump(mode="json", by_alias=True), "summary": D.summary()}


def _vectors(data: Any, path: str) -> List[SparseVector]:
    if not isinstance(data, list):
        raise StorageError(f"{path}: expected a list of vectors", path=path)
    try:
        return [SparseVector.from_json(item) for item in data]
    except ValueError as exc:
        raise StorageError(f"{path}: malformed vector ({exc})", path=path) from exc


def load_group(path: str) -> Subgroup:
    """Read a group document, or a bare {"p": ..., "generators": [...]} file"""
    data = read_json(path)
    if not isinstance(data, dict):
        raise StorageError(f"{path}: expected a JSON object", path=path)
    try:
        if "group" in data:
            return Subgroup.model_validate(data["group"])
        if "generators" in data and "p" in data:
            return Subgroup.from_generators(_vectors(data["generators"], path), int(data["p"]))
    except (ValidationError, ValueError, TypeError) as exc:
        raise StorageError(f"{path}: malformed group ({exc})", path=path) from exc
    raise StorageError(f"{path}: no group found", path=path)


def load_generators(path: str) -> List[SparseVector]:
    """Generators from a JSON list of vectors, a generator file or a group document"""
    data = read_json(path)
    if isinstance(data, list):
        return _vectors(data, path)
    if isinstance(data, dict) and "generators" in data:
        return _vectors(data["generators"], path)
    return load_group(path).generators
