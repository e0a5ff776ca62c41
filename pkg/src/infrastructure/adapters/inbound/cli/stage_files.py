"""JSON stage files read and written by the command-line driver."""

from pathlib import Path
from typing import Type, TypeVar

from pydantic import BaseModel, ValidationError

from src.domain.exceptions import ParseError, RasterIOError

M = TypeVar('M', bound=BaseModel)


def read_stage_file(path: Path, model: Type[M]) -> M:
    """
    Parse and validate a stage file.

    Raises:
        RasterIOError: the file cannot be read
        ParseError: invalid JSON or a contract violation, naming the first offending field
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as error:
        raise RasterIOError(str(path), "read", error) from error
    try:
        return model.model_validate_json(text)
    except ValidationError as error:
        first = error.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "<root>"
        raise ParseError(str(path), f"{location}: {first['msg']}") from error


def write_stage_file(path: Path, dto: BaseModel) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dto.model_dump_json(indent=2), encoding="utf-8")
    except OSError as error:
        raise RasterIOError(str(path), "write", error) from error
    return path
