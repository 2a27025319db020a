"""Atomic file writes: content goes to a temp file renamed into place."""
from __future__ import annotations

import contextlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Callable, Iterator

from . import schemas


@contextlib.contextmanager
def atomic_path(path: str | os.PathLike[str]) -> Iterator[Path]:
    """Yield a temp path in the target directory; rename it over ``path`` on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    os.close(fd)
    try:
        yield Path(tmp)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def write_with(path: str | os.PathLike[str], writer: Callable[[Path], None]) -> None:
    with atomic_path(path) as tmp:
        writer(tmp)


def dump_json(obj: Any, path: str | os.PathLike[str], schema: dict | None = None,
              what: str = "document") -> None:
    if schema is not None:
        schemas.validate(obj, schema, what)
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"
    with atomic_path(path) as tmp:
        tmp.write_text(text)


def load_json(path: str | os.PathLike[str], schema: dict | None = None,
              what: str = "document") -> Any:
    with open(path) as fh:
        obj = json.load(fh)
    if schema is not None:
        schemas.validate(obj, schema, what)
    return obj
