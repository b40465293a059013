"""On-disk cache for computed polynomials.

Files live in ``$JCOVER_CACHE`` (or ``$XDG_CACHE_HOME/jcover``, falling back
to ``~/.cache/jcover``) and are written to a temporary file first and then
renamed, so concurrent readers never see a partial file.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path


def cache_dir() -> Path:
    env = os.environ.get("JCOVER_CACHE")
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "jcover"


def read(name: str) -> str | None:
    path = cache_dir() / name
    try:
        return path.read_text(encoding="ascii")
    except FileNotFoundError:
        return None


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def write(name: str, text: str) -> None:
    write_atomic(cache_dir() / name, text)
