"""File-backed object store standing in for the semi-trusted cloud server.

The store holds opaque ciphertext bytes keyed by "message-id/block-index"
object ids.  It never sees key material.  Writes are atomic (temp file
plus rename) so a reader cannot observe a half-written block.
"""

from __future__ import annotations

import os
import re
import tempfile
from pathlib import Path
from typing import List

from .errors import StoreNotFoundError

_ID_RE = re.compile(r"^[A-Za-z0-9_-]+$")


def make_object_id(message_id: str, index: int) -> str:
    return f"{message_id}/{index:05d}"


class BlobStore:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, object_id: str) -> Path:
        message_id, _, index = object_id.partition("/")
        if not _ID_RE.match(message_id) or not index.isdigit():
            raise ValueError(f"bad object id {object_id!r}")
        return self.root / message_id / f"{index}.ctb"

    def put(self, object_id: str, data: bytes) -> None:
        path = self._path(object_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def get(self, object_id: str) -> bytes:
        path = self._path(object_id)
        try:
            return path.read_bytes()
        except FileNotFoundError:
            raise StoreNotFoundError(object_id) from None

    def has(self, object_id: str) -> bool:
        return self._path(object_id).exists()

    def list(self, message_id: str) -> List[str]:
        """Object ids for one message, in block-index order."""
        folder = self.root / message_id
        if not folder.is_dir():
            raise StoreNotFoundError(message_id)
        ids = [
            f"{message_id}/{p.stem}"
            for p in folder.iterdir()
            if p.suffix == ".ctb" and p.stem.isdigit()
        ]
        return sorted(ids)
