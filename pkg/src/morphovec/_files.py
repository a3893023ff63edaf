"""Atomic file-write helpers shared by the persistence code."""

import os
import tempfile


def atomic_write_text(path, text):
    """Write text to path via a temp file in the same directory plus rename."""
    _atomic_write(path, text.encode("utf-8"))


def atomic_write_bytes(path, data):
    _atomic_write(path, data)


def _atomic_write(path, data):
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
