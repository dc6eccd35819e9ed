"""Download the UCI bank-marketing files and pin their content digests.

The data is not shipped with the package. ``fetch_bank`` downloads the UCI
archive, extracts ``bank.csv`` and ``bank-full.csv`` and records their
SHA-256 digests in ``SHA256SUMS`` next to them; later fetches, and
:func:`verify`, compare against that lock file.
"""

from __future__ import annotations

import hashlib
import io
import logging
import os
import urllib.request
import zipfile
from pathlib import Path

from .exceptions import ReductMinerError

log = logging.getLogger(__name__)

BANK_URLS = (
    "https://archive.ics.uci.edu/static/public/222/bank+marketing.zip",
    "https://archive.ics.uci.edu/ml/machine-learning-databases/00222/bank.zip",
)
BANK_FILES = ("bank.csv", "bank-full.csv")
LOCK_NAME = "SHA256SUMS"


class DigestMismatch(ReductMinerError):
    pass


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def read_lock(directory: str | Path) -> dict[str, str]:
    lock = Path(directory) / LOCK_NAME
    if not lock.is_file():
        return {}
    out = {}
    for line in lock.read_text().splitlines():
        if line.strip():
            digest, name = line.split(maxsplit=1)
            out[name.strip().lstrip("*")] = digest
    return out


def write_lock(directory: str | Path, digests: dict[str, str]) -> None:
    lines = [f"{d}  {n}" for n, d in sorted(digests.items())]
    (Path(directory) / LOCK_NAME).write_text("\n".join(lines) + "\n")


def _extract(archive: bytes, wanted: tuple[str, ...]) -> dict[str, bytes]:
    found: dict[str, bytes] = {}
    with zipfile.ZipFile(io.BytesIO(archive)) as zf:
        for info in zf.infolist():
            base = info.filename.rsplit("/", 1)[-1]
            if base in wanted:
                found[base] = zf.read(info)
            elif base.endswith(".zip") and base.startswith("bank"):
                try:
                    inner = _extract(zf.read(info), wanted)
                except zipfile.BadZipFile:
                    log.warning("skipping unreadable inner archive %s", info.filename)
                    continue
                for k, v in inner.items():
                    found.setdefault(k, v)
    return found


def verify(directory: str | Path, expected: dict[str, str] | None = None) -> dict[str, str]:
    """Check files in ``directory`` against ``expected`` (default: the lock file)."""
    directory = Path(directory)
    expected = expected if expected is not None else read_lock(directory)
    actual = {}
    for name, digest in expected.items():
        path = directory / name
        if not path.is_file():
            raise FileNotFoundError(path)
        actual[name] = sha256_file(path)
        if actual[name] != digest:
            raise DigestMismatch(f"{name}: expected sha256 {digest}, found {actual[name]}")
    return actual


def fetch_bank(dest: str | Path, urls=BANK_URLS, expected: dict[str, str] | None = None, timeout: float = 60) -> dict[str, str]:
    """Download and extract the bank files into ``dest``; return their digests.

    Digests are checked against ``expected`` and then the existing lock
    file; the lock file is written when absent.
    """
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    errors = []
    files: dict[str, bytes] = {}
    for url in urls:
        try:
            log.info("downloading %s", url)
            with urllib.request.urlopen(url, timeout=timeout) as resp:
                files = _extract(resp.read(), BANK_FILES)
        except (OSError, zipfile.BadZipFile) as exc:
            errors.append(f"{url}: {exc}")
            continue
        if all(f in files for f in BANK_FILES):
            break
        errors.append(f"{url}: archive lacks {[f for f in BANK_FILES if f not in files]}")
    else:
        raise OSError("could not fetch the bank-marketing data:\n  " + "\n  ".join(errors))

    digests = {name: hashlib.sha256(blob).hexdigest() for name, blob in files.items() if name in BANK_FILES}
    pinned = dict(read_lock(dest))
    pinned.update(expected or {})
    for name, digest in pinned.items():
        if name in digests and digests[name] != digest:
            raise DigestMismatch(f"{name}: expected sha256 {digest}, downloaded {digests[name]}")
    for name in BANK_FILES:
        (dest / name).write_bytes(files[name])
    if not read_lock(dest):
        write_lock(dest, digests)
    return digests


def data_dir() -> Path:
    """Directory searched for the bank files: $REDUCTMINER_DATA, else ./data."""
    return Path(os.environ.get("REDUCTMINER_DATA", "data"))


def find_bank_file(name: str) -> Path | None:
    path = data_dir() / name
    return path if path.is_file() else None
