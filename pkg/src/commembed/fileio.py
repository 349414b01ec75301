"""Shared file helpers: checksummed binary container and compressed-input opening.

All binary artifacts (activity tables, membership sets, co-occurrence
matrices, embeddings) share one container layout so that round-trips are
bit-exact and corruption is always detected:

    magic (4 bytes) | version u32 | payload length u64 | crc32 u32 | payload

The crc32 covers the payload only. Writers build the payload in memory;
artifacts at desk scale are small, and full-dump artifacts are written
once per run.
"""

from __future__ import annotations

import bz2
import gzip
import io
import lzma
import struct
import zlib
from pathlib import Path

_HEADER = struct.Struct("<4sIQI")
FORMAT_VERSION = 1


class FormatError(Exception):
    """A binary artifact failed validation (bad magic, version, or checksum)."""


def write_container(path: str | Path, magic: bytes, payload: bytes) -> None:
    if len(magic) != 4:
        raise ValueError("magic must be exactly 4 bytes")
    crc = zlib.crc32(payload) & 0xFFFFFFFF
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(magic, FORMAT_VERSION, len(payload), crc))
        fh.write(payload)


def read_container(path: str | Path, magic: bytes) -> bytes:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise FormatError(f"{path}: truncated header")
        got_magic, version, length, crc = _HEADER.unpack(header)
        if got_magic != magic:
            raise FormatError(
                f"{path}: bad magic {got_magic!r}, expected {magic!r}"
            )
        if version != FORMAT_VERSION:
            raise FormatError(f"{path}: unsupported format version {version}")
        payload = fh.read(length)
    if len(payload) != length:
        raise FormatError(
            f"{path}: truncated payload ({len(payload)} of {length} bytes)"
        )
    if zlib.crc32(payload) & 0xFFFFFFFF != crc:
        raise FormatError(f"{path}: checksum mismatch, file is corrupted")
    return payload


def pack_names(names: list[str]) -> bytes:
    """Length-prefixed UTF-8 name block."""
    out = io.BytesIO()
    out.write(struct.pack("<Q", len(names)))
    for name in names:
        raw = name.encode("utf-8")
        out.write(struct.pack("<I", len(raw)))
        out.write(raw)
    return out.getvalue()


def unpack_names(buf: memoryview, offset: int) -> tuple[list[str], int]:
    (count,) = struct.unpack_from("<Q", buf, offset)
    offset += 8
    names = []
    for _ in range(count):
        (n,) = struct.unpack_from("<I", buf, offset)
        offset += 4
        names.append(bytes(buf[offset : offset + n]).decode("utf-8"))
        offset += n
    return names, offset


def open_text_auto(path: str | Path):
    """Open a possibly-compressed text file by extension (.gz/.bz2/.xz/.zst)."""
    p = Path(path)
    suffix = p.suffix.lower()
    if suffix == ".gz":
        return gzip.open(p, "rt", encoding="utf-8", errors="replace")
    if suffix == ".bz2":
        return bz2.open(p, "rt", encoding="utf-8", errors="replace")
    if suffix in (".xz", ".lzma"):
        return lzma.open(p, "rt", encoding="utf-8", errors="replace")
    if suffix == ".zst":
        try:
            import zstandard
        except ImportError as exc:  # pragma: no cover - depends on environment
            raise RuntimeError(
                f"{path}: .zst input requires the 'zstandard' package"
            ) from exc
        fh = open(p, "rb")
        reader = zstandard.ZstdDecompressor(max_window_size=2**31).stream_reader(fh)
        return io.TextIOWrapper(reader, encoding="utf-8", errors="replace")
    return open(p, "rt", encoding="utf-8", errors="replace")


def sha256_file(path: str | Path) -> str:
    import hashlib

    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
