"""Minimal CSAR (Cloud Service Archive) packing and unpacking.

A CSAR here is a zip archive whose ``TOSCA-Metadata/TOSCA.meta`` names the
entry definitions file.  Three metadata keys are required:
TOSCA-Meta-File-Version, CSAR-Version, and Entry-Definitions.
"""

from __future__ import annotations

import io
import zipfile
from dataclasses import dataclass, field

from .errors import MissingEntryDefinitionsError, MissingMetadataError

META_PATH = "TOSCA-Metadata/TOSCA.meta"
META_VERSION = "1.1"
CSAR_VERSION = "1.1"

# fixed timestamp so packing is deterministic
_ZIP_DATE = (1980, 1, 1, 0, 0, 0)


@dataclass
class CsarArchive:
    """An unpacked archive: entry file name, payload files, metadata map."""

    entry_definitions: str
    files: dict[str, bytes] = field(default_factory=dict)
    metadata: dict[str, str] = field(default_factory=dict)

    @property
    def entry_bytes(self) -> bytes:
        return self.files[self.entry_definitions]


def _render_meta(entry: str) -> bytes:
    lines = [
        f"TOSCA-Meta-File-Version: {META_VERSION}",
        f"CSAR-Version: {CSAR_VERSION}",
        f"Entry-Definitions: {entry}",
    ]
    return ("\n".join(lines) + "\n").encode("utf-8")


def pack_csar(entry: str, files: dict[str, bytes]) -> bytes:
    """Zip `files` plus generated metadata naming `entry` as the main template."""
    if entry not in files:
        raise MissingEntryDefinitionsError(
            f"entry definitions {entry!r} not among the files to pack")
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as archive:
        meta_info = zipfile.ZipInfo(META_PATH, date_time=_ZIP_DATE)
        archive.writestr(meta_info, _render_meta(entry))
        for path in sorted(files):
            info = zipfile.ZipInfo(path, date_time=_ZIP_DATE)
            archive.writestr(info, files[path])
    return buffer.getvalue()


def _parse_meta(raw: bytes) -> dict[str, str]:
    metadata = {}
    for line in raw.decode("utf-8").splitlines():
        line = line.strip()
        if not line or ":" not in line:
            continue
        key, value = line.split(":", 1)
        metadata[key.strip()] = value.strip()
    return metadata


def unpack_csar(data: bytes) -> CsarArchive:
    """Read a CSAR back into memory, validating its metadata."""
    try:
        archive = zipfile.ZipFile(io.BytesIO(data))
    except zipfile.BadZipFile as exc:
        raise MissingMetadataError(f"not a zip archive: {exc}") from exc
    with archive:
        names = archive.namelist()
        if META_PATH not in names:
            raise MissingMetadataError(f"archive lacks {META_PATH}")
        metadata = _parse_meta(archive.read(META_PATH))
        entry = metadata.get("Entry-Definitions")
        if not entry:
            raise MissingMetadataError("TOSCA.meta lacks Entry-Definitions")
        files = {name: archive.read(name) for name in names
                 if name != META_PATH and not name.endswith("/")}
    if entry not in files:
        raise MissingEntryDefinitionsError(
            f"Entry-Definitions names {entry!r}, which is not in the archive")
    return CsarArchive(entry_definitions=entry, files=files, metadata=metadata)
