"""Writing output files safely and recording what produced them."""

from collections.abc import Iterable, Mapping
import hashlib
from importlib import metadata
import json
import os
from pathlib import Path
import tempfile
from typing import Any, Final


TRACKED_PACKAGES: Final[tuple[str, ...]] = (
    'PuLP', 'highspy', 'numpy', 'scipy', 'pandas',
)


def atomic_write_text(file_path: Path, text: str) -> None:
    """Write a text file so readers never see a half-written version."""
    file_path.parent.mkdir(parents=True, exist_ok=True)
    fd, temp_name = tempfile.mkstemp(
        dir=file_path.parent, prefix=f'.{file_path.name}.', suffix='.tmp',
    )
    try:
        with os.fdopen(fd, 'w', encoding='utf-8') as f:
            f.write(text)
        os.replace(temp_name, file_path)
    except BaseException:
        Path(temp_name).unlink(missing_ok=True)
        raise


def atomic_write_json(file_path: Path, data: Any) -> None:
    atomic_write_text(file_path, json.dumps(data, indent=2) + '\n')


def config_hash(config: Mapping[str, Any]) -> str:
    """Return a short stable digest of a JSON-serializable configuration."""
    canonical = json.dumps(config, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:16]


def package_versions(
    packages: Iterable[str] = TRACKED_PACKAGES,
) -> dict[str, str | None]:
    """Return the installed version of each package, or None if missing."""
    versions: dict[str, str | None] = {}
    for package in packages:
        try:
            versions[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            versions[package] = None
    return versions


def append_manifest(manifest_path: Path, record: Mapping[str, Any]) -> None:
    """Append one JSON line describing a run to a manifest file."""
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    with manifest_path.open('a', encoding='utf-8') as f:
        f.write(json.dumps(record, sort_keys=True) + '\n')
