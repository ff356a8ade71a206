"""Reading JSON inputs from plain files or archives, and writing reports."""
import json
from pathlib import Path
import tarfile
import tempfile
from typing import Any
import zipfile

import py7zr
from pydantic import BaseModel

from mutual_independence.common.logger import logger


def _extract_archive(archive_path: Path) -> str:
    """
    Extract the first .json file found in a supported archive and return its content as a string.

    Supported formats:
    - .zip
    - .tar.xz
    - .7z

    :param Path archive_path: Path to the archive file

    :return: Content of the extracted .json file
    :rtype: str
    :raises ValueError: If no .json file is found or format is unsupported
    """
    with tempfile.TemporaryDirectory() as tmpdir:
        tmpdir_path = Path(tmpdir)
        if archive_path.suffix == ".zip":
            with zipfile.ZipFile(archive_path, "r") as zf:
                members = sorted(f for f in zf.namelist() if f.endswith(".json"))
                if not members:
                    raise ValueError("📄❌ No .json file found in zip archive")
                zf.extract(members[0], path=tmpdir_path)
                return (tmpdir_path / members[0]).read_text(encoding="utf-8")

        if archive_path.suffixes[-2:] == [".tar", ".xz"]:
            with tarfile.open(archive_path, "r:xz") as tf:
                members = sorted((m for m in tf.getmembers() if m.name.endswith(".json")), key=lambda m: m.name)
                if not members:
                    raise ValueError("📄❌ No .json file found in tar.xz archive")
                tf.extract(members[0], path=tmpdir_path, filter="data")
                return (tmpdir_path / members[0].name).read_text(encoding="utf-8")

        if archive_path.suffix == ".7z":
            with py7zr.SevenZipFile(archive_path, mode="r") as archive:
                members = sorted(f for f in archive.getnames() if f.endswith(".json"))
                if not members:
                    raise ValueError("📄❌ No .json file found in 7z archive")
                archive.extract(targets=[members[0]], path=tmpdir_path)
                return (tmpdir_path / members[0]).read_text(encoding="utf-8")

        raise ValueError(f"📄❌ Unsupported archive format: {''.join(archive_path.suffixes)}")


def read_text(path: Path) -> str:
    """
    Read a JSON document from a ``.json`` file or from the first ``.json`` member of an archive.

    :param Path path: Input file or archive

    :return: Document text
    :rtype: str
    """
    path = Path(path)
    logger.debug(f"📄 Reading {path}")
    if path.suffix == ".json":
        return path.read_text(encoding="utf-8")
    return _extract_archive(path)


def read_json(path: Path) -> Any:
    """Parse the JSON document stored at ``path`` (file or archive)."""
    return json.loads(read_text(path))


def load_model[M: BaseModel](model: type[M], path: Path) -> M:
    """
    Validate the JSON document at ``path`` into ``model``.

    :param type model: Pydantic model class
    :param Path path: Input file or archive

    :return: Validated instance
    :raises pydantic.ValidationError: If the document breaks an invariant of ``model``
    """
    return model.model_validate_json(read_text(path))


def save_model(instance: BaseModel, path: Path) -> Path:
    """
    Write ``instance`` as JSON to ``path``.

    :param BaseModel instance: Model to serialize
    :param Path path: Destination file

    :return: The written path
    :rtype: Path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(instance.model_dump_json(), encoding="utf-8")
    logger.info(f"📄✅ Wrote {path}")
    return path
