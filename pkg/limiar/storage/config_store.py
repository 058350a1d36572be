"""
Read-only access to run configuration documents.

A config document is a single JSON object (see :class:`~limiar.models.RunConfig`).
Per-vertex degree lists for large graphs live in a sidecar text file named by
``model.degrees.file``, one non-negative integer per line, resolved relative
to the config file's directory. The store never writes to either file.
"""

import json
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List

from limiar.errors import ConfigError
from limiar.log import get_logger
from limiar.models import RunConfig

logger = get_logger(__name__)


class ConfigStore:
    """
    Loader for one config document and the files it references.
    """

    def __init__(self, path: str | Path) -> None:
        """
        Args:
            path (str | Path): Location of the JSON config document.
        """
        self.path = Path(path)

    def _read(self) -> Dict[str, Any]:
        """
        Parse the config document.

        Returns:
            Dict[str, Any]: The raw JSON object.

        Raises:
            ConfigError: If the file is missing or not valid JSON.
        """
        try:
            with self.path.open("r", encoding="utf-8") as f:
                return json.load(f)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {self.path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{self.path}: invalid JSON ({exc})") from exc

    def resolve(self, relative: str) -> Path:
        """Path of a file referenced from the config document."""
        p = Path(relative)
        return p if p.is_absolute() else self.path.parent / p

    def read_degree_file(self, relative: str) -> List[int]:
        """Read a sidecar degree list (blank lines and ``#`` comments skipped)."""
        path = self.resolve(relative)
        degrees: List[int] = []
        try:
            with path.open("r", encoding="utf-8") as f:
                for lineno, line in enumerate(f, start=1):
                    text = line.split("#", 1)[0].strip()
                    if not text:
                        continue
                    if not text.isdigit():
                        raise ConfigError(f"{path}:{lineno}: expected a non-negative integer")
                    degrees.append(int(text))
        except FileNotFoundError as exc:
            raise ConfigError(f"degree file not found: {path}") from exc
        logger.debug("read %d degrees from %s", len(degrees), path)
        return degrees

    def load(self) -> RunConfig:
        """
        Parse the document into a :class:`RunConfig`.

        Raises:
            ConfigError: If the file is missing, not JSON, or not a valid config.
        """
        data = self._read()
        degree_list = None
        model = data.get("model") if isinstance(data, dict) else None
        if isinstance(model, dict) and isinstance(model.get("degrees"), dict):
            sidecar = model["degrees"].get("file")
            if sidecar is not None:
                degree_list = self.read_degree_file(str(sidecar))
        config = RunConfig.from_dict(data, degree_list)
        if config.model.graph is not None:
            # later loads should not depend on the working directory
            resolved = str(self.resolve(config.model.graph))
            config = replace(config, model=replace(config.model, graph=resolved))
        return config
