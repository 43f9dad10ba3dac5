"""Loading of the material library and project config files"""

import json
import logging
from pathlib import Path

from config.settings import CONFIG_DIR, MATERIALS_FILE
from materials.dispersion import MaterialLibrary
from utils.exceptions import ConfigError

log = logging.getLogger(__name__)


class ProjectLoader:
    """Load and parse the JSON inputs of a run"""

    def __init__(self):
        self.config_path = None
        self.raw_config = None
        self.materials_path = None
        self.raw_materials = None
        self.library = None

    @staticmethod
    def _read_json(path, what):
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"{what} not found: {path}")
        try:
            with open(path, "r", encoding="utf-8") as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{what} {path} is not valid JSON: {e}") from e

    def load_config_file(self, file_path):
        """Load a project config; relative materials paths resolve against it"""
        log.info("Loading project config: %s", file_path)
        try:
            raw = self._read_json(file_path, "project config")
            if not isinstance(raw, dict):
                raise ConfigError("project config must be a JSON object")
            self.config_path = Path(file_path).resolve()
            self.raw_config = raw
            log.info("✓ Loaded project config with %d sections", len(raw))
            return raw
        except ConfigError as e:
            log.error("✗ Error loading project config: %s", e)
            raise

    def resolve_materials_path(self):
        name = (self.raw_config or {}).get("materials", MATERIALS_FILE)
        path = Path(name)
        if path.is_absolute():
            return path
        if self.config_path is not None and (self.config_path.parent / path).is_file():
            return self.config_path.parent / path
        return CONFIG_DIR / path

    def load_materials_file(self, file_path=None):
        """Load the material records plus any inline records from the config"""
        path = Path(file_path) if file_path else self.resolve_materials_path()
        log.info("Loading materials: %s", path)
        try:
            raw = self._read_json(path, "material file")
            extra = (self.raw_config or {}).get("extra_materials", [])
            if extra:
                raw = dict(raw, materials=list(raw.get("materials", [])) + list(extra))
            library = MaterialLibrary.from_records(raw, source=str(path))
        except ConfigError as e:
            log.error("✗ Error loading materials: %s", e)
            raise

        self.materials_path = path
        self.raw_materials = raw
        self.library = library
        log.info(
            "✓ Loaded %d materials (%s)", len(library.models), ", ".join(sorted(library.models))
        )
        return library

    def get_data(self):
        return {
            "config": self.raw_config,
            "config_path": self.config_path,
            "materials": self.raw_materials,
            "library": self.library,
        }
