"""On-disk cache of solved modes, one .npz file per solve key"""

import json
import logging
import os
import tempfile
from pathlib import Path

import numpy as np

from config.settings import VERSION, cache_root
from utils.helpers import content_hash

log = logging.getLogger(__name__)


class ModeCache:
    """
    Mode solutions keyed by the SHA-256 of everything that determines them.

    Entry layout (`<key>.npz`): `header` (JSON string with the key inputs and
    tool version), `n_eff` (m,), `residual` (m,), `fields` (m, nx, nz),
    `x_nm` (nx,), `z_nm` (nz,). An entry with m = 0 records a cutoff.
    """

    def __init__(self, root=None, enabled=True):
        self.root = Path(root) if root else cache_root()
        self.enabled = enabled
        self.hits = 0
        self.misses = 0
        self.writes = 0

    @staticmethod
    def make_key(inputs):
        return content_hash(inputs, VERSION)

    def path_for(self, key):
        return self.root / f"{key}.npz"

    def load(self, key):
        """Return the stored arrays for `key`, or None on a miss"""
        if not self.enabled:
            return None
        path = self.path_for(key)
        if not path.exists():
            self.misses += 1
            return None
        try:
            with np.load(path, allow_pickle=False) as entry:
                data = {name: entry[name] for name in entry.files}
        except (OSError, ValueError) as e:
            log.warning("⚠ Unreadable cache entry %s (%s), re-solving", path.name, e)
            self.misses += 1
            return None
        data["header"] = json.loads(str(data["header"]))
        self.hits += 1
        return data

    def store(self, key, header, n_eff, residual, fields, x_nm, z_nm):
        if not self.enabled:
            return
        self.root.mkdir(parents=True, exist_ok=True)
        header = dict(header, version=VERSION, key=key)
        fd, tmp_name = tempfile.mkstemp(dir=self.root, prefix=".tmp-", suffix=".npz")
        try:
            with os.fdopen(fd, "wb") as fh:
                np.savez(
                    fh,
                    header=np.array(json.dumps(header, sort_keys=True, default=str)),
                    n_eff=np.asarray(n_eff, dtype=float),
                    residual=np.asarray(residual, dtype=float),
                    fields=np.asarray(fields, dtype=float),
                    x_nm=np.asarray(x_nm, dtype=float),
                    z_nm=np.asarray(z_nm, dtype=float),
                )
            os.replace(tmp_name, self.path_for(key))
        except Exception:
            if os.path.exists(tmp_name):
                os.remove(tmp_name)
            raise
        self.writes += 1

    def stats(self):
        return {"hits": self.hits, "misses": self.misses, "writes": self.writes}
