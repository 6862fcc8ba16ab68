"""Append-only JSONL run log: one JSON object per line, crash-tolerant,
grep-able. The first record of a run is always the config snapshot."""
from __future__ import annotations

import json
import threading
from pathlib import Path


class RunLog:
    def __init__(self, path, seed: int):
        self.path = Path(path)
        self.seed = seed
        self._seq = 0
        self._lock = threading.Lock()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "w", encoding="utf-8")

    def append(self, kind: str, **fields) -> dict:
        with self._lock:
            record = {"seq": self._seq, "seed": self.seed, "kind": kind}
            record.update(fields)
            self._seq += 1
            self._fh.write(json.dumps(record) + "\n")
            self._fh.flush()
        return record

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "RunLog":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    @staticmethod
    def read(path) -> list[dict]:
        records = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
        return records
