import tempfile
from pathlib import Path
from unittest import TestCase

from risjam import Database, RecordStore, TrialRecord


class DB(TestCase):
    db_path = ":memory:"

    @property
    def db(self) -> Database:
        if not hasattr(self, "_db"):
            self._db = Database(self.db_path)
        return self._db

    def store(self) -> RecordStore:
        "A trial store in a fresh file, removed after the test."
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        store = RecordStore(Path(tmp.name) / "trials.sqlite", TrialRecord)
        self.addCleanup(store.close)
        return store
