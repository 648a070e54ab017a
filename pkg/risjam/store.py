"""
Trial persistence: a small dataclass-to-SQLite mapper.
Tables are derived from dataclass fields. Enum members are stored by name, bools as integers.
"""

import dataclasses
import functools
import logging
import math
import sqlite3
import typing as t
from contextlib import contextmanager
from enum import Enum

logger = logging.getLogger(__name__)


# SECTION 1: Database
class Database:

    connection_pool: t.Dict[str, sqlite3.Connection] = dict()

    def __init__(self, db_path: str = ":memory:"):
        self.db_path = str(db_path)
        self._c = self.connection_pool.get(self.db_path)

    def dict_factory(
        self, cursor: sqlite3.Cursor, row: sqlite3.Row
    ) -> t.Dict[str, t.Any]:
        return {col[0]: row[idx] for idx, col in enumerate(cursor.description)}

    def connect(self):
        self._c = self.connection_pool.get(self.db_path)
        if self._c is None:
            self._c = sqlite3.connect(self.db_path)
            self._c.row_factory = self.dict_factory
            self.connection_pool[self.db_path] = self._c

    @property
    def c(self) -> sqlite3.Connection:
        if self._c is None:
            self.connect()
        return self._c

    def close(self):
        if self._c is not None:
            self._c.close()
            self._c = None
        self.connection_pool.pop(self.db_path, None)

    @contextmanager
    def cursor(self, auto_commit=True):
        cursor = self.c.cursor()
        try:
            yield cursor
            if auto_commit:
                self.c.commit()
        except Exception:
            self.c.rollback()
            raise
        finally:
            cursor.close()

    def execute(
        self,
        sql: str,
        parameters: t.Optional[t.Union[t.Dict, t.List[t.Dict]]] = None,
    ) -> t.List[t.Dict[str, t.Any]]:
        """Execute one statement. A list of parameter dicts runs it once per dict."""
        with self.cursor() as cur:
            execute = cur.executemany if isinstance(parameters, list) else cur.execute
            try:
                execute(sql, parameters if parameters is not None else {})
            except sqlite3.Error:
                logger.error("Statement failed: %s", sql)
                raise
            return cur.fetchall()


# SECTION 2: Type handlers
class TypeMaster:
    sql_types: t.Dict[type, str] = {
        bool: "INTEGER",
        int: "INTEGER",
        float: "REAL",
        str: "TEXT",
    }

    @classmethod
    def sql_type(cls, python_type: type) -> str:
        if isinstance(python_type, type) and issubclass(python_type, Enum):
            return "TEXT"
        try:
            return cls.sql_types[python_type]
        except KeyError:
            raise TypeError(f"No SQL type for {python_type}.") from None

    @staticmethod
    def to_sql(value: t.Any) -> t.Union[None, int, float, str]:
        if isinstance(value, Enum):
            return value.name
        if isinstance(value, bool):
            return int(value)
        return value

    @staticmethod
    def to_python(python_type: type, value: t.Any) -> t.Any:
        # SQLite has no NaN, it comes back as NULL
        if value is None:
            return math.nan if python_type is float else None
        if isinstance(python_type, type) and issubclass(python_type, Enum):
            return python_type[value]
        return python_type(value)


# SECTION 3: Columns and tables
@dataclasses.dataclass
class Column:
    column_name: str = ""
    python_type: type = str
    nullable: bool = True
    pkey: bool = False

    def __post_init__(self):
        if not self.column_name:
            raise ValueError("column_name is required for Column instance.")

    @property
    def name(self):
        return self.column_name

    def sql(self) -> str:
        parts = [f"[{self.column_name}]", TypeMaster.sql_type(self.python_type)]
        if self.pkey:
            parts.append("PRIMARY KEY")
        if not self.nullable:
            parts.append("NOT NULL")
        return " ".join(parts)


@dataclasses.dataclass
class Table:
    table_name: str = ""
    column: t.List[Column] = dataclasses.field(default_factory=list)
    record_type: t.Optional[type] = None

    def __post_init__(self):
        if not self.column or not self.table_name:
            raise ValueError("table_name and column are required for Table instance.")

    @property
    def name(self):
        return self.table_name

    def create_sql(self) -> str:
        columns = ", ".join(c.sql() for c in self.column)
        return f"CREATE TABLE IF NOT EXISTS [{self.name}] ({columns})"

    def insert_sql(self) -> str:
        names = ", ".join(f"[{c.name}]" for c in self.column)
        params = ", ".join(f":{c.name}" for c in self.column)
        return f"INSERT INTO [{self.name}] ({names}) VALUES ({params})"

    def select_sql(self, where: t.Optional[t.Dict] = None) -> str:
        sql = f"SELECT * FROM [{self.name}]"
        if where:
            sql += " WHERE " + " AND ".join(f"[{k}] = :{k}" for k in where)
        return sql + " ORDER BY rowid"

    def data(self, record) -> t.Dict[str, t.Any]:
        return {c.name: TypeMaster.to_sql(getattr(record, c.name)) for c in self.column}

    def from_row(self, row: t.Dict[str, t.Any]):
        values = {c.name: TypeMaster.to_python(c.python_type, row[c.name]) for c in self.column}
        return self.record_type(**values) if self.record_type else values

    def create(self, db: Database) -> None:
        db.execute(self.create_sql())

    def insert(self, db: Database, records: t.Sequence) -> int:
        if records:
            db.execute(self.insert_sql(), [self.data(r) for r in records])
        return len(records)

    def select(self, db: Database, where: t.Optional[t.Dict] = None) -> t.List:
        unknown = set(where or ()) - {c.name for c in self.column}
        if unknown:
            raise ValueError(f"Unknown column(s) for {self.name}: {', '.join(sorted(unknown))}")
        parameters = {k: TypeMaster.to_sql(v) for k, v in (where or {}).items()}
        return [self.from_row(row) for row in db.execute(self.select_sql(where), parameters)]


@functools.singledispatch
def columnify(object) -> Column:
    if not isinstance(object, Column):
        raise ValueError("Only instances of Column and dataclasses.Field are valid.")
    return object


@columnify.register
def _(object: dataclasses.Field) -> Column:  # type: ignore
    optional = t.get_origin(object.type) is t.Union
    python_type = (
        [a for a in t.get_args(object.type) if a is not type(None)][0]
        if optional
        else object.type
    )
    # NaN floats are stored as NULL
    nullable = optional or python_type is float
    return Column(column_name=object.name, python_type=python_type, nullable=nullable)


@functools.singledispatch
def tablify(object, table_name: t.Optional[str] = None) -> Table:
    if dataclasses.is_dataclass(object):
        return tablify(type(object), table_name)
    raise ValueError(f"{type(object)} is not a supported type.")


@tablify.register
def _(object: type, table_name: t.Optional[str] = None) -> Table:  # type: ignore
    if not dataclasses.is_dataclass(object):
        raise ValueError(f"{object} is not a dataclass.")
    return Table(
        table_name=table_name if table_name else object.__name__,
        column=[
            columnify(field)
            for field in dataclasses.fields(object)
            if not field.metadata.get("exclude_column")
        ],
        record_type=object,
    )


# SECTION 4: Record store
class RecordStore:
    """Append-only store of dataclass records in one table."""

    def __init__(self, db_path: str, record_type: type):
        self.db = Database(db_path)
        self.table = tablify(record_type)
        self.table.create(self.db)

    def save(self, records: t.Sequence) -> int:
        count = self.table.insert(self.db, list(records))
        logger.info("Stored %d %s rows in %s", count, self.table.name, self.db.db_path)
        return count

    def records(self, where: t.Optional[t.Dict] = None) -> t.List:
        return self.table.select(self.db, where)

    def close(self):
        self.db.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
