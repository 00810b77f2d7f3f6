"""Finite estimator collections and the brute-force penalized argmin.

A collection holds, for every candidate estimator ``m``, its empirical risk
``f(m)``, two penalty shapes (``pen0`` drives the minimal-penalty path, ``pen1``
the final selection) and a complexity measure.  Records are kept sorted by
``(pen0, id)``; that ordering is the strict total order used to break ties
everywhere in the package.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

from .exceptions import DuplicateId, EmptyCollection, NonFiniteField, ValidationError

CSV_FIELDS = ("id", "empirical_risk", "pen0", "pen1", "complexity")


@dataclass(frozen=True)
class EstimatorRecord:
    id: Hashable
    empirical_risk: float
    pen0: float
    pen1: float
    complexity: float


class Collection:
    """Immutable, validated sequence of :class:`EstimatorRecord`.

    Use :func:`validate_collection` to build one.  Column arrays
    (``risk``, ``pen0``, ``pen1``, ``complexity``) are read-only numpy views
    aligned with ``records``.
    """

    def __init__(self, records: Sequence[EstimatorRecord]):
        self.records = tuple(records)
        self.ids = tuple(r.id for r in self.records)
        self._index = {rid: i for i, rid in enumerate(self.ids)}

        def col(name):
            a = np.array([getattr(r, name) for r in self.records], dtype=float)
            a.setflags(write=False)
            return a

        self.risk = col("empirical_risk")
        self.pen0 = col("pen0")
        self.pen1 = col("pen1")
        self.complexity = col("complexity")

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def __repr__(self):
        return f"Collection({len(self)} records)"

    def position(self, record_id) -> int:
        """Rank of ``record_id`` in the tie-breaking order."""
        return self._index[record_id]

    def record(self, record_id) -> EstimatorRecord:
        return self.records[self._index[record_id]]

    def scaled(self, factor: float) -> "Collection":
        """Copy with risks and both penalty shapes multiplied by ``factor``."""
        return validate_collection(
            EstimatorRecord(r.id, factor * r.empirical_risk, factor * r.pen0,
                            factor * r.pen1, r.complexity)
            for r in self.records
        )

    def to_csv(self, fh=None) -> str | None:
        """Write the collection in the interchange CSV format.

        Returns the text when ``fh`` is None.
        """
        out = io.StringIO() if fh is None else fh
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for r in self.records:
            w.writerow([r.id, repr(float(r.empirical_risk)), repr(float(r.pen0)),
                        repr(float(r.pen1)), repr(float(r.complexity))])
        if fh is None:
            return out.getvalue()
        return None


def _sort_key(rec: EstimatorRecord):
    # ids of mixed types still need a deterministic order
    rid = rec.id
    if isinstance(rid, (int, float, np.integer, np.floating)) and not isinstance(rid, bool):
        return (rec.pen0, 0, float(rid), "")
    return (rec.pen0, 1, 0.0, str(rid))


def validate_collection(records: Iterable[EstimatorRecord]) -> Collection:
    """Validate records and sort them by ``(pen0, id)``.

    Raises
    ------
    EmptyCollection
        No records were given.
    NonFiniteField
        Some numeric field is NaN or infinite.
    DuplicateId
        Two records share an id.
    """
    recs = list(records)
    if not recs:
        raise EmptyCollection("a collection needs at least one record")
    seen = set()
    for r in recs:
        for name in ("empirical_risk", "pen0", "pen1", "complexity"):
            v = getattr(r, name)
            try:
                ok = math.isfinite(float(v))
            except (TypeError, ValueError):
                ok = False
            if not ok:
                raise NonFiniteField(r.id, name)
        if r.id in seen:
            raise DuplicateId(f"duplicate record id {r.id!r}")
        seen.add(r.id)
    if any(r.pen0 < 0 for r in recs):
        # allowed for some linear estimators; the path algorithm still runs
        warnings.warn("negative pen0 values in collection", RuntimeWarning, stacklevel=2)
    recs.sort(key=_sort_key)
    return Collection(recs)


def from_arrays(risk, pen0, pen1=None, complexity=None, ids=None) -> Collection:
    """Build a validated collection from parallel arrays.

    ``pen1`` defaults to ``2 * pen0`` and ``complexity`` to ``pen0``;
    ``ids`` default to ``0 .. len(risk) - 1``.
    """
    risk = np.asarray(risk, dtype=float)
    pen0 = np.asarray(pen0, dtype=float)
    pen1 = 2.0 * pen0 if pen1 is None else np.asarray(pen1, dtype=float)
    complexity = pen0 if complexity is None else np.asarray(complexity, dtype=float)
    if ids is None:
        ids = range(len(risk))
    ids = list(ids)
    if not (len(ids) == len(risk) == len(pen0) == len(pen1) == len(complexity)):
        raise ValidationError("array lengths differ")
    return validate_collection(
        EstimatorRecord(i, float(a), float(b), float(c), float(d))
        for i, a, b, c, d in zip(ids, risk, pen0, pen1, complexity)
    )


def read_csv(fh) -> Collection:
    """Parse the interchange CSV (header ``id,empirical_risk,pen0,pen1,complexity``).

    Integer-looking ids are converted to ``int``.
    """
    reader = csv.DictReader(fh)
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != list(CSV_FIELDS):
        raise ValidationError(f"expected CSV header {','.join(CSV_FIELDS)}")
    recs = []
    for lineno, row in enumerate(reader, start=2):
        if None in row or any(v is None for v in row.values()):
            raise ValidationError(f"line {lineno}: wrong number of fields")
        raw_id = row["id"].strip()
        try:
            rid = int(raw_id)
        except ValueError:
            rid = raw_id
        try:
            vals = [float(row[k]) for k in CSV_FIELDS[1:]]
        except ValueError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
        recs.append(EstimatorRecord(rid, *vals))
    return validate_collection(recs)


def penalized_argmin(collection: Collection, C: float, shape: str = "pen0") -> int:
    """Position of the first minimizer of ``risk + C * shape`` (any real ``C``)."""
    crit = collection.risk + C * getattr(collection, shape)
    return int(np.argmin(crit))


def brute_force_argmin(collection: Collection, C: float):
    """Exact scan for the ``(pen0, id)``-smallest minimizer of ``risk + C * pen0``.

    This is the reference oracle for :func:`penmin.path.compute_path`; it
    does not use the path.
    """
    # np.argmin returns the first minimizer, i.e. the smallest in collection order
    return collection.ids[int(np.argmin(collection.risk + C * collection.pen0))]
