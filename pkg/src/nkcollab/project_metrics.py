"""Project efficiency and performance from article grade-transition logs.

Efficiency for grade ``G`` is the number of articles that ever cross from
below ``G`` to ``G`` or above, divided by the revisions spent on those
crossings; a transition spanning several grade levels charges each level an
equal share of its revisions. Performance is the share of a project's
articles that ever reach GA or FA status.

Input CSV header: ``project,article,timestamp,old_grade,new_grade,revisions``.
An empty ``old_grade`` marks an article's first assessment; it is ranked one
level below the lowest grade.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from datetime import datetime
from typing import Iterable

import numpy as np

DEFAULT_GRADES = ("Stub", "Start", "C", "B", "A", "GA", "FA")
TOP_STATUSES = ("GA", "FA")
LOG_COLUMNS = ("project", "article", "timestamp", "old_grade", "new_grade", "revisions")
STATS_COLUMNS = ("project", "E_A", "E_B", "E_C", "P", "n_articles")


class UndefinedEfficiencyError(ValueError):
    pass


@dataclass(frozen=True)
class GradeScale:
    labels: tuple = DEFAULT_GRADES
    ranks: tuple = ()

    def __post_init__(self):
        ranks = self.ranks or tuple(range(len(self.labels)))
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("grade labels must be unique")
        if len(ranks) != len(self.labels) or any(b <= a for a, b in zip(ranks, ranks[1:])):
            raise ValueError("grade ranks must be strictly increasing, one per label")
        object.__setattr__(self, "ranks", tuple(int(r) for r in ranks))

    def rank(self, grade: str | None) -> int:
        if grade is None or grade == "":
            return self.ranks[0] - 1
        try:
            return self.ranks[self.labels.index(grade)]
        except ValueError:
            raise ValueError(f"unknown grade {grade!r}") from None

    def __contains__(self, grade):
        return grade in self.labels


@dataclass(frozen=True)
class Transition:
    project: str
    article: str
    timestamp: datetime
    old_grade: str | None
    new_grade: str
    revisions: int


@dataclass
class TransitionLog:
    records: list = field(default_factory=list)
    scale: GradeScale = field(default_factory=GradeScale)

    def __post_init__(self):
        self.validate()

    def validate(self):
        last: dict = {}
        for r in self.records:
            if r.revisions < 0:
                raise ValueError(f"negative revision count for article {r.article!r}")
            for g in (r.old_grade, r.new_grade):
                if g not in (None, "") and g not in self.scale:
                    raise ValueError(f"grade {g!r} not in scale")
            key = (r.project, r.article)
            if key in last and r.timestamp < last[key]:
                raise ValueError(f"timestamps decrease for article {r.article!r} in project {r.project!r}")
            last[key] = r.timestamp

    def projects(self) -> list:
        return sorted({r.project for r in self.records})

    def for_project(self, project) -> list:
        return [r for r in self.records if r.project == project]


def _parse_time(text: str) -> datetime:
    return datetime.fromisoformat(text.strip().replace("Z", "+00:00"))


def read_transition_log(path, scale: GradeScale | None = None) -> TransitionLog:
    scale = scale or GradeScale()
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(LOG_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"transition CSV is missing columns: {', '.join(sorted(missing))}")
        for row in reader:
            records.append(
                Transition(
                    project=row["project"],
                    article=row["article"],
                    timestamp=_parse_time(row["timestamp"]),
                    old_grade=row["old_grade"] or None,
                    new_grade=row["new_grade"],
                    revisions=int(row["revisions"]),
                )
            )
    return TransitionLog(records, scale)


def write_transition_log(log: TransitionLog, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(LOG_COLUMNS)
        for r in log.records:
            w.writerow([r.project, r.article, r.timestamp.isoformat(), r.old_grade or "", r.new_grade, r.revisions])


def crossings(record: Transition, grade: str, scale: GradeScale) -> bool:
    """True when the transition moves from below ``grade`` to ``grade`` or higher."""
    target = scale.rank(grade)
    return scale.rank(record.old_grade) < target <= scale.rank(record.new_grade)


def levels_crossed(record: Transition, scale: GradeScale) -> int:
    return scale.rank(record.new_grade) - scale.rank(record.old_grade)


def efficiency_terms(log: TransitionLog, project, grade: str):
    """``(articles, revisions per level)`` for the qualifying transitions of one project."""
    scale = log.scale
    arts, terms = [], []
    for r in log.records:
        if r.project == project and crossings(r, grade, scale):
            arts.append(r.article)
            terms.append(r.revisions / levels_crossed(r, scale))
    return arts, terms


def efficiency(log: TransitionLog, project, grade: str) -> float:
    """Qualifying articles divided by the summed revisions-per-level of qualifying transitions.

    Raises :class:`UndefinedEfficiencyError` when no transition reaches ``grade``.
    Returns ``inf`` if every qualifying transition has zero revisions.
    """
    arts, terms = efficiency_terms(log, project, grade)
    if not arts:
        raise UndefinedEfficiencyError(f"no transitions reach grade {grade!r} in project {project!r}")
    total = math.fsum(terms)
    if total == 0.0:
        return math.inf
    return len(set(arts)) / total


def performance(log: TransitionLog, project, top: Iterable[str] = TOP_STATUSES) -> float:
    """Share of the project's distinct articles that ever hold one of the ``top`` statuses."""
    top = set(top)
    articles, reached = set(), set()
    for r in log.records:
        if r.project != project:
            continue
        articles.add(r.article)
        if r.new_grade in top or r.old_grade in top:
            reached.add(r.article)
    if not articles:
        raise ValueError(f"project {project!r} has no articles")
    return len(reached) / len(articles)


class EfficiencyAccumulator:
    """Single-pass accumulation of efficiency for every (project, grade)."""

    def __init__(self, scale: GradeScale | None = None, grades=("A", "B", "C")):
        self.scale = scale or GradeScale()
        self.grades = tuple(grades)
        self._sum = defaultdict(float)
        self._articles = defaultdict(set)

    def add(self, r: Transition) -> None:
        lo, hi = self.scale.rank(r.old_grade), self.scale.rank(r.new_grade)
        if hi <= lo:
            return
        share = r.revisions / (hi - lo)
        for g in self.grades:
            if lo < self.scale.rank(g) <= hi:
                self._sum[r.project, g] += share
                self._articles[r.project, g].add(r.article)

    def efficiency(self, project, grade) -> float:
        arts = self._articles.get((project, grade))
        if not arts:
            raise UndefinedEfficiencyError(f"no transitions reach grade {grade!r} in project {project!r}")
        total = self._sum[project, grade]
        return math.inf if total == 0.0 else len(arts) / total


def project_stats(log: TransitionLog, grades=("A", "B", "C")) -> list[dict]:
    rows = []
    for project in log.projects():
        row = {"project": project}
        for g in grades:
            try:
                row[f"E_{g}"] = efficiency(log, project, g)
            except UndefinedEfficiencyError:
                row[f"E_{g}"] = None
        row["P"] = performance(log, project)
        row["n_articles"] = len({r.article for r in log.records if r.project == project})
        rows.append(row)
    return rows


def write_stats_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(STATS_COLUMNS)
        for row in rows:
            w.writerow(["" if row.get(c) is None else (repr(row[c]) if isinstance(row[c], float) else row[c]) for c in STATS_COLUMNS])


def duplicate_project(log: TransitionLog, project, suffix: str = "#dup") -> TransitionLog:
    """Log with every article of ``project`` copied under a new id."""
    extra = [replace(r, article=f"{r.article}{suffix}") for r in log.records if r.project == project]
    return TransitionLog(log.records + extra, log.scale)


@dataclass(frozen=True)
class AxiomReport:
    increasing_in_transitions: bool
    decreasing_in_revisions: bool
    size_independent: bool
    base: float
    more_transitions: float
    more_revisions: float
    duplicated: float

    @property
    def ok(self) -> bool:
        return self.increasing_in_transitions and self.decreasing_in_revisions and self.size_independent


def axioms_check(log: TransitionLog, project, grade: str, rel_tol: float = 1e-12) -> AxiomReport:
    """Probe the three efficiency axioms on real data.

    * an extra article reaching ``grade`` with zero revisions must raise E;
    * one more revision on an existing qualifying transition must lower E;
    * duplicating every article of the project must leave E unchanged.
    """
    scale = log.scale
    base = efficiency(log, project, grade)
    recs = log.for_project(project)
    t0 = max((r.timestamp for r in recs), default=datetime(2000, 1, 1))
    below = scale.labels[scale.labels.index(grade) - 1] if scale.labels.index(grade) > 0 else None
    added = Transition(project, "__axiom_probe__", t0, below, grade, 0)
    more_t = efficiency(TransitionLog(log.records + [added], scale), project, grade)

    idx = next(i for i, r in enumerate(log.records) if r.project == project and crossings(r, grade, scale))
    bumped = list(log.records)
    bumped[idx] = replace(bumped[idx], revisions=bumped[idx].revisions + 1)
    more_r = efficiency(TransitionLog(bumped, scale), project, grade)

    dup = efficiency(duplicate_project(log, project), project, grade)
    same = dup == base or (math.isfinite(base) and abs(dup - base) <= rel_tol * abs(base))
    return AxiomReport(
        increasing_in_transitions=more_t > base,
        decreasing_in_revisions=more_r < base,
        size_independent=bool(same),
        base=base,
        more_transitions=more_t,
        more_revisions=more_r,
        duplicated=dup,
    )


def batch_efficiency(log: TransitionLog, project, grade: str) -> float:
    """Vectorised recomputation used to cross-check the streaming path."""
    scale = log.scale
    recs = log.for_project(project)
    lo = np.array([scale.rank(r.old_grade) for r in recs])
    hi = np.array([scale.rank(r.new_grade) for r in recs])
    rev = np.array([r.revisions for r in recs], dtype=np.float64)
    g = scale.rank(grade)
    q = (lo < g) & (g <= hi)
    if not q.any():
        raise UndefinedEfficiencyError(f"no transitions reach grade {grade!r}")
    n_articles = len({recs[i].article for i in np.nonzero(q)[0]})
    total = float(np.sum(rev[q] / (hi[q] - lo[q])))
    return math.inf if total == 0.0 else n_articles / total
