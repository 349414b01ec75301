"""Similarity, neighbor, composition, and analogy queries over an embedding space.

Vectors are L2-normalized once at load; every score after that is a plain
dot product. Query inputs are always excluded from their own candidate
sets, and ties break lexicographically so ranked output is deterministic.
"""

from __future__ import annotations

import difflib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .glove import EmbeddingMatrix


class UnknownNameError(KeyError):
    """Query name not in the vocabulary; carries close string matches."""

    def __init__(self, name: str, suggestions: list[str]):
        hint = f" (did you mean: {', '.join(suggestions)}?)" if suggestions else ""
        super().__init__(f"unknown subreddit {name!r}{hint}")
        self.name = name
        self.suggestions = suggestions


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine is undefined for zero-norm vectors")
    return float(np.dot(u, v) / (nu * nv))


class EmbeddingSpace:
    """Read-only, normalized view of an EmbeddingMatrix for querying."""

    def __init__(self, matrix: EmbeddingMatrix):
        norms = np.linalg.norm(matrix.vectors, axis=1)
        if np.any(norms == 0.0):
            bad = [matrix.names[i] for i in np.nonzero(norms == 0.0)[0][:5]]
            raise ValueError(f"zero-norm embedding vectors for {bad}")
        self.names = list(matrix.names)
        self.index = {n: i for i, n in enumerate(self.names)}
        self.unit = matrix.vectors / norms[:, None]
        # Rank of each vocab position in lexicographic name order (tie-break).
        order = sorted(range(len(self.names)), key=lambda i: self.names[i])
        self._name_rank = np.empty(len(self.names), dtype=np.int64)
        for rank, pos in enumerate(order):
            self._name_rank[pos] = rank

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingSpace":
        return cls(EmbeddingMatrix.load(path))

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self.index

    def lookup(self, name: str) -> int:
        idx = self.index.get(name)
        if idx is None:
            raise UnknownNameError(
                name, difflib.get_close_matches(name, self.names, n=3)
            )
        return idx

    def vector(self, name: str) -> np.ndarray:
        return self.unit[self.lookup(name)]

    def similarity(self, a: str, b: str) -> float:
        return float(np.dot(self.vector(a), self.vector(b)))

    def _rank(
        self, query: np.ndarray, k: int, exclude: set[str]
    ) -> list[tuple[str, float]]:
        if k < 0:
            raise ValueError("k must be >= 0")
        if k == 0:
            return []
        qnorm = np.linalg.norm(query)
        if qnorm == 0.0:
            raise ValueError("query vector has zero norm")
        scores = self.unit @ (query / qnorm)
        mask = np.ones(len(self.names), dtype=bool)
        for name in exclude:
            idx = self.index.get(name)
            if idx is not None:
                mask[idx] = False
        candidates = np.nonzero(mask)[0]
        # Descending score, lexicographic names on ties.
        ordered = candidates[np.lexsort((self._name_rank[candidates], -scores[candidates]))]
        top = ordered[:k]
        return [(self.names[i], float(scores[i])) for i in top]

    def nearest_neighbors(
        self, name: str, k: int, exclude: set[str] | None = None
    ) -> list[tuple[str, float]]:
        idx = self.lookup(name)
        excl = set(exclude) if exclude else set()
        excl.add(name)
        return self._rank(self.unit[idx], k, excl)

    def compose(self, left: str, right: str, k: int) -> list[tuple[str, float]]:
        query = self.vector(left) + self.vector(right)
        return self._rank(query, k, {left, right})

    def analogy(self, a: str, b: str, c: str, k: int) -> list[tuple[str, float]]:
        """a : b :: c : ?  scored as cosine against (b - a + c)."""
        query = self.vector(b) - self.vector(a) + self.vector(c)
        return self._rank(query, k, {a, b, c})


@dataclass(frozen=True)
class CompositionTest:
    left: str
    right: str
    expected: str


@dataclass(frozen=True)
class AnalogyTest:
    a: str
    b: str
    c: str
    expected: str


def load_composition_suite(path: str | Path) -> list[CompositionTest]:
    return [CompositionTest(*row) for row in _read_suite_rows(path, 3)]


def load_analogy_suite(path: str | Path) -> list[AnalogyTest]:
    return [AnalogyTest(*row) for row in _read_suite_rows(path, 4)]


def _read_suite_rows(path: str | Path, width: int) -> list[tuple[str, ...]]:
    rows = []
    with open(path, "rt", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != width:
                raise ValueError(
                    f"{path}:{lineno}: expected {width} tab-separated fields, got {len(parts)}"
                )
            rows.append(tuple(parts))
    return rows


@dataclass
class EvalReport:
    suite: str
    kind: str
    k: int
    total: int = 0
    skips: int = 0
    hits_at_1: int = 0
    hits_at_5: int = 0
    tests: list[dict] = field(default_factory=list)
    skipped: list[dict] = field(default_factory=list)

    @property
    def scored(self) -> int:
        return self.total - self.skips

    def hit_rate(self, at: int = 5) -> float:
        hits = self.hits_at_1 if at == 1 else self.hits_at_5
        return hits / self.scored if self.scored else 0.0

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "type": self.kind,
            "k": self.k,
            "total": self.total,
            "skips": self.skips,
            "hits_at_1": self.hits_at_1,
            "hits_at_5": self.hits_at_5,
            "hit_rate_at_5": self.hit_rate(5),
            "tests": self.tests,
            "skipped": self.skipped,
        }

    def save(self, path: str | Path) -> None:
        with open(path, "wt", encoding="utf-8") as fh:
            json.dump(self.as_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def run_eval_suite(
    space: EmbeddingSpace,
    tests: list[CompositionTest | AnalogyTest],
    k: int = 5,
    suite_name: str = "suite",
) -> EvalReport:
    """Grade a suite; tests referencing out-of-vocab names are skipped, not failed."""
    if k < 1:
        raise ValueError("k must be >= 1")
    depth = max(k, 5)
    kind = "mixed"
    kinds = {type(t).__name__ for t in tests}
    if kinds == {"CompositionTest"}:
        kind = "composition"
    elif kinds == {"AnalogyTest"}:
        kind = "analogy"
    report = EvalReport(suite_name, kind, k, total=len(tests))
    for test in tests:
        if isinstance(test, CompositionTest):
            query_names = [test.left, test.right]
        else:
            query_names = [test.a, test.b, test.c]
        missing = [n for n in query_names + [test.expected] if n not in space]
        if missing:
            report.skips += 1
            report.skipped.append(
                {"test": query_names + [test.expected], "reason": f"out of vocab: {missing}"}
            )
            continue
        if isinstance(test, CompositionTest):
            ranked = space.compose(test.left, test.right, depth)
        else:
            ranked = space.analogy(test.a, test.b, test.c, depth)
        names = [n for n, _ in ranked]
        hit1 = bool(names[:1]) and names[0] == test.expected
        hit5 = test.expected in names[:5]
        report.hits_at_1 += hit1
        report.hits_at_5 += hit5
        report.tests.append(
            {
                "query": query_names,
                "expected": test.expected,
                "hit_at_1": hit1,
                "hit_at_5": hit5,
                "candidates": [[n, s] for n, s in ranked[:k]],
            }
        )
    return report
