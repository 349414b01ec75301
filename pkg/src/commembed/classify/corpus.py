"""Labeled slur-usage corpus: records, CSV loading, label scheme.

Gold labels are four-way (DEG, NDNA, APR, HOM); the classification task is
binary, DEG against the union of the other three (NDG).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

GOLD_LABELS = ("DEG", "NDNA", "APR", "HOM")
DEG = "DEG"
NDG = "NDG"

CSV_COLUMNS = ["id", "subreddit", "author", "created_utc", "slur", "gold_label", "body"]


class CorpusFormatError(Exception):
    pass


@dataclass(frozen=True)
class LabeledComment:
    id: str
    body: str
    subreddit: str
    gold: str
    slur: str
    author: str = ""
    created_utc: int = 0

    @property
    def binary_gold(self) -> str:
        return DEG if self.gold == DEG else NDG


def load_corpus(path: str | Path) -> list[LabeledComment]:
    comments: list[LabeledComment] = []
    seen: set[str] = set()
    with open(path, "rt", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise CorpusFormatError(f"{path}: missing columns {sorted(missing)}")
        for lineno, row in enumerate(reader, 2):
            gold = row["gold_label"]
            if gold not in GOLD_LABELS:
                raise CorpusFormatError(
                    f"{path}:{lineno}: bad gold label {gold!r} (expected one of {GOLD_LABELS})"
                )
            cid = row["id"]
            if not cid:
                raise CorpusFormatError(f"{path}:{lineno}: empty comment id")
            if cid in seen:
                raise CorpusFormatError(f"{path}:{lineno}: duplicate comment id {cid!r}")
            seen.add(cid)
            comments.append(
                LabeledComment(
                    id=cid,
                    body=row["body"],
                    subreddit=row["subreddit"],
                    gold=gold,
                    slur=row["slur"],
                    author=row["author"],
                    created_utc=int(row["created_utc"] or 0),
                )
            )
    return comments


def save_corpus(comments: list[LabeledComment], path: str | Path) -> None:
    with open(path, "wt", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for c in comments:
            writer.writerow(
                [c.id, c.subreddit, c.author, c.created_utc, c.slur, c.gold, c.body]
            )
