"""Symmetric subreddit co-occurrence counting over membership sets.

An entry (i, j) counts the users active (at or above the ingest threshold)
in both subreddit i and subreddit j. Only the upper triangle (i < j) is
stored; the diagonal is excluded; zero intersections are never stored.
"""

from __future__ import annotations

import itertools
import struct
from dataclasses import dataclass, field
from pathlib import Path

from . import fileio
from .ingest import MembershipSets, SubredditVocab

_MATRIX_MAGIC = b"CMCO"


@dataclass
class CooccurrenceMatrix:
    vocab: SubredditVocab
    entries: dict[tuple[int, int], int]

    def get(self, i: int, j: int) -> int:
        if i == j:
            return 0
        if i > j:
            i, j = j, i
        return self.entries.get((i, j), 0)

    def __len__(self) -> int:
        return len(self.entries)

    def save(self, path: str | Path) -> None:
        parts = [
            fileio.pack_names(self.vocab.names),
            struct.pack(f"<{len(self.vocab)}Q", *self.vocab.activity)
            if len(self.vocab)
            else b"",
            struct.pack("<Q", len(self.entries)),
        ]
        for (i, j) in sorted(self.entries):
            parts.append(struct.pack("<IIQ", i, j, self.entries[(i, j)]))
        fileio.write_container(path, _MATRIX_MAGIC, b"".join(parts))

    @classmethod
    def load(cls, path: str | Path) -> "CooccurrenceMatrix":
        payload = memoryview(fileio.read_container(path, _MATRIX_MAGIC))
        names, offset = fileio.unpack_names(payload, 0)
        activity = list(struct.unpack_from(f"<{len(names)}Q", payload, offset))
        offset += 8 * len(names)
        (n_entries,) = struct.unpack_from("<Q", payload, offset)
        offset += 8
        entries: dict[tuple[int, int], int] = {}
        for _ in range(n_entries):
            i, j, count = struct.unpack_from("<IIQ", payload, offset)
            offset += 16
            entries[(i, j)] = count
        return cls(SubredditVocab(names, activity), entries)

    def export_tsv(self, path: str | Path) -> None:
        """Debug export: name_i <TAB> name_j <TAB> count, sorted by (i, j)."""
        with open(path, "wt", encoding="utf-8") as fh:
            for (i, j) in sorted(self.entries):
                fh.write(
                    f"{self.vocab.names[i]}\t{self.vocab.names[j]}\t{self.entries[(i, j)]}\n"
                )


@dataclass
class BuildReport:
    zero_rows: list[str] = field(default_factory=list)
    capped_users: int = 0

    def as_dict(self) -> dict:
        return {"zero_rows": list(self.zero_rows), "capped_users": self.capped_users}


def build_cooccurrence(
    sets: MembershipSets,
    vocab: SubredditVocab,
    max_memberships: int | None = None,
    shards: int = 1,
    report: BuildReport | None = None,
) -> CooccurrenceMatrix:
    """Count co-active users for every subreddit pair in the vocabulary.

    Iterates users rather than subreddit pairs: a user active in d
    subreddits contributes d*(d-1)/2 pair increments, which is cheap because
    membership lists are short for almost all users. Users above
    `max_memberships` (when set) are skipped entirely and tallied in the
    build report. With shards > 1, users are partitioned, counted per shard,
    and the partial maps merged; integer addition makes the merge exact
    regardless of partitioning.
    """
    report = report if report is not None else BuildReport()
    name_to_pos = {name: pos for pos, name in enumerate(vocab.names)}

    # Invert subreddit -> users into user -> vocab positions.
    per_user: dict[int, list[int]] = {}
    for sid, users in sets.members.items():
        name = sets.subreddit_index.names[sid]
        pos = name_to_pos.get(name)
        if pos is None:
            continue
        if not users:
            report.zero_rows.append(name)
        for uid in users:
            per_user.setdefault(uid, []).append(pos)

    shard_maps: list[dict[tuple[int, int], int]] = [dict() for _ in range(max(1, shards))]
    for uid, positions in per_user.items():
        if max_memberships is not None and len(positions) > max_memberships:
            report.capped_users += 1
            continue
        if len(positions) < 2:
            continue
        counts = shard_maps[uid % len(shard_maps)]
        for pair in itertools.combinations(sorted(positions), 2):
            counts[pair] = counts.get(pair, 0) + 1

    merged = shard_maps[0]
    for partial in shard_maps[1:]:
        for pair, n in partial.items():
            merged[pair] = merged.get(pair, 0) + n

    # Subreddits in vocab with no members at all still need a zero-row flag.
    seen = {sets.subreddit_index.names[sid] for sid in sets.members}
    for name in vocab.names:
        if name not in seen and name not in report.zero_rows:
            report.zero_rows.append(name)

    return CooccurrenceMatrix(vocab, merged)


def brute_force_cooccurrence(
    sets: MembershipSets, vocab: SubredditVocab
) -> CooccurrenceMatrix:
    """Direct pairwise set-intersection counting. Oracle for the fast build."""
    by_name = {
        sets.subreddit_index.names[sid]: users for sid, users in sets.members.items()
    }
    entries: dict[tuple[int, int], int] = {}
    for i in range(len(vocab)):
        for j in range(i + 1, len(vocab)):
            a = by_name.get(vocab.names[i], set())
            b = by_name.get(vocab.names[j], set())
            n = len(a & b)
            if n:
                entries[(i, j)] = n
    return CooccurrenceMatrix(vocab, entries)
