"""Stream comment dumps into user/subreddit activity counts and membership sets.

The input is newline-delimited JSON, one comment object per line, following
the public Reddit archive schema (``author``, ``subreddit``, ``created_utc``,
``id``, ``body``). Ingestion is shard-friendly: each input file is
accumulated independently and tables are merged exactly afterwards.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

from . import fileio

log = logging.getLogger(__name__)

DELETED_AUTHORS = frozenset({"[deleted]", "[removed]"})

# Skip reasons surfaced in the ingest report.
PARSE_ERROR = "parse-error"
DELETED_AUTHOR = "deleted-author"
MISSING_FIELD = "missing-field"

_ACTIVITY_MAGIC = b"CMAT"
_MEMBERS_MAGIC = b"CMMS"


@dataclass(frozen=True)
class CommentRecord:
    author: str
    subreddit: str
    created_utc: int
    id: str
    body: str = ""


@dataclass(frozen=True)
class SkipMarker:
    reason: str
    detail: str = ""


def parse_comment_line(raw_line: str) -> CommentRecord | SkipMarker:
    """Parse one dump line into a record, or a skip marker with a reason.

    Never raises on bad input: malformed JSON and missing fields become
    skip markers so a multi-terabyte ingest cannot die on one line.
    """
    try:
        obj = json.loads(raw_line)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        return SkipMarker(PARSE_ERROR, str(exc))
    if not isinstance(obj, dict):
        return SkipMarker(PARSE_ERROR, "line is not a JSON object")

    author = obj.get("author")
    if not isinstance(author, str) or not author:
        return SkipMarker(MISSING_FIELD, "author")
    if author in DELETED_AUTHORS:
        return SkipMarker(DELETED_AUTHOR, author)

    subreddit = obj.get("subreddit")
    if not isinstance(subreddit, str) or not subreddit:
        return SkipMarker(MISSING_FIELD, "subreddit")
    comment_id = obj.get("id")
    if not isinstance(comment_id, str) or not comment_id:
        return SkipMarker(MISSING_FIELD, "id")
    created = obj.get("created_utc")
    try:
        created_utc = int(created)
    except (TypeError, ValueError):
        return SkipMarker(MISSING_FIELD, "created_utc")

    body = obj.get("body")
    if not isinstance(body, str):
        body = ""
    return CommentRecord(author, subreddit, created_utc, comment_id, body)


class Indexer:
    """Bidirectional string <-> integer id mapping (insertion order)."""

    def __init__(self, names: list[str] | None = None):
        self.names: list[str] = list(names) if names else []
        self.ids: dict[str, int] = {n: i for i, n in enumerate(self.names)}
        if len(self.ids) != len(self.names):
            raise ValueError("duplicate names in index")

    def intern(self, name: str) -> int:
        idx = self.ids.get(name)
        if idx is None:
            idx = len(self.names)
            self.ids[name] = idx
            self.names.append(name)
        return idx

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self.ids


@dataclass
class ActivityTable:
    """Per-(user, subreddit) comment counts with interned string ids."""

    counts: dict[tuple[int, int], int] = field(default_factory=dict)
    user_index: Indexer = field(default_factory=Indexer)
    subreddit_index: Indexer = field(default_factory=Indexer)

    def add(self, author: str, subreddit: str, n: int = 1) -> None:
        key = (self.user_index.intern(author), self.subreddit_index.intern(subreddit))
        self.counts[key] = self.counts.get(key, 0) + n

    def total(self) -> int:
        return sum(self.counts.values())

    def merge(self, other: "ActivityTable") -> "ActivityTable":
        """Exact additive merge; other's ids are remapped through names."""
        for (uid, sid), n in other.counts.items():
            self.add(other.user_index.names[uid], other.subreddit_index.names[sid], n)
        return self

    def save(self, path: str | Path) -> None:
        parts = [
            fileio.pack_names(self.user_index.names),
            fileio.pack_names(self.subreddit_index.names),
            struct.pack("<Q", len(self.counts)),
        ]
        for (uid, sid) in sorted(self.counts):
            parts.append(struct.pack("<QQQ", uid, sid, self.counts[(uid, sid)]))
        fileio.write_container(path, _ACTIVITY_MAGIC, b"".join(parts))

    @classmethod
    def load(cls, path: str | Path) -> "ActivityTable":
        payload = memoryview(fileio.read_container(path, _ACTIVITY_MAGIC))
        users, offset = fileio.unpack_names(payload, 0)
        subs, offset = fileio.unpack_names(payload, offset)
        (n_entries,) = struct.unpack_from("<Q", payload, offset)
        offset += 8
        counts: dict[tuple[int, int], int] = {}
        for _ in range(n_entries):
            uid, sid, n = struct.unpack_from("<QQQ", payload, offset)
            offset += 24
            counts[(uid, sid)] = n
        return cls(counts, Indexer(users), Indexer(subs))


def accumulate_activity(records) -> ActivityTable:
    """Tally an iterable of CommentRecord into a fresh ActivityTable."""
    table = ActivityTable()
    for rec in records:
        table.add(rec.author, rec.subreddit)
    return table


def load_bot_list(path: str | Path) -> set[str]:
    """One account name per line; blank lines and '#' comments ignored."""
    bots: set[str] = set()
    with open(path, "rt", encoding="utf-8") as fh:
        for line in fh:
            name = line.split("#", 1)[0].strip()
            if name:
                bots.add(name)
    return bots


def filter_bots(
    table: ActivityTable,
    bot_names: set[str],
    suffix_heuristic: bool = False,
) -> ActivityTable:
    """Drop all rows for users on the bot list (exact, case-sensitive).

    With suffix_heuristic, additionally drops any account whose name ends
    with "bot" case-insensitively. Off by default; opt in explicitly.
    """

    def is_bot(name: str) -> bool:
        return name in bot_names or (
            suffix_heuristic and name.lower().endswith("bot")
        )

    out = ActivityTable()
    for (uid, sid), n in table.counts.items():
        name = table.user_index.names[uid]
        if not is_bot(name):
            out.add(name, table.subreddit_index.names[sid], n)
    # Keep the full subreddit universe: a subreddit whose only commenters
    # were bots still exists (with zero activity) downstream.
    for sub in table.subreddit_index.names:
        out.subreddit_index.intern(sub)
    return out


@dataclass
class MembershipSets:
    """For each subreddit id, the set of user ids with count >= threshold."""

    members: dict[int, set[int]]
    subreddit_index: Indexer
    threshold: int

    def save(self, path: str | Path) -> None:
        # Subreddit order follows the members mapping itself, so a ranked
        # restriction round-trips in ranked order.
        order = list(self.members)
        parts = [
            struct.pack("<I", self.threshold),
            fileio.pack_names([self.subreddit_index.names[sid] for sid in order]),
        ]
        for sid in order:
            users = sorted(self.members[sid])
            parts.append(struct.pack("<Q", len(users)))
            parts.append(struct.pack(f"<{len(users)}Q", *users) if users else b"")
        fileio.write_container(path, _MEMBERS_MAGIC, b"".join(parts))

    @classmethod
    def load(cls, path: str | Path) -> "MembershipSets":
        payload = memoryview(fileio.read_container(path, _MEMBERS_MAGIC))
        (threshold,) = struct.unpack_from("<I", payload, 0)
        names, offset = fileio.unpack_names(payload, 4)
        members: dict[int, set[int]] = {}
        for sid in range(len(names)):
            (n_users,) = struct.unpack_from("<Q", payload, offset)
            offset += 8
            users = struct.unpack_from(f"<{n_users}Q", payload, offset)
            offset += 8 * n_users
            members[sid] = set(users)
        return cls(members, Indexer(names), threshold)


def select_active_memberships(table: ActivityTable, threshold: int = 10) -> MembershipSets:
    """Membership iff the user posted at least `threshold` comments there."""
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    members: dict[int, set[int]] = {
        sid: set() for sid in range(len(table.subreddit_index))
    }
    for (uid, sid), n in table.counts.items():
        if n >= threshold:
            members[sid].add(uid)
    return MembershipSets(members, table.subreddit_index, threshold)


@dataclass
class SubredditVocab:
    """Retained subreddits, ordered by active-user count (desc, then name)."""

    names: list[str]
    activity: list[int]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("vocabulary names must be unique")

    def __len__(self) -> int:
        return len(self.names)

    def save_tsv(self, path: str | Path) -> None:
        with open(path, "wt", encoding="utf-8") as fh:
            for name, act in zip(self.names, self.activity):
                fh.write(f"{name}\t{act}\n")

    @classmethod
    def load_tsv(cls, path: str | Path) -> "SubredditVocab":
        names, activity = [], []
        with open(path, "rt", encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                name, act = line.split("\t")
                names.append(name)
                activity.append(int(act))
        return cls(names, activity)


def select_top_subreddits(
    sets: MembershipSets, limit: int, report: "IngestReport | None" = None
) -> tuple[SubredditVocab, MembershipSets]:
    """Keep the `limit` subreddits with the most active users.

    Ties break lexicographically by name. Returns the vocabulary and the
    membership sets restricted to it. Asking for more subreddits than exist
    returns everything, with a warning logged and recorded in the report.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    ranked = sorted(
        sets.members,
        key=lambda sid: (-len(sets.members[sid]), sets.subreddit_index.names[sid]),
    )
    if limit > len(ranked):
        message = (
            f"top-subreddit limit {limit} exceeds available {len(ranked)}; keeping all"
        )
        log.warning(message)
        if report is not None:
            report.warnings.append(message)
    kept = ranked[:limit]
    names = [sets.subreddit_index.names[sid] for sid in kept]
    activity = [len(sets.members[sid]) for sid in kept]
    restricted = MembershipSets(
        {sid: set(sets.members[sid]) for sid in kept},
        sets.subreddit_index,
        sets.threshold,
    )
    return SubredditVocab(names, activity), restricted


@dataclass
class IngestReport:
    lines: int = 0
    accepted: int = 0
    parse_errors: int = 0
    skipped: dict[str, int] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def record_skip(self, marker: SkipMarker) -> None:
        if marker.reason == PARSE_ERROR:
            self.parse_errors += 1
        else:
            self.skipped[marker.reason] = self.skipped.get(marker.reason, 0) + 1

    def reconciles(self) -> bool:
        return self.lines == self.accepted + self.parse_errors + sum(
            self.skipped.values()
        )

    def as_dict(self) -> dict:
        return {
            "lines": self.lines,
            "accepted": self.accepted,
            "parse_errors": self.parse_errors,
            "skipped": dict(sorted(self.skipped.items())),
            "warnings": list(self.warnings),
        }


def ingest_file(path: str | Path, report: IngestReport | None = None) -> ActivityTable:
    """Accumulate one dump shard. The report (if given) tallies skip reasons."""
    report = report if report is not None else IngestReport()
    table = ActivityTable()
    with fileio.open_text_auto(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            report.lines += 1
            parsed = parse_comment_line(line)
            if isinstance(parsed, SkipMarker):
                report.record_skip(parsed)
            else:
                report.accepted += 1
                table.add(parsed.author, parsed.subreddit)
    return table


def ingest_paths(paths: list[str | Path]) -> tuple[ActivityTable, IngestReport]:
    """Accumulate each shard independently, then merge deterministically."""
    report = IngestReport()
    merged = ActivityTable()
    for path in sorted(str(p) for p in paths):
        log.info("ingesting %s", path)
        merged.merge(ingest_file(path, report))
    return merged, report
