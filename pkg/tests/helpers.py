"""Shared test construction helpers."""

from __future__ import annotations

import random

from commembed.ingest import ActivityTable, Indexer, MembershipSets, SubredditVocab


def make_table(counts: dict[tuple[str, str], int]) -> ActivityTable:
    table = ActivityTable()
    for (user, sub), n in counts.items():
        table.add(user, sub, n)
    return table


def make_sets(members: dict[str, set[str]], threshold: int = 10) -> MembershipSets:
    """MembershipSets from name-keyed sets; users are interned in sorted order."""
    sub_index = Indexer()
    user_index = Indexer()
    for name in members:
        sub_index.intern(name)
    out: dict[int, set[int]] = {}
    for name, users in members.items():
        out[sub_index.ids[name]] = {user_index.intern(u) for u in sorted(users)}
    return MembershipSets(out, sub_index, threshold)


def vocab_of(sets: MembershipSets, order: list[str] | None = None) -> SubredditVocab:
    names = order or sorted(
        sets.members,
        key=lambda sid: (-len(sets.members[sid]), sets.subreddit_index.names[sid]),
    )
    if order is None:
        names = [sets.subreddit_index.names[sid] for sid in names]
    sizes = {
        sets.subreddit_index.names[sid]: len(users)
        for sid, users in sets.members.items()
    }
    return SubredditVocab(list(names), [sizes.get(n, 0) for n in names])


def table_as_name_counts(table: ActivityTable) -> dict[tuple[str, str], int]:
    return {
        (table.user_index.names[u], table.subreddit_index.names[s]): n
        for (u, s), n in table.counts.items()
    }


def sets_as_names(sets: MembershipSets) -> dict[str, set[str]]:
    # User names are not stored in MembershipSets; callers that need names
    # should key their fixtures by stable user strings and compare ids.
    return {
        sets.subreddit_index.names[sid]: set(users)
        for sid, users in sets.members.items()
    }


def random_membership_instance(
    rng: random.Random, max_subs: int = 50, max_users: int = 500
) -> dict[str, set[str]]:
    n_subs = rng.randint(1, max_subs)
    n_users = rng.randint(1, max_users)
    users = [f"u{i}" for i in range(n_users)]
    members: dict[str, set[str]] = {}
    for s in range(n_subs):
        density = rng.random() * 0.2
        members[f"s{s:03d}"] = {u for u in users if rng.random() < density}
    return members
