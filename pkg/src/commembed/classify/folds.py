"""Stratified cross-validation folds over the labeled corpus.

Comments are grouped by the joint key (binary label, slur, subreddit
bucket), shuffled within groups, and dealt to folds with one continuing
round-robin counter. Because the dealt sequence is contiguous per binary
label, every fold receives within one comment of n_label / k for each
label, and within one comment of n / k overall; each joint group likewise
splits as evenly as integer arithmetic allows.

Subreddits with fewer than k comments collapse into a single rare bucket,
since they cannot spread across all folds anyway.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass

from .corpus import DEG, LabeledComment

RARE_BUCKET = "<rare>"


@dataclass
class FoldAssignment:
    mapping: dict[str, int]
    k: int

    def fold_ids(self, fold: int) -> list[str]:
        return [cid for cid, f in self.mapping.items() if f == fold]

    def sizes(self) -> list[int]:
        counts = Counter(self.mapping.values())
        return [counts.get(f, 0) for f in range(self.k)]


def stratified_folds(
    corpus: list[LabeledComment], k: int = 5, seed: int = 0
) -> FoldAssignment:
    if k < 2:
        raise ValueError("k must be >= 2")
    sub_counts = Counter(c.subreddit for c in corpus)

    def bucket(c: LabeledComment) -> str:
        return c.subreddit if sub_counts[c.subreddit] >= k else RARE_BUCKET

    groups: dict[tuple[str, str, str], list[str]] = {}
    for c in corpus:
        groups.setdefault((c.binary_gold, c.slur, bucket(c)), []).append(c.id)

    rng = random.Random(seed)
    offset = rng.randrange(k)
    mapping: dict[str, int] = {}
    counter = 0
    for key in sorted(groups):
        ids = groups[key]
        rng.shuffle(ids)
        for cid in ids:
            mapping[cid] = (counter + offset) % k
            counter += 1
    return FoldAssignment(mapping, k)


def label_balance(
    corpus: list[LabeledComment], assignment: FoldAssignment
) -> dict[str, float]:
    """Per-fold DEG share next to the corpus share; residual skew is reported."""
    total_deg = sum(1 for c in corpus if c.binary_gold == DEG)
    overall = total_deg / len(corpus) if corpus else 0.0
    fold_deg = Counter()
    fold_n = Counter()
    for c in corpus:
        f = assignment.mapping[c.id]
        fold_n[f] += 1
        fold_deg[f] += c.binary_gold == DEG
    shares = {
        f"fold_{f}": (fold_deg[f] / fold_n[f] if fold_n[f] else 0.0)
        for f in range(assignment.k)
    }
    shares["corpus"] = overall
    shares["max_skew"] = max(
        (abs(v - overall) for key, v in shares.items() if key.startswith("fold_")),
        default=0.0,
    )
    return shares
