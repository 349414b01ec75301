"""Feature construction: TF-IDF n-gram block plus the community-context block.

The n-gram block is a standard TF-IDF vectorizer over preprocessed tokens
(unigrams through trigrams, smoothed IDF, documents L2-normalized). The
context block depends on the active channel:

    none          -> empty block (features identical to the text baseline)
    name          -> one indicator for the source subreddit
    neighborhood  -> the name indicator plus the top-k most similar
                     subreddits, weighted by cosine similarity clipped
                     to [0, 1]

Both blocks are fit on training folds only; unseen features transform to
zero columns.
"""

from __future__ import annotations

import scipy.sparse as sp
from sklearn.feature_extraction.text import TfidfVectorizer

from ..vecspace import EmbeddingSpace
from .corpus import LabeledComment

CHANNELS = ("none", "name", "neighborhood")


def ngrams(tokens: list[str]) -> list[str]:
    """All 1-, 2-, and 3-grams as space-joined strings."""
    grams = list(tokens)
    for n in (2, 3):
        grams.extend(
            " ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1)
        )
    return grams


class TextVectorizer:
    """TF-IDF over token documents; idf(t) = ln((1+N)/(1+df)) + 1."""

    def __init__(self):
        self._tfidf = TfidfVectorizer(
            analyzer=ngrams, norm="l2", smooth_idf=True, sublinear_tf=False
        )

    def fit(self, token_docs: list[list[str]]) -> "TextVectorizer":
        self._tfidf.fit(token_docs)
        return self

    def transform(self, token_docs: list[list[str]]) -> sp.csr_matrix:
        return self._tfidf.transform(token_docs)

    @property
    def vocabulary(self) -> dict[str, int]:
        return self._tfidf.vocabulary_

    def idf(self, term: str) -> float:
        return float(self._tfidf.idf_[self._tfidf.vocabulary_[term]])


def build_context_features(
    subreddit: str,
    channel: str,
    space: EmbeddingSpace | None = None,
    neighbor_k: int = 5,
) -> tuple[dict[str, float], bool]:
    """Context block for one comment; the flag marks a neighborhood fallback.

    A subreddit missing from the embedding vocabulary under the
    neighborhood channel falls back to its name indicator alone.
    """
    if channel not in CHANNELS:
        raise ValueError(f"unknown channel {channel!r}")
    if channel == "none":
        return {}, False
    features = {f"sub={subreddit}": 1.0}
    if channel == "name":
        return features, False
    if space is None:
        raise ValueError("neighborhood channel requires an embedding space")
    if subreddit not in space:
        return features, True
    for neighbor, score in space.nearest_neighbors(subreddit, neighbor_k):
        weight = min(max(score, 0.0), 1.0)
        if weight > 0.0:
            features[f"sub={neighbor}"] = weight
    return features, False


class ContextVectorizer:
    """Sparse context block with a feature space fit on training folds only."""

    def __init__(self, channel: str, space: EmbeddingSpace | None = None, neighbor_k: int = 5):
        if channel not in CHANNELS:
            raise ValueError(f"unknown channel {channel!r}")
        self.channel = channel
        self.space = space
        self.neighbor_k = neighbor_k
        self.vocabulary: dict[str, int] = {}

    def _features(self, comment: LabeledComment) -> dict[str, float]:
        feats, _ = build_context_features(
            comment.subreddit, self.channel, self.space, self.neighbor_k
        )
        return feats

    def fit(self, comments: list[LabeledComment]) -> "ContextVectorizer":
        names = set()
        for c in comments:
            names.update(self._features(c))
        self.vocabulary = {name: i for i, name in enumerate(sorted(names))}
        return self

    def transform(self, comments: list[LabeledComment]) -> sp.csr_matrix:
        rows, cols, data = [], [], []
        for r, c in enumerate(comments):
            for name, value in self._features(c).items():
                col = self.vocabulary.get(name)
                if col is not None:
                    rows.append(r)
                    cols.append(col)
                    data.append(value)
        return sp.csr_matrix(
            (data, (rows, cols)), shape=(len(comments), len(self.vocabulary))
        )


def combine_blocks(text_block: sp.csr_matrix, context_block: sp.csr_matrix | None) -> sp.csr_matrix:
    if context_block is None or context_block.shape[1] == 0:
        return text_block
    return sp.hstack([text_block, context_block], format="csr")
