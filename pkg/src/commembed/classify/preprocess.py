"""Comment text preprocessing: lowercase, mask, tokenize, de-stop, stem."""

from __future__ import annotations

import re

from .porter import stem
from .stopwords import STOP_WORDS

URL_TOKEN = "<url>"
USER_TOKEN = "<user>"

_URL_RE = re.compile(r"(?:https?://|www\.)\S+")
_USER_RE = re.compile(r"(?:(?<![a-z0-9])/?u/[a-z0-9_-]+|@\w+)")
_TOKEN_RE = re.compile(r"<url>|<user>|[a-z0-9]+")


def mask(text: str) -> str:
    """Lowercase and replace URLs / user mentions with placeholder tokens."""
    text = text.lower()
    text = _URL_RE.sub(URL_TOKEN, text)
    return _USER_RE.sub(USER_TOKEN, text)


def tokenize(masked: str) -> list[str]:
    """Alphanumeric runs plus the placeholder tokens, in order."""
    return _TOKEN_RE.findall(masked)


def preprocess(body: str) -> list[str]:
    """Full chain: mask -> tokenize -> drop stop words -> stem.

    Placeholder tokens are kept verbatim; everything else is stemmed.
    An empty result is fine (the document simply has no text features).
    """
    tokens = tokenize(mask(body))
    out = []
    for tok in tokens:
        if tok in STOP_WORDS:
            continue
        out.append(tok if tok.startswith("<") else stem(tok))
    return out
