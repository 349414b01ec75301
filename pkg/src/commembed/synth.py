"""Synthetic data generators for desk-scale validation.

Three constructions, each a pure function of (spec, seed):

* block dump: communities of subreddits whose users stay mostly within
  their home block, so the co-occurrence matrix has dense diagonal blocks
  and trained embeddings should cluster by block;
* lattice dump: city and sport hub subreddits plus one team subreddit per
  (city, sport) cell whose users are also active in both hubs, giving the
  space compositional and analogical structure, with matching evaluation
  suites;
* context corpus: a labeled corpus where one ambiguous token's gold label
  is determined by community polarity (at a configurable correlation),
  while the rest of the text carries no community signal, so community
  context is exactly what a classifier needs to resolve it.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .classify.corpus import LabeledComment, save_corpus

BOT_NAME = "AutoModerator"

_FILLERS = (
    "table window garden stone river cloud branch paper bottle corner candle "
    "market lantern pocket meadow harbor copper saddle timber anchor barrel "
    "circle dinner evening filter guitar helmet island jacket kettle ladder "
    "mirror needle orange pillow quarry ribbon shovel ticket valley wagon"
).split()

_AMBIGUOUS_TOKEN = "zork"
_CLEAR_DEG_TOKEN = "vexil"
_CLEAR_NDG_TOKEN = "mildun"

COMMUNITY_TYPES = ("antagonistic", "supportive", "homonym", "discussion")


@dataclass(frozen=True)
class BlockSpec:
    blocks: int = 3
    subreddits_per_block: int = 20
    users: int = 5000
    p_in: float = 0.3
    p_out: float = 0.01
    min_comments: int = 10
    extra_comments: int = 5
    with_noise: bool = True

    def subreddit_name(self, block: int, idx: int) -> str:
        return f"sub_b{block:02d}_{idx:02d}"

    def block_of(self, name: str) -> int:
        return int(name.split("_")[1][1:])

    def all_subreddits(self) -> list[str]:
        return [
            self.subreddit_name(b, s)
            for b in range(self.blocks)
            for s in range(self.subreddits_per_block)
        ]


@dataclass(frozen=True)
class LatticeSpec:
    cities: int = 4
    sports: int = 3
    team_users: int = 60
    hub_users: int = 25
    # Probability that a team user is also active in each of their hubs.
    # Below 1.0 this keeps team-hub ties stronger than the city-sport tie
    # they induce together (which scales with the square).
    hub_rate: float = 0.7
    min_comments: int = 10
    extra_comments: int = 5

    def city_name(self, c: int) -> str:
        return f"city{c:02d}"

    def sport_name(self, s: int) -> str:
        return f"sport{s:02d}"

    def team_name(self, c: int, s: int) -> str:
        return f"team_c{c:02d}_s{s:02d}"


@dataclass(frozen=True)
class ContextCorpusSpec:
    comments: int = 5000
    correlation: float = 0.9
    ambiguous_rate: float = 0.5
    antagonistic_weight: float = 0.6
    fillers_per_comment: int = 6
    communities: dict[str, list[str]] = field(default_factory=dict)
    ambiguous_token: str = _AMBIGUOUS_TOKEN

    def __post_init__(self):
        if not 0.0 <= self.correlation <= 1.0:
            raise ValueError("correlation must be in [0, 1]")
        if not self.communities:
            # Standalone default: eight communities per polar type, four others.
            object.__setattr__(
                self,
                "communities",
                {
                    "antagonistic": [f"antag{i:02d}" for i in range(8)],
                    "supportive": [f"support{i:02d}" for i in range(8)],
                    "homonym": [f"hobby{i:02d}" for i in range(4)],
                    "discussion": [f"forum{i:02d}" for i in range(4)],
                },
            )
        unknown = set(self.communities) - set(COMMUNITY_TYPES)
        if unknown:
            raise ValueError(f"unknown community types {sorted(unknown)}")

    @classmethod
    def over_blocks(cls, block_spec: BlockSpec, **kwargs) -> "ContextCorpusSpec":
        """Assign block-dump subreddits to polarity types, one block per type
        (the last block is split between homonym and discussion)."""
        if block_spec.blocks < 3:
            raise ValueError("need at least 3 blocks to cover the community types")
        per_block = [
            [
                block_spec.subreddit_name(b, s)
                for s in range(block_spec.subreddits_per_block)
            ]
            for b in range(block_spec.blocks)
        ]
        third = per_block[2]
        communities = {
            "antagonistic": per_block[0],
            "supportive": per_block[1],
            "homonym": third[: len(third) // 2],
            "discussion": third[len(third) // 2 :],
        }
        return cls(communities=communities, **kwargs)


def _comment_line(author: str, subreddit: str, created: int, cid: str, body: str) -> str:
    return json.dumps(
        {
            "author": author,
            "subreddit": subreddit,
            "created_utc": created,
            "id": cid,
            "body": body,
        },
        sort_keys=True,
    )


class _DumpWriter:
    def __init__(self, path: Path, rng: random.Random):
        self.fh = open(path, "wt", encoding="utf-8")
        self.rng = rng
        self.counter = 0

    def emit(self, author: str, subreddit: str, n_comments: int) -> None:
        for _ in range(n_comments):
            self.counter += 1
            body = " ".join(self.rng.choices(_FILLERS, k=5))
            self.fh.write(
                _comment_line(
                    author, subreddit, 1_500_000_000 + self.counter,
                    f"c{self.counter:08d}", body,
                )
                + "\n"
            )

    def emit_raw(self, line: str) -> None:
        self.fh.write(line + "\n")

    def close(self) -> None:
        self.fh.close()


def _membership_comments(rng: random.Random, spec) -> int:
    return spec.min_comments + rng.randrange(spec.extra_comments + 1)


def generate_block_dump(spec: BlockSpec, seed: int, out_dir: str | Path) -> dict[str, Path]:
    """Write the block-model comment dump and a bot list; returns artifact paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(f"{seed}/block")
    dump_path = out_dir / "dump.ndjson"
    writer = _DumpWriter(dump_path, rng)
    subs = spec.all_subreddits()
    for u in range(spec.users):
        author = f"user{u:06d}"
        home = u % spec.blocks
        for name in subs:
            p = spec.p_in if spec.block_of(name) == home else spec.p_out
            if rng.random() < p:
                writer.emit(author, name, _membership_comments(rng, spec))
    if spec.with_noise:
        # A bot active everywhere, deleted-author lines, and malformed lines:
        # the ingest filters should make all of this invisible downstream.
        for name in subs:
            writer.emit(BOT_NAME, name, spec.min_comments + 2)
        for i in range(20):
            writer.emit_raw(
                _comment_line("[deleted]", rng.choice(subs), 1_400_000_000 + i, f"del{i:04d}", "gone")
            )
        writer.emit_raw("{ this is not json")
        writer.emit_raw('{"author": "user000000"}')
    writer.close()
    bots_path = out_dir / "bots.txt"
    bots_path.write_text(f"# synthetic bot list\n{BOT_NAME}\n", encoding="utf-8")
    return {"dump": dump_path, "bots": bots_path}


def generate_lattice_dump(
    spec: LatticeSpec, seed: int, out_dir: str | Path
) -> dict[str, Path]:
    """Write the lattice dump plus composition/analogy suites over it."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(f"{seed}/lattice")
    dump_path = out_dir / "dump.ndjson"
    writer = _DumpWriter(dump_path, rng)
    user_no = 0
    for c in range(spec.cities):
        for s in range(spec.sports):
            n_users = spec.team_users + rng.randrange(max(1, spec.team_users // 10))
            for _ in range(n_users):
                author = f"fan{user_no:06d}"
                user_no += 1
                writer.emit(author, spec.team_name(c, s), _membership_comments(rng, spec))
                for hub in (spec.city_name(c), spec.sport_name(s)):
                    if rng.random() < spec.hub_rate:
                        writer.emit(author, hub, _membership_comments(rng, spec))
    # Hub-only locals and spectators thicken the hub rows without linking cells.
    for c in range(spec.cities):
        for _ in range(spec.hub_users):
            writer.emit(f"local{user_no:06d}", spec.city_name(c), _membership_comments(rng, spec))
            user_no += 1
    for s in range(spec.sports):
        for _ in range(spec.hub_users):
            writer.emit(f"viewer{user_no:06d}", spec.sport_name(s), _membership_comments(rng, spec))
            user_no += 1
    writer.close()

    comp_path = out_dir / "composition.tsv"
    with open(comp_path, "wt", encoding="utf-8") as fh:
        fh.write("# city + sport = team\n")
        for c in range(spec.cities):
            for s in range(spec.sports):
                fh.write(f"{spec.city_name(c)}\t{spec.sport_name(s)}\t{spec.team_name(c, s)}\n")

    ana_path = out_dir / "analogy.tsv"
    with open(ana_path, "wt", encoding="utf-8") as fh:
        fh.write("# city : team :: city' : team'  and  team : sport :: team' : sport'\n")
        for c in range(spec.cities):
            for s in range(spec.sports):
                c2 = (c + 1) % spec.cities
                fh.write(
                    f"{spec.city_name(c)}\t{spec.team_name(c, s)}"
                    f"\t{spec.city_name(c2)}\t{spec.team_name(c2, s)}\n"
                )
        for c in range(spec.cities):
            for s in range(spec.sports):
                s2 = (s + 1) % spec.sports
                fh.write(
                    f"{spec.team_name(c, s)}\t{spec.sport_name(s)}"
                    f"\t{spec.team_name(c, s2)}\t{spec.sport_name(s2)}\n"
                )

    bots_path = out_dir / "bots.txt"
    bots_path.write_text("# no bots in the lattice dump\n", encoding="utf-8")
    return {
        "dump": dump_path,
        "bots": bots_path,
        "composition_suite": comp_path,
        "analogy_suite": ana_path,
    }


def generate_context_corpus(spec: ContextCorpusSpec, seed: int) -> list[LabeledComment]:
    """Labeled comments where community polarity disambiguates one token.

    Ambiguous comments carry the token plus neutral filler; their gold label
    follows the community type with probability `correlation` (derogatory in
    antagonistic communities, appropriative in supportive ones, homonym in
    hobby ones, quoted/discussed in discussion ones). Clear comments carry
    an unambiguous token that determines the label irrespective of
    community.
    """
    rng = random.Random(f"{seed}/context")
    rho = spec.correlation
    non_antag = [t for t in ("supportive", "homonym", "discussion") if spec.communities.get(t)]
    comments: list[LabeledComment] = []
    for n in range(spec.comments):
        fillers = rng.choices(_FILLERS, k=spec.fillers_per_comment)
        if rng.random() < spec.ambiguous_rate:
            if rng.random() < spec.antagonistic_weight or not non_antag:
                ctype = "antagonistic"
            else:
                ctype = rng.choice(non_antag)
            community = rng.choice(spec.communities[ctype])
            aligned = rng.random() < rho
            if ctype == "antagonistic":
                gold = "DEG" if aligned else "NDNA"
            elif ctype == "supportive":
                gold = "APR" if aligned else "DEG"
            elif ctype == "homonym":
                gold = "HOM" if aligned else "DEG"
            else:
                gold = "NDNA" if aligned else "DEG"
            token = spec.ambiguous_token
        else:
            all_communities = [c for group in spec.communities.values() for c in group]
            community = rng.choice(all_communities)
            if rng.random() < 0.5:
                gold, token = "DEG", _CLEAR_DEG_TOKEN
            else:
                gold, token = "NDNA", _CLEAR_NDG_TOKEN
        position = rng.randrange(len(fillers) + 1)
        words = fillers[:position] + [token] + fillers[position:]
        comments.append(
            LabeledComment(
                id=f"cc{n:06d}",
                body=" ".join(words),
                subreddit=community,
                gold=gold,
                slur=token,
                author=f"annotuser{n % 97:03d}",
                created_utc=1_500_000_000 + n,
            )
        )
    return comments


def write_context_corpus(
    spec: ContextCorpusSpec, seed: int, out_dir: str | Path
) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "corpus.csv"
    save_corpus(generate_context_corpus(spec, seed), path)
    return {"corpus": path}
