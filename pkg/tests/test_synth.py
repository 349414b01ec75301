import itertools

import pytest

from commembed import ingest, synth
from commembed.cooccur import brute_force_cooccurrence
from commembed.synth import (
    BlockSpec,
    ContextCorpusSpec,
    LatticeSpec,
    generate_block_dump,
    generate_context_corpus,
    generate_lattice_dump,
)


class TestDeterminism:
    def test_block_dump_bytes_identical(self, tmp_path):
        spec = BlockSpec(blocks=2, subreddits_per_block=4, users=150)
        a = generate_block_dump(spec, 5, tmp_path / "a")
        b = generate_block_dump(spec, 5, tmp_path / "b")
        assert a["dump"].read_bytes() == b["dump"].read_bytes()
        assert a["bots"].read_bytes() == b["bots"].read_bytes()

    def test_block_dump_seed_sensitivity(self, tmp_path):
        spec = BlockSpec(blocks=2, subreddits_per_block=4, users=150)
        a = generate_block_dump(spec, 5, tmp_path / "a")
        b = generate_block_dump(spec, 6, tmp_path / "b")
        assert a["dump"].read_bytes() != b["dump"].read_bytes()

    def test_lattice_outputs_identical(self, tmp_path):
        spec = LatticeSpec(cities=3, sports=2, team_users=20, hub_users=5)
        a = generate_lattice_dump(spec, 9, tmp_path / "a")
        b = generate_lattice_dump(spec, 9, tmp_path / "b")
        for key in ("dump", "composition_suite", "analogy_suite"):
            assert a[key].read_bytes() == b[key].read_bytes()

    def test_context_corpus_identical(self):
        spec = ContextCorpusSpec(comments=200)
        assert generate_context_corpus(spec, 3) == generate_context_corpus(spec, 3)
        assert generate_context_corpus(spec, 3) != generate_context_corpus(spec, 4)


class TestBlockDump:
    def test_diagonal_blocks_are_denser(self, tmp_path):
        spec = BlockSpec(blocks=3, subreddits_per_block=6, users=900)
        art = generate_block_dump(spec, 11, tmp_path)
        table, report = ingest.ingest_paths([art["dump"]])
        assert report.reconciles()
        table = ingest.filter_bots(table, ingest.load_bot_list(art["bots"]))
        sets = ingest.select_active_memberships(table, 10)
        vocab, restricted = ingest.select_top_subreddits(sets, 18)
        matrix = brute_force_cooccurrence(restricted, vocab)
        block_of = spec.block_of
        intra, inter = [], []
        for i, j in itertools.combinations(range(len(vocab)), 2):
            value = matrix.get(i, j)
            same = block_of(vocab.names[i]) == block_of(vocab.names[j])
            (intra if same else inter).append(value)
        assert sum(intra) / len(intra) > 5 * (sum(inter) / len(inter))

    def test_noise_lines_are_handled_by_ingest(self, tmp_path):
        spec = BlockSpec(blocks=2, subreddits_per_block=3, users=60, with_noise=True)
        art = generate_block_dump(spec, 2, tmp_path)
        report = ingest.IngestReport()
        table = ingest.ingest_file(art["dump"], report)
        assert report.parse_errors == 1          # one non-JSON line
        assert report.skipped["deleted-author"] == 20
        assert report.skipped["missing-field"] == 1
        assert synth.BOT_NAME in table.user_index

    def test_bot_rows_removed_by_filter(self, tmp_path):
        spec = BlockSpec(blocks=2, subreddits_per_block=3, users=60)
        art = generate_block_dump(spec, 2, tmp_path)
        table, _ = ingest.ingest_paths([art["dump"]])
        filtered = ingest.filter_bots(table, ingest.load_bot_list(art["bots"]))
        assert synth.BOT_NAME not in filtered.user_index


class TestLattice:
    def test_suite_counts_match_grid(self, tmp_path):
        spec = LatticeSpec(cities=4, sports=3, team_users=10, hub_users=2)
        art = generate_lattice_dump(spec, 1, tmp_path)
        from commembed.vecspace import load_analogy_suite, load_composition_suite

        comp = load_composition_suite(art["composition_suite"])
        ana = load_analogy_suite(art["analogy_suite"])
        assert len(comp) == 12
        city_family = [t for t in ana if t.a.startswith("city")]
        team_family = [t for t in ana if t.a.startswith("team")]
        assert len(city_family) == 12
        assert len(team_family) == 12

    def test_composition_targets_are_expected_teams(self, tmp_path):
        spec = LatticeSpec(cities=2, sports=2, team_users=10, hub_users=2)
        art = generate_lattice_dump(spec, 1, tmp_path)
        from commembed.vecspace import load_composition_suite

        for t in load_composition_suite(art["composition_suite"]):
            city = t.left.removeprefix("city")
            sport = t.right.removeprefix("sport")
            assert t.expected == f"team_c{city}_s{sport}"


class TestContextCorpus:
    def test_shape_and_labels(self):
        corpus = generate_context_corpus(ContextCorpusSpec(comments=500), 1)
        assert len(corpus) == 500
        assert {c.gold for c in corpus} <= {"DEG", "NDNA", "APR", "HOM"}
        assert len({c.id for c in corpus}) == 500

    def test_full_correlation_forces_pure_communities(self):
        spec = ContextCorpusSpec(comments=1500, correlation=1.0)
        corpus = generate_context_corpus(spec, 2)
        ambiguous = [c for c in corpus if c.slur == spec.ambiguous_token]
        by_community: dict[str, set[str]] = {}
        for c in ambiguous:
            by_community.setdefault(c.subreddit, set()).add(c.gold)
        assert all(len(golds) == 1 for golds in by_community.values())

    def test_ambiguous_bodies_carry_no_label_token(self):
        spec = ContextCorpusSpec(comments=800, correlation=0.9)
        corpus = generate_context_corpus(spec, 3)
        for c in corpus:
            if c.slur == spec.ambiguous_token:
                words = set(c.body.split())
                assert spec.ambiguous_token in words
                assert not words & {"vexil", "mildun"}

    def test_clear_comments_labeled_by_token(self):
        corpus = generate_context_corpus(ContextCorpusSpec(comments=800), 4)
        for c in corpus:
            if c.slur == "vexil":
                assert c.gold == "DEG"
            elif c.slur == "mildun":
                assert c.gold == "NDNA"

    def test_over_blocks_maps_communities(self):
        block = BlockSpec(blocks=3, subreddits_per_block=4)
        spec = ContextCorpusSpec.over_blocks(block, comments=100)
        assert spec.communities["antagonistic"] == [
            "sub_b00_00", "sub_b00_01", "sub_b00_02", "sub_b00_03"
        ]
        assert len(spec.communities["homonym"]) == 2
        assert len(spec.communities["discussion"]) == 2

    def test_over_blocks_requires_three_blocks(self):
        with pytest.raises(ValueError):
            ContextCorpusSpec.over_blocks(BlockSpec(blocks=2))

    def test_correlation_validated(self):
        with pytest.raises(ValueError):
            ContextCorpusSpec(correlation=1.5)

    def test_community_balance(self):
        spec = ContextCorpusSpec(comments=4000, antagonistic_weight=0.6)
        corpus = generate_context_corpus(spec, 5)
        ambiguous = [c for c in corpus if c.slur == spec.ambiguous_token]
        antag = set(spec.communities["antagonistic"])
        share = sum(c.subreddit in antag for c in ambiguous) / len(ambiguous)
        assert 0.55 < share < 0.65
