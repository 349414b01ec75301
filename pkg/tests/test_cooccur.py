import random

import pytest

from commembed import fileio
from commembed.cooccur import (
    BuildReport,
    CooccurrenceMatrix,
    brute_force_cooccurrence,
    build_cooccurrence,
)
from commembed.ingest import SubredditVocab
from helpers import make_sets, random_membership_instance, vocab_of


def _entries_by_name(matrix: CooccurrenceMatrix) -> dict[tuple[str, str], int]:
    return {
        (matrix.vocab.names[i], matrix.vocab.names[j]): n
        for (i, j), n in matrix.entries.items()
    }


class TestBuild:
    def test_pairwise_intersections(self):
        sets = make_sets({"A": {"u1", "u2"}, "B": {"u1", "u2"}, "C": {"u3"}})
        matrix = build_cooccurrence(sets, vocab_of(sets, ["A", "B", "C"]))
        assert _entries_by_name(matrix) == {("A", "B"): 2}
        assert matrix.get(0, 1) == 2 and matrix.get(1, 0) == 2
        assert matrix.get(0, 2) == 0 and matrix.get(1, 2) == 0

    def test_single_subreddit_gives_empty_matrix(self):
        sets = make_sets({"A": {"u1", "u2"}})
        assert len(build_cooccurrence(sets, vocab_of(sets))) == 0

    def test_count_cap_attained(self):
        sets = make_sets({"A": {"u1"}, "B": {"u1"}})
        matrix = build_cooccurrence(sets, vocab_of(sets, ["A", "B"]))
        assert _entries_by_name(matrix) == {("A", "B"): 1}

    def test_diagonal_never_stored(self):
        sets = make_sets({"A": {"u1", "u2"}, "B": {"u1"}})
        matrix = build_cooccurrence(sets, vocab_of(sets))
        assert all(i < j for (i, j) in matrix.entries)

    def test_entries_bounded_by_smaller_membership(self):
        rng = random.Random(2)
        members = random_membership_instance(rng, max_subs=12, max_users=60)
        sets = make_sets(members)
        matrix = build_cooccurrence(sets, vocab_of(sets))
        sizes = {name: len(users) for name, users in members.items()}
        for (a, b), n in _entries_by_name(matrix).items():
            assert 0 < n <= min(sizes[a], sizes[b])

    def test_fuzzed_oracle_equivalence(self):
        rng = random.Random(13)
        for trial in range(25):
            sets = make_sets(random_membership_instance(rng, max_subs=20, max_users=80))
            vocab = vocab_of(sets)
            fast = build_cooccurrence(sets, vocab)
            oracle = brute_force_cooccurrence(sets, vocab)
            assert fast.entries == oracle.entries, f"trial {trial}"

    def test_vocab_permutation_consistency(self):
        rng = random.Random(4)
        members = random_membership_instance(rng, max_subs=10, max_users=50)
        sets = make_sets(members)
        names = sorted(members)
        base = _entries_by_name(build_cooccurrence(sets, vocab_of(sets, names)))
        shuffled = names[:]
        rng.shuffle(shuffled)
        permuted = _entries_by_name(build_cooccurrence(sets, vocab_of(sets, shuffled)))
        normalize = lambda d: {tuple(sorted(k)): v for k, v in d.items()}
        assert normalize(base) == normalize(permuted)

    def test_single_membership_user_changes_nothing(self):
        members = {"A": {"u1", "u2"}, "B": {"u1"}}
        sets = make_sets(members)
        base = _entries_by_name(build_cooccurrence(sets, vocab_of(sets, ["A", "B"])))
        members_plus = {"A": {"u1", "u2", "loner"}, "B": {"u1"}}
        sets_plus = make_sets(members_plus)
        plus = _entries_by_name(build_cooccurrence(sets_plus, vocab_of(sets_plus, ["A", "B"])))
        assert base == plus

    def test_sharded_build_equals_single_pass(self):
        rng = random.Random(21)
        sets = make_sets(random_membership_instance(rng, max_subs=15, max_users=100))
        vocab = vocab_of(sets)
        single = build_cooccurrence(sets, vocab, shards=1)
        for shards in (2, 3, 7):
            assert build_cooccurrence(sets, vocab, shards=shards).entries == single.entries

    def test_membership_cap_skips_and_reports(self):
        sets = make_sets({"A": {"mega", "u1"}, "B": {"mega", "u1"}, "C": {"mega"}})
        report = BuildReport()
        matrix = build_cooccurrence(sets, vocab_of(sets, ["A", "B", "C"]),
                                    max_memberships=2, report=report)
        # "mega" is active in 3 subreddits and gets skipped entirely.
        assert report.capped_users == 1
        assert _entries_by_name(matrix) == {("A", "B"): 1}

    def test_zero_rows_flagged(self):
        sets = make_sets({"A": {"u1", "u2"}, "B": {"u1"}, "Empty": set()})
        report = BuildReport()
        build_cooccurrence(sets, vocab_of(sets, ["A", "B", "Empty"]), report=report)
        assert report.zero_rows == ["Empty"]


class TestMatrixFile:
    def _random_matrix(self, seed: int) -> CooccurrenceMatrix:
        rng = random.Random(seed)
        sets = make_sets(random_membership_instance(rng, max_subs=12, max_users=60))
        return build_cooccurrence(sets, vocab_of(sets))

    def test_round_trip_identity(self, tmp_path):
        matrix = self._random_matrix(31)
        path = tmp_path / "matrix.bin"
        matrix.save(path)
        loaded = CooccurrenceMatrix.load(path)
        assert loaded.entries == matrix.entries
        assert loaded.vocab.names == matrix.vocab.names
        assert loaded.vocab.activity == matrix.vocab.activity

    def test_empty_matrix_round_trip(self, tmp_path):
        matrix = CooccurrenceMatrix(SubredditVocab([], []), {})
        path = tmp_path / "empty.bin"
        matrix.save(path)
        loaded = CooccurrenceMatrix.load(path)
        assert loaded.entries == {} and loaded.vocab.names == []

    def test_truncated_file_is_fatal(self, tmp_path):
        matrix = self._random_matrix(32)
        path = tmp_path / "matrix.bin"
        matrix.save(path)
        path.write_bytes(path.read_bytes()[:-6])
        with pytest.raises(fileio.FormatError):
            CooccurrenceMatrix.load(path)

    def test_bit_flip_is_fatal(self, tmp_path):
        matrix = self._random_matrix(33)
        path = tmp_path / "matrix.bin"
        matrix.save(path)
        raw = bytearray(path.read_bytes())
        raw[len(raw) // 2] ^= 0x01
        path.write_bytes(bytes(raw))
        with pytest.raises(fileio.FormatError, match="checksum|magic|version"):
            CooccurrenceMatrix.load(path)

    def test_tsv_export(self, tmp_path):
        sets = make_sets({"A": {"u1", "u2"}, "B": {"u1", "u2"}, "C": {"u1"}})
        matrix = build_cooccurrence(sets, vocab_of(sets, ["A", "B", "C"]))
        path = tmp_path / "matrix.tsv"
        matrix.export_tsv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "A\tB\t2"
        assert all(len(line.split("\t")) == 3 for line in lines)
