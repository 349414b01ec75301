"""GloVe-style factorization of the co-occurrence matrix into embeddings.

Each stored entry (i, j, x) contributes f(x) * (w_i . wc_j + b_i + bc_j - ln x)^2
to the loss, where f is the saturating weighting function. Training is
AdaGrad over the entries in a freshly shuffled order each epoch.

Deterministic mode updates entries sequentially and is bit-reproducible
under a fixed seed. Parallel mode shards each epoch's entries across
threads that update shared parameters lock-free, so results vary
run-to-run while the loss trajectory stays equivalent.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fileio

_EMBED_MAGIC = b"CMEB"


class TrainingDivergedError(Exception):
    """Loss became non-finite; names the offending matrix entry."""


@dataclass(frozen=True)
class EmbedConfig:
    dim: int = 150
    epochs: int = 100
    learning_rate: float = 0.05
    x_max: float = 100.0
    alpha: float = 0.75
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.x_max <= 0:
            raise ValueError("x_max must be positive")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must be in (0, 1]")


def weight(x: float, config: EmbedConfig) -> float:
    """Saturating entry weight: (x / x_max) ** alpha, capped at 1."""
    if x <= 0:
        raise ValueError("weight requires x > 0")
    if x < config.x_max:
        return (x / config.x_max) ** config.alpha
    return 1.0


def _seed_streams(seed: int) -> tuple[np.random.SeedSequence, np.random.SeedSequence]:
    init_ss, shuffle_ss = np.random.SeedSequence(seed).spawn(2)
    return init_ss, shuffle_ss


@dataclass
class EmbeddingState:
    """Main/context vectors and biases plus their AdaGrad accumulators."""

    w: np.ndarray
    wc: np.ndarray
    b: np.ndarray
    bc: np.ndarray
    gw: np.ndarray
    gwc: np.ndarray
    gb: np.ndarray
    gbc: np.ndarray

    def copy(self) -> "EmbeddingState":
        return EmbeddingState(*(a.copy() for a in (
            self.w, self.wc, self.b, self.bc,
            self.gw, self.gwc, self.gb, self.gbc,
        )))

    def swapped(self) -> "EmbeddingState":
        """Exchange main and context parameter roles (used by symmetry tests)."""
        return EmbeddingState(
            self.wc.copy(), self.w.copy(), self.bc.copy(), self.b.copy(),
            self.gwc.copy(), self.gw.copy(), self.gbc.copy(), self.gb.copy(),
        )


def init_state(n_vocab: int, config: EmbedConfig) -> EmbeddingState:
    """Uniform init in [-0.5/dim, 0.5/dim] for all parameters, accumulators at 1."""
    rng = np.random.default_rng(_seed_streams(config.seed)[0])
    half = 0.5 / config.dim
    shape = (n_vocab, config.dim)
    return EmbeddingState(
        w=rng.uniform(-half, half, shape),
        wc=rng.uniform(-half, half, shape),
        b=rng.uniform(-half, half, n_vocab),
        bc=rng.uniform(-half, half, n_vocab),
        gw=np.ones(shape),
        gwc=np.ones(shape),
        gb=np.ones(n_vocab),
        gbc=np.ones(n_vocab),
    )


@dataclass
class TrainingSet:
    """Matrix entries unpacked into flat arrays, ready for epoch passes."""

    ii: np.ndarray
    jj: np.ndarray
    logx: np.ndarray
    fx: np.ndarray
    names: list[str]

    @classmethod
    def from_matrix(cls, matrix, config: EmbedConfig) -> "TrainingSet":
        keys = sorted(matrix.entries)
        ii = np.array([k[0] for k in keys], dtype=np.int64)
        jj = np.array([k[1] for k in keys], dtype=np.int64)
        x = np.array([matrix.entries[k] for k in keys], dtype=np.float64)
        if np.any(x <= 0):
            raise ValueError("co-occurrence entries must be positive")
        fx = np.where(x < config.x_max, (x / config.x_max) ** config.alpha, 1.0)
        return cls(ii, jj, np.log(x), fx, list(matrix.vocab.names))

    def __len__(self) -> int:
        return len(self.ii)


def _pass_over(state: EmbeddingState, ts: TrainingSet, order: np.ndarray, lr: float) -> float:
    """Sequential AdaGrad pass over `order`; returns summed pre-update costs."""
    w, wc, b, bc = state.w, state.wc, state.b, state.bc
    gw, gwc, gb, gbc = state.gw, state.gwc, state.gb, state.gbc
    total = 0.0
    for t in order:
        i = ts.ii[t]
        j = ts.jj[t]
        wi = w[i]
        wj = wc[j]
        # Elementwise product + sum instead of BLAS dot, and biases grouped
        # before the product term: both keep the arithmetic bitwise symmetric
        # under exchange of the i/j roles, which the mirror property needs.
        diff = float((wi * wj).sum()) + (b[i] + bc[j]) - ts.logx[t]
        cost = ts.fx[t] * diff * diff
        if not math.isfinite(cost):
            raise TrainingDivergedError(
                f"non-finite loss at entry ({ts.names[i]}, {ts.names[j]})"
            )
        total += cost
        g = 2.0 * ts.fx[t] * diff
        grad_i = g * wj
        grad_j = g * wi
        w[i] -= lr * grad_i / np.sqrt(gw[i])
        gw[i] += grad_i * grad_i
        wc[j] -= lr * grad_j / np.sqrt(gwc[j])
        gwc[j] += grad_j * grad_j
        b[i] -= lr * g / math.sqrt(gb[i])
        gb[i] += g * g
        bc[j] -= lr * g / math.sqrt(gbc[j])
        gbc[j] += g * g
    return total


def train_epoch(
    state: EmbeddingState,
    training_set,
    config: EmbedConfig,
    rng: np.random.Generator,
    workers: int = 1,
) -> float:
    """One pass over all entries in shuffled order; returns the epoch loss.

    Accepts a prepared TrainingSet or a CooccurrenceMatrix directly.
    """
    if not isinstance(training_set, TrainingSet):
        training_set = TrainingSet.from_matrix(training_set, config)
    if len(training_set) == 0:
        raise ValueError("training set has no entries")
    order = rng.permutation(len(training_set))
    if workers <= 1:
        return _pass_over(state, training_set, order, config.learning_rate)
    shards = np.array_split(order, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_pass_over, state, training_set, shard, config.learning_rate)
            for shard in shards
            if len(shard)
        ]
        return sum(f.result() for f in futures)


@dataclass
class EmbeddingMatrix:
    """One dense vector per subreddit, in vocabulary order."""

    names: list[str]
    vectors: np.ndarray

    def __post_init__(self):
        if len(self.names) != self.vectors.shape[0]:
            raise ValueError("vector count must match vocabulary size")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def save_text(self, path: str | Path) -> None:
        """`<count> <dim>` header, then one `name v1 .. vd` line per subreddit."""
        with open(path, "wt", encoding="utf-8") as fh:
            fh.write(f"{len(self.names)} {self.dim}\n")
            for name, vec in zip(self.names, self.vectors):
                if any(ch.isspace() for ch in name):
                    raise ValueError(f"name {name!r} contains whitespace; use binary format")
                fh.write(name + " " + " ".join(format(v, ".9g") for v in vec) + "\n")

    @classmethod
    def load_text(cls, path: str | Path) -> "EmbeddingMatrix":
        with open(path, "rt", encoding="utf-8") as fh:
            header = fh.readline().split()
            if len(header) != 2:
                raise fileio.FormatError(f"{path}: bad embedding header")
            count, dim = int(header[0]), int(header[1])
            names, rows = [], []
            for line in fh:
                parts = line.split()
                if not parts:
                    continue
                if len(parts) != dim + 1:
                    raise fileio.FormatError(
                        f"{path}: expected {dim} values for {parts[0]!r}"
                    )
                names.append(parts[0])
                rows.append([float(v) for v in parts[1:]])
        if len(names) != count:
            raise fileio.FormatError(f"{path}: header names {count}, found {len(names)}")
        return cls(names, np.array(rows, dtype=np.float64))

    def save_binary(self, path: str | Path) -> None:
        vec = np.ascontiguousarray(self.vectors, dtype=np.float64)
        payload = b"".join(
            [
                fileio.pack_names(self.names),
                struct.pack("<Q", self.dim),
                vec.tobytes(),
            ]
        )
        fileio.write_container(path, _EMBED_MAGIC, payload)

    @classmethod
    def load_binary(cls, path: str | Path) -> "EmbeddingMatrix":
        payload = memoryview(fileio.read_container(path, _EMBED_MAGIC))
        names, offset = fileio.unpack_names(payload, 0)
        (dim,) = struct.unpack_from("<Q", payload, offset)
        offset += 8
        vectors = np.frombuffer(payload[offset:], dtype="<f8").reshape(len(names), dim)
        return cls(names, vectors.copy())

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingMatrix":
        with open(path, "rb") as fh:
            head = fh.read(4)
        if head == _EMBED_MAGIC:
            return cls.load_binary(path)
        return cls.load_text(path)


@dataclass
class TrainResult:
    embeddings: EmbeddingMatrix
    loss_trace: list[float] = field(default_factory=list)
    final_state: EmbeddingState | None = None


def train(
    matrix,
    config: EmbedConfig,
    deterministic: bool = True,
    workers: int = 4,
    combine: str = "sum",
    initial_state: EmbeddingState | None = None,
) -> TrainResult:
    """Run `config.epochs` epochs and finalize vectors.

    combine="sum" emits w + wc (the usual convention); combine="main" emits
    w alone. Passing `initial_state` resumes from explicit parameters
    instead of the seeded initialization.
    """
    if combine not in ("sum", "main"):
        raise ValueError("combine must be 'sum' or 'main'")
    names = list(matrix.vocab.names)
    state = initial_state if initial_state is not None else init_state(len(names), config)
    trace: list[float] = []
    if config.epochs > 0:
        ts = TrainingSet.from_matrix(matrix, config)
        rng = np.random.default_rng(_seed_streams(config.seed)[1])
        epoch_workers = 1 if deterministic else max(1, workers)
        for _ in range(config.epochs):
            trace.append(train_epoch(state, ts, config, rng, workers=epoch_workers))
    vectors = state.w + state.wc if combine == "sum" else state.w.copy()
    return TrainResult(EmbeddingMatrix(names, vectors), trace, state)
