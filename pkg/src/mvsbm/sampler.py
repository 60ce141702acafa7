"""Seeded sampling of labelings and adjacency tensors.

Determinism contract
--------------------
A :class:`SeedSpec` ``(master_seed, trial_index)`` selects independent
counter-based streams::

    Generator(Philox(SeedSequence(entropy=master_seed,
                                  spawn_key=(trial_index, stream_id))))

with ``stream_id`` 0 for the labeling, 1 for the pair draws and 2 for
estimator restarts.  Only ``Generator.random()`` doubles are consumed, so
outputs are bit-identical across platforms for a given NumPy Philox.

Pairs ``(i, j)``, ``i < j``, are visited in row-major order and each pair
consumes exactly one uniform, mapped to a bitmask by inverse CDF.  The
auxiliary (tilted) model reuses the same uniforms, so the two tensors differ
only where the laws of the node-0 row differ.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from mvsbm.errors import BadTensorFile, InvalidNodeCount, LengthMismatch, OddN, Unbalanced
from mvsbm.model import MvsbmParams

STREAM_LABELS = 0
STREAM_PAIRS = 1
STREAM_RESTARTS = 2

TENSOR_MAGIC = b"MVSB"
TENSOR_VERSION = 1
_HEADER = struct.Struct("<4sHIHQQ")


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    trial_index: int = 0

    def __post_init__(self):
        if not (0 <= self.master_seed < 2**64) or not (0 <= self.trial_index < 2**64):
            raise ValueError("seed components must be unsigned 64-bit integers")

    def generator(self, stream: int) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=int(self.master_seed), spawn_key=(int(self.trial_index), int(stream))
        )
        return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True, eq=False)
class Labeling:
    """Balanced vector of +1/-1 community signs."""

    signs: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.signs, dtype=np.int8)
        if s.ndim != 1 or s.size % 2:
            raise OddN(f"labeling length {s.size} is not even")
        if not np.all((s == 1) | (s == -1)):
            raise ValueError("labeling entries must be +1 or -1")
        if int(s.sum(dtype=np.int64)) != 0:
            raise Unbalanced(f"labeling sums to {int(s.sum(dtype=np.int64))}")
        s.setflags(write=False)
        object.__setattr__(self, "signs", s)

    @property
    def n(self) -> int:
        return int(self.signs.size)

    def flipped(self) -> "Labeling":
        return Labeling(-self.signs)

    def canonical(self) -> "Labeling":
        """Representative of the partition with node 0 on the +1 side."""
        return self if self.signs[0] == 1 else self.flipped()

    def __eq__(self, other):
        if not isinstance(other, Labeling):
            return NotImplemented
        return np.array_equal(self.signs, other.signs)

    def __hash__(self):
        return hash(self.signs.tobytes())

    def __repr__(self):
        return "Labeling(" + "".join("+" if s > 0 else "-" for s in self.signs) + ")"


def planted_labeling(n: int) -> Labeling:
    """First half +1, second half -1."""
    if n % 2:
        raise OddN(f"n={n}")
    return Labeling(np.repeat(np.array([1, -1], dtype=np.int8), n // 2))


@dataclass(frozen=True, eq=False)
class AdjacencyTensor:
    """Condensed upper-triangular store of D-bit connection vectors."""

    n: int
    num_views: int
    pair_vectors: np.ndarray
    master_seed: int = 0
    trial_index: int = 0

    def __post_init__(self):
        pv = np.asarray(self.pair_vectors, dtype=np.uint16)
        if pv.shape != (self.n * (self.n - 1) // 2,):
            raise LengthMismatch(f"expected {self.n * (self.n - 1) // 2} pairs, got {pv.shape}")
        if pv.size and int(pv.max()) >= 1 << self.num_views:
            raise BadTensorFile("bitmask exceeds 2**D")
        pv.setflags(write=False)
        object.__setattr__(self, "pair_vectors", pv)

    def __eq__(self, other):
        if not isinstance(other, AdjacencyTensor):
            return NotImplemented
        return (
            self.n == other.n
            and self.num_views == other.num_views
            and np.array_equal(self.pair_vectors, other.pair_vectors)
        )

    def pair(self, i: int, j: int) -> int:
        if i == j:
            raise ValueError("no self-loops")
        if i > j:
            i, j = j, i
        return int(self.pair_vectors[pair_index(self.n, i, j)])

    def dense(self) -> np.ndarray:
        """Symmetric n x n bitmask matrix with zero diagonal."""
        out = np.zeros((self.n, self.n), dtype=np.uint16)
        iu = np.triu_indices(self.n, 1)
        out[iu] = self.pair_vectors
        return out + out.T

    def view_matrix(self, view: int) -> np.ndarray:
        return ((self.dense() >> view) & 1).astype(np.uint8)

    def to_bytes(self) -> bytes:
        header = _HEADER.pack(
            TENSOR_MAGIC, TENSOR_VERSION, self.n, self.num_views, self.master_seed, self.trial_index
        )
        return header + self.pair_vectors.astype("<u2").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "AdjacencyTensor":
        if len(data) < _HEADER.size:
            raise BadTensorFile("truncated header")
        magic, version, n, D, seed, trial = _HEADER.unpack_from(data)
        if magic != TENSOR_MAGIC:
            raise BadTensorFile(f"bad magic {magic!r}")
        if version != TENSOR_VERSION:
            raise BadTensorFile(f"unsupported version {version}")
        expected = _HEADER.size + 2 * (n * (n - 1) // 2)
        if len(data) != expected:
            raise BadTensorFile(f"expected {expected} bytes, got {len(data)}")
        pv = np.frombuffer(data, dtype="<u2", offset=_HEADER.size).astype(np.uint16)
        return cls(n, D, pv, seed, trial)

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "AdjacencyTensor":
        return cls.from_bytes(Path(path).read_bytes())

    def edge_lines(self):
        """Yield ``"view i j"`` for every present edge, views and nodes 0-based."""
        iu, ju = np.triu_indices(self.n, 1)
        for view in range(self.num_views):
            hit = np.nonzero((self.pair_vectors >> view) & 1)[0]
            for k in hit:
                yield f"{view} {iu[k]} {ju[k]}"

    def write_edge_list(self, path) -> None:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            for line in self.edge_lines():
                fh.write(line + "\n")


def pair_index(n: int, i: int, j: int) -> int:
    """Row-major condensed index of pair (i, j) with i < j."""
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def sample_labeling(n: int, seed: SeedSpec) -> Labeling:
    """Uniform balanced labeling: the n/2 nodes with the smallest keys get +1."""
    if n % 2:
        raise OddN(f"n={n} is odd")
    if n < 2:
        raise InvalidNodeCount(f"n={n}")
    keys = seed.generator(STREAM_LABELS).random(n)
    order = np.argsort(keys, kind="stable")
    signs = np.full(n, -1, dtype=np.int8)
    signs[order[: n // 2]] = 1
    return Labeling(signs)


def inverse_cdf(mass: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Map uniforms in [0, 1) to bitmasks; zero-mass entries are never returned."""
    cdf = np.cumsum(mass)
    idx = np.searchsorted(cdf, u, side="right")
    # u beyond the rounded total falls back to the last positive-mass entry
    last = int(np.flatnonzero(mass > 0)[-1])
    return np.minimum(idx, last).astype(np.uint16)


def same_side_pairs(truth: Labeling) -> np.ndarray:
    iu, ju = np.triu_indices(truth.n, 1)
    return truth.signs[iu] == truth.signs[ju]


def pair_uniforms(n: int, seed: SeedSpec) -> np.ndarray:
    return seed.generator(STREAM_PAIRS).random(n * (n - 1) // 2)


def draw_pairs(params: MvsbmParams, truth: Labeling, uniforms: np.ndarray) -> np.ndarray:
    """Bitmasks for every pair given one uniform per pair in row-major order."""
    same = same_side_pairs(truth)
    out = np.empty(uniforms.shape, dtype=np.uint16)
    out[same] = inverse_cdf(params.within.mass, uniforms[same])
    out[~same] = inverse_cdf(params.across.mass, uniforms[~same])
    return out


def _check_truth(params: MvsbmParams, truth: Labeling):
    if truth.n != params.n:
        raise LengthMismatch(f"labeling has {truth.n} nodes, model has {params.n}")


def sample_tensor(params: MvsbmParams, truth: Labeling, seed: SeedSpec) -> AdjacencyTensor:
    _check_truth(params, truth)
    pv = draw_pairs(params, truth, pair_uniforms(params.n, seed))
    return AdjacencyTensor(params.n, params.num_views, pv, seed.master_seed, seed.trial_index)


def sample_tensor_psi(params: MvsbmParams, tilt, truth: Labeling, seed: SeedSpec) -> AdjacencyTensor:
    """Tensor under the auxiliary model: only the node-0 row changes law.

    Pair (0, v) follows ``tilt.p_tilt`` when ``truth(v) = +1`` and
    ``tilt.q_tilt`` when ``truth(v) = -1``, regardless of node 0's own sign.
    All other pairs are drawn exactly as by :func:`sample_tensor`.
    """
    _check_truth(params, truth)
    u = pair_uniforms(params.n, seed)
    pv = draw_pairs(params, truth, u)
    row = slice(0, params.n - 1)
    plus = truth.signs[1:] == 1
    head = np.empty(params.n - 1, dtype=np.uint16)
    head[plus] = inverse_cdf(tilt.p_tilt.mass, u[row][plus])
    head[~plus] = inverse_cdf(tilt.q_tilt.mass, u[row][~plus])
    pv[row] = head
    return AdjacencyTensor(params.n, params.num_views, pv, seed.master_seed, seed.trial_index)


def tensor_from_dense(dense: np.ndarray, num_views: int) -> AdjacencyTensor:
    """Build a tensor from a symmetric bitmask matrix (testing helper)."""
    n = dense.shape[0]
    return AdjacencyTensor(n, num_views, dense[np.triu_indices(n, 1)])


__all__ = [
    "AdjacencyTensor",
    "Labeling",
    "SeedSpec",
    "draw_pairs",
    "inverse_cdf",
    "pair_index",
    "planted_labeling",
    "sample_labeling",
    "sample_tensor",
    "sample_tensor_psi",
]
