"""Counter-based random streams for reproducible, splittable Monte Carlo.

Every random quantity in this package is a pure function of
(seed, sample index, slot).  A sample never consumes a variable number of
draws, so an estimator may hand out disjoint index ranges to workers and
merge their accumulators; the merged result is bit-identical to a serial
run because no state is shared and no draw order matters.

The generator is the SplitMix64 sequence with random access: the state for
counter c is ``seed_state + c * GAMMA`` and the output function is the
Stafford mix13 finalizer.  Two levels of this construction (index, then
slot) give each sample its own short stream.
"""

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64 = np.uint64

# Fixed reduction chunk.  Float accumulations are folded chunk by chunk in
# index order, so the worker count cannot change the arithmetic.
CHUNK = 1 << 16


def _mix(z):
    """Stafford mix13 finalizer, vectorized over uint64 arrays."""
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _U64(30))) * _MIX1
        z = (z ^ (z >> _U64(27))) * _MIX2
        return z ^ (z >> _U64(31))


def _seed_state(seed: int) -> np.uint64:
    with np.errstate(over="ignore"):
        return _mix(np.asarray([np.uint64(seed & 0xFFFFFFFFFFFFFFFF)]))[0]


def _tag_key(tag: str) -> np.uint64:
    """Stable 64-bit key for a substream label (FNV-1a over the bytes)."""
    h = 0xCBF29CE484222325
    for b in tag.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return np.uint64(h)


class Stream:
    """A named, counter-addressable random stream.

    ``uniforms(start, count, slots)`` returns the same values no matter how
    the [0, n) index range is partitioned across calls, which is the whole
    reproducibility contract.
    """

    def __init__(self, seed: int, tag: str = "root"):
        self.seed = int(seed)
        self.tag = tag
        with np.errstate(over="ignore"):
            self._state = _mix(np.asarray([_seed_state(seed) ^ _tag_key(tag)]))[0]

    def derive(self, tag: str) -> "Stream":
        """Independent child stream addressed by a label."""
        child = Stream.__new__(Stream)
        child.seed = self.seed
        child.tag = f"{self.tag}/{tag}"
        with np.errstate(over="ignore"):
            child._state = _mix(np.asarray([self._state ^ _tag_key(tag)]))[0]
        return child

    def _keys(self, start: int, count: int) -> np.ndarray:
        idx = np.arange(start, start + count, dtype=np.uint64)
        with np.errstate(over="ignore"):
            return _mix(self._state + idx * _GAMMA)

    def uniforms(self, start: int, count: int, slots: int) -> np.ndarray:
        """(count, slots) array of doubles in [0, 1)."""
        keys = self._keys(start, count)[:, None]
        slot = np.arange(1, slots + 1, dtype=np.uint64)[None, :]
        with np.errstate(over="ignore"):
            bits = _mix(keys + slot * _GAMMA)
        return (bits >> _U64(11)).astype(np.float64) * (2.0 ** -53)

    def uniforms_open(self, start: int, count: int, slots: int) -> np.ndarray:
        """Uniforms in (0, 1], safe as arguments of log."""
        keys = self._keys(start, count)[:, None]
        slot = np.arange(1, slots + 1, dtype=np.uint64)[None, :]
        with np.errstate(over="ignore"):
            bits = _mix(keys + slot * _GAMMA)
        return ((bits >> _U64(11)).astype(np.float64) + 1.0) * (2.0 ** -53)

    def normals(self, start: int, count: int, slots: int) -> np.ndarray:
        """(count, slots) standard normals via Box-Muller on fixed slot pairs."""
        pairs = (slots + 1) // 2
        u = self.uniforms_open(start, count, 2 * pairs)
        u1 = u[:, 0::2]
        u2 = u[:, 1::2]
        r = np.sqrt(-2.0 * np.log(u1))
        theta = (2.0 * np.pi) * u2
        out = np.empty((count, 2 * pairs))
        out[:, 0::2] = r * np.cos(theta)
        out[:, 1::2] = r * np.sin(theta)
        return out[:, :slots]

    def integers(self, start: int, count: int, slots: int, bound: int) -> np.ndarray:
        """(count, slots) integers uniform on [0, bound) by 53-bit scaling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        u = self.uniforms(start, count, slots)
        return np.minimum((u * bound).astype(np.int64), bound - 1)


def chunk_ranges(n: int, chunk: int = CHUNK):
    """Yield (start, count) pieces of [0, n) in index order."""
    start = 0
    while start < n:
        count = min(chunk, n - start)
        yield start, count
        start += count


def chunked_sum(n: int, per_chunk, workers: int = 1, chunk: int = CHUNK):
    """Fold per-chunk accumulators in chunk order.

    ``per_chunk(start, count)`` returns a tuple of numbers or arrays.  The
    fold is a plain sum performed in ascending chunk order regardless of
    ``workers``, so results are bit-identical across worker counts.
    """
    ranges = list(chunk_ranges(n, chunk))
    if workers <= 1 or len(ranges) <= 1:
        parts = [per_chunk(s, c) for s, c in ranges]
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda rc: per_chunk(*rc), ranges))
    acc = list(parts[0])
    for part in parts[1:]:
        for i, value in enumerate(part):
            acc[i] = acc[i] + value
    return tuple(acc)
