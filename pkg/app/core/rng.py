"""Deterministic random streams shared by every module.

Seeds are expanded with SplitMix64 and streams are produced by xoshiro256++, so graphs
and percolations written to disk can be regenerated bit for bit from their seeds.
"""
from functools import lru_cache

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

STREAM_GENERATION = 0
STREAM_PERCOLATION = 1
STREAM_SAMPLING = 2

# fill() below this many outputs runs the scalar recurrence
SCALAR_FILL_LIMIT = 4096
FILL_LANES = 512

_SHIFT_17 = np.uint64(17)
_SHIFT_19 = np.uint64(19)
_SHIFT_23 = np.uint64(23)
_SHIFT_41 = np.uint64(41)
_SHIFT_45 = np.uint64(45)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)


def splitmix64(value: int) -> int:
    """First SplitMix64 output for the given state; used as a 64-bit mixing function"""
    return SplitMix64(value).next_u64()


def derive_seed(seed: int, index: int) -> int:
    return splitmix64((seed ^ index) & MASK64)


def _advance(state: list[int]) -> list[int]:
    s0, s1, s2, s3 = state
    t = (s1 << 17) & MASK64
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    return [s0, s1, s2, _rotl(s3, 45)]


def _state_bits(state: list[int]) -> np.ndarray:
    """256 state bits, bit b of word w at index 64*w + b"""
    words = np.array(state, dtype=np.uint64).astype("<u8")
    return np.unpackbits(words.view(np.uint8), bitorder="little")


def _bits_to_states(bits: np.ndarray) -> np.ndarray:
    """(k, 256) bit rows to (k, 4) uint64 states"""
    packed = np.ascontiguousarray(np.packbits(bits.astype(np.uint8), axis=-1, bitorder="little"))
    return packed.view("<u8").astype(np.uint64)


def _gf2_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return ((a.astype(np.float64) @ b.astype(np.float64)) % 2).astype(np.uint8)


@lru_cache(maxsize=1)
def _transition_matrix() -> np.ndarray:
    """One xoshiro256++ step as a 256x256 matrix over GF(2), acting on column bit vectors"""
    columns = []
    for j in range(256):
        unit = [0, 0, 0, 0]
        unit[j // 64] = 1 << (j % 64)
        columns.append(_state_bits(_advance(unit)))
    return np.stack(columns, axis=1)


def _jump_matrix(steps: int) -> np.ndarray:
    result = np.eye(256, dtype=np.uint8)
    base = _transition_matrix()
    while steps:
        if steps & 1:
            result = _gf2_matmul(base, result)
        base = _gf2_matmul(base, base)
        steps >>= 1
    return result


class Xoshiro256pp:
    def __init__(self, seed: int):
        expander = SplitMix64(seed)
        self.s = [expander.next_u64() for _ in range(4)]

    @classmethod
    def from_state(cls, state: tuple[int, int, int, int]) -> "Xoshiro256pp":
        if not any(state):
            raise ValueError("xoshiro256++ state must not be all zero")
        rng = cls.__new__(cls)
        rng.s = [x & MASK64 for x in state]
        return rng

    def next_u64(self) -> int:
        s0, _, _, s3 = self.s
        result = (_rotl((s0 + s3) & MASK64, 23) + s0) & MASK64
        self.s = _advance(self.s)
        return result

    def fill(self, count: int) -> np.ndarray:
        """Next `count` outputs as a uint64 array, in stream order.

        Large requests are split into contiguous runs of the stream, one per lane. Lane
        starting states come from the GF(2) jump matrix of the state transition, and all
        lanes then step together with wrapping uint64 array arithmetic.
        """
        if count < SCALAR_FILL_LIMIT:
            return self._fill_scalar(count)

        lanes = min(FILL_LANES, count)
        steps = -(-count // lanes)
        lanes = -(-count // steps)
        jump = _jump_matrix(steps)
        rows = [_state_bits(self.s)]
        for _ in range(lanes - 1):
            rows.append(_gf2_matmul(jump, rows[-1]))
        states = _bits_to_states(np.stack(rows))
        s0, s1, s2, s3 = (states[:, w].copy() for w in range(4))

        out = np.empty((steps, lanes), dtype=np.uint64)
        # state after exactly `count` outputs sits in lane `owner` before step `offset`
        owner, offset = divmod(count, steps)
        final = None
        for i in range(steps):
            if i == offset and owner < lanes:
                final = [int(s0[owner]), int(s1[owner]), int(s2[owner]), int(s3[owner])]
            x = s0 + s3
            out[i] = ((x << _SHIFT_23) | (x >> _SHIFT_41)) + s0
            t = s1 << _SHIFT_17
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= t
            s3 = (s3 << _SHIFT_45) | (s3 >> _SHIFT_19)
        if final is None:
            final = [int(s0[-1]), int(s1[-1]), int(s2[-1]), int(s3[-1])]
        self.s = final
        return out.T.ravel()[:count]

    def _fill_scalar(self, count: int) -> np.ndarray:
        out = np.empty(count, dtype=np.uint64)
        s0, s1, s2, s3 = self.s
        for i in range(count):
            x = (s0 + s3) & MASK64
            out[i] = ((((x << 23) | (x >> 41)) & MASK64) + s0) & MASK64
            t = (s1 << 17) & MASK64
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= t
            s3 = ((s3 << 45) | (s3 >> 19)) & MASK64
        self.s = [s0, s1, s2, s3]
        return out

    def bounded(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection of the biased low range"""
        if bound <= 0:
            raise ValueError("bound must be positive")
        threshold = ((1 << 64) - bound) % bound
        while True:
            x = self.next_u64()
            if x >= threshold:
                return x % bound

    def shuffle(self, values: list) -> None:
        """In-place Fisher-Yates, walking from the last position down"""
        s0, s1, s2, s3 = self.s
        for i in range(len(values) - 1, 0, -1):
            bound = i + 1
            threshold = ((1 << 64) - bound) % bound
            while True:
                x = (s0 + s3) & MASK64
                r = ((((x << 23) | (x >> 41)) & MASK64) + s0) & MASK64
                t = (s1 << 17) & MASK64
                s2 ^= s0
                s3 ^= s1
                s1 ^= s2
                s0 ^= s3
                s2 ^= t
                s3 = ((s3 << 45) | (s3 >> 19)) & MASK64
                if r >= threshold:
                    break
            j = r % bound
            values[i], values[j] = values[j], values[i]
        self.s = [s0, s1, s2, s3]


def sampling_generator(seed: int) -> np.random.Generator:
    """numpy Generator for sampling-only work (audits, witness search)"""
    return np.random.Generator(np.random.PCG64(seed & MASK64))
