import numpy as np

from .base import DomainError

MAX_SEED = 2**64 - 1


class Stream:
    SAMPLING = 0
    SELECTION = 1
    MAP_INITIAL_CONDITIONS = 2
    BENCHMARK = 3


def validate_seed(seed: int) -> int:
    if not 0 <= seed <= MAX_SEED:
        raise DomainError(f"Seed should be within [0, 2**64), got {seed}")
    return int(seed)


def derive_seed_sequence(seed: int, *keys: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(validate_seed(seed), spawn_key=tuple(int(k) for k in keys))


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """
    Build an independent generator for the stream identified by keys.

    Streams never depend on how work is split between workers: the same (seed, keys)
    always yields the same generator state.
    """
    return np.random.Generator(np.random.PCG64(derive_seed_sequence(seed, *keys)))


def derive_seed(seed: int, *keys: int) -> int:
    state = derive_seed_sequence(seed, *keys).generate_state(1, dtype=np.uint64)
    return int(state[0])
