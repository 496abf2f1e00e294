from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument

_U64 = (1 << 64) - 1

# Offset between p-grid points; replicate r of grid point i uses i * GRID_STRIDE + r.
GRID_STRIDE = 1 << 32


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    Streams are PCG64 generators seeded from ``SeedSequence(seed,
    spawn_key=(stream_id,))``; distinct stream ids give independent streams and
    the pair alone fixes the sequence.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.seed <= _U64:
            raise InvalidArgument(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not 0 <= self.stream_id <= _U64:
            raise InvalidArgument(f"stream_id must be a 64-bit unsigned integer, got {self.stream_id}")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(seq))

    def child(self, offset: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id + offset)


def replicate_stream(seed: int, grid_index: int, replicate: int, family: int = 0) -> RngStream:
    """Stream for one replicate; ``family`` separates independent sample sets at a grid point."""
    return RngStream(seed, grid_index * GRID_STRIDE).child(family + replicate)
