"""
Deterministic random-number streams.

A stream is identified by ``(master_seed, stream_id, path)``. Child
streams are derived by extending the path, so Monte Carlo trials, polarity
banks and calibration iterations each get an independent, reproducible
generator no matter in which order (or on which worker) they run.
"""

import numpy as np

SEED_MASK = (1 << 64) - 1


class RngStream:
    """
    Seeded random stream backed by numpy's PCG64.

    Identical ``(master_seed, stream_id, path)`` triples produce identical
    draws on every platform; different triples are statistically
    independent (numpy ``SeedSequence`` spawn keys).
    """

    def __init__(self, master_seed: int, stream_id: int = 0, path: tuple[int, ...] = ()):
        """
        Initialize the stream.

        Args:
            master_seed: 64-bit experiment seed
            stream_id: Top-level stream number
            path: Child indices leading to this stream
        """
        self.master_seed = int(master_seed) & SEED_MASK
        self.stream_id = int(stream_id)
        self.path = tuple(int(p) for p in path)
        sequence = np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=(self.stream_id, *self.path)
        )
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def substream(self, index: int) -> "RngStream":
        """Derive an independent child stream."""
        return RngStream(self.master_seed, self.stream_id, (*self.path, index))

    def normal(self, sigma: float, size=None):
        """Zero-mean Gaussian draws with standard deviation ``sigma``."""
        return self.generator.normal(0.0, sigma, size)

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

    def coin(self, size=None):
        """Fair Bernoulli draws as booleans."""
        return self.generator.random(size) < 0.5

    def __repr__(self) -> str:
        return (
            f"RngStream(master_seed={self.master_seed}, "
            f"stream_id={self.stream_id}, path={self.path})"
        )
