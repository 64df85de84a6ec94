"""Deterministic, keyed random substreams.

Every stochastic operation in the package draws from a stream addressed by
(root seed, key tuple).  Keys are extended with :meth:`RandomStream.child`,
e.g. ``root.child(i, HISTORY)`` for realization ``i``'s measurement history,
so parallel workers can reproduce any draw independently of execution order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Purpose tags used as substream key components.
DEPLOY = 0
EMBB_CSI = 1
HISTORY = 2
SYNTHESIS = 3
TARGET = 4
MONTE_CARLO = 5


@dataclass(frozen=True)
class RandomStream:
    """Address of a deterministic PCG64 substream."""

    seed: int
    key: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ValueError("rng seed must be a non-negative integer")

    def child(self, *key: int) -> "RandomStream":
        """Extend the substream key; children with distinct keys are independent."""
        return RandomStream(self.seed, self.key + tuple(int(k) for k in key))

    def generator(self) -> np.random.Generator:
        """Instantiate the generator for this address (stateless; call freely)."""
        ss = np.random.SeedSequence(self.seed, spawn_key=self.key)
        return np.random.Generator(np.random.PCG64(ss))


def complex_normal(gen: np.random.Generator, shape: tuple[int, ...] | int) -> np.ndarray:
    """Circularly-symmetric unit-variance complex Gaussian samples.

    Real/imaginary parts are drawn interleaved so that a draw of shape
    (n, ...) is a prefix of a longer draw along the leading axis, which keeps
    histories and user sets nested when their length is swept.
    """
    if isinstance(shape, int):
        shape = (shape,)
    z = gen.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)
