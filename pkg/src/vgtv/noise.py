"""Deterministic seeded Gaussian noise for synthetic test data.

The uniform stream is a counter-mode splitmix64 generator (finalizer of the
64-bit golden-ratio sequence), turned Gaussian by Box-Muller.  The same
(image, sigma, seed) triple gives the same bytes on any platform up to the
libm accuracy of log/cos/sin, which is well below float64 display precision
and identical on a fixed machine.
"""

from __future__ import annotations

import numpy as np

from .calculus import ScalarImage

__all__ = ["splitmix64", "gaussian_field", "add_noise"]

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_TWO53 = float(1 << 53)


def splitmix64(counter: np.ndarray, seed: int) -> np.ndarray:
    """splitmix64 output words for the given counters (uint64 array)."""
    with np.errstate(over="ignore"):
        z = (np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
             + (counter.astype(np.uint64) + np.uint64(1)) * _GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        z = z ^ (z >> np.uint64(31))
    return z


def gaussian_field(n: int, seed: int) -> np.ndarray:
    """n standard normal draws via Box-Muller over the splitmix64 stream."""
    pairs = (n + 1) // 2
    words = splitmix64(np.arange(2 * pairs, dtype=np.uint64), seed)
    # 53-bit uniforms; u1 shifted into (0, 1] so the log is always finite
    u1 = ((words[0::2] >> np.uint64(11)).astype(float) + 1.0) / _TWO53
    u2 = (words[1::2] >> np.uint64(11)).astype(float) / _TWO53
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    out = np.empty(2 * pairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:n]


def add_noise(img: ScalarImage, sigma: float, seed: int) -> ScalarImage:
    """Add N(0, sigma^2) noise, deterministically from ``seed``; sigma=0 is the identity."""
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    if sigma == 0.0:
        return img
    noise = gaussian_field(img.data.size, seed).reshape(img.shape)
    return ScalarImage(img.data + sigma * noise, img.h)
