"""Seeded Gaussian random Fourier data on the torus.

A sample is ``u0(x) = v0(x) + sum_n g_n / sqrt(1 + |n|^(2 alpha)) e^{inx}``
truncated to ``|n| <= max_mode``, where the ``g_n`` are i.i.d. complex
Gaussians with ``E|g_n|^2 = gaussian_scale``. ``alpha = 0`` gives truncated
white noise; ``alpha = 1`` the massive free field.

Sampling uses counter-based Philox streams keyed by (seed, sample index),
with each mode's pair of normals drawn at a fixed position in the stream
(order ``0, +1, -1, +2, -2, ...``). The coefficient at mode ``n`` therefore
depends only on the seed and ``n``: samples are reproducible under any
parallel iteration order, and truncations are nested (the same draw at
``max_mode = 8`` and ``max_mode = 64`` agrees on the common band).
"""

from dataclasses import dataclass

import numpy as np

from . import field as fld
from .wick import renormalization_constant


@dataclass(frozen=True)
class RandomDataSpec:
    alpha: float
    max_mode: int
    seed: int
    offset: fld.TorusField | None = None
    gaussian_scale: float = 1.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.max_mode < 0:
            raise ValueError("max_mode must be >= 0")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must fit in 64 bits")
        if self.gaussian_scale < 0:
            raise ValueError("gaussian_scale must be >= 0")
        if self.offset is not None and self.offset.max_mode > self.max_mode:
            raise ValueError("offset must be band-limited to max_mode")

    def to_dict(self) -> dict:
        d = {
            "alpha": self.alpha, "max_mode": self.max_mode, "seed": int(self.seed),
            "gaussian_scale": self.gaussian_scale,
        }
        if self.offset is not None:
            d["offset"] = {
                "max_mode": self.offset.max_mode,
                "coeffs": [[z.real, z.imag] for z in self.offset.coeffs],
            }
        return d


def _draw_positions(max_mode: int) -> np.ndarray:
    """Stream position of the first normal for each mode, ordered -N..N."""
    n = np.arange(-max_mode, max_mode + 1)
    pos = np.where(n > 0, 4 * n - 2, -4 * n)
    pos[n == 0] = 0
    return pos


def covariance_weights(alpha: float, max_mode: int) -> np.ndarray:
    """1 / sqrt(1 + |n|^(2 alpha)) for n = -max_mode..max_mode."""
    n = np.abs(np.arange(-max_mode, max_mode + 1, dtype=np.float64))
    return 1.0 / np.sqrt(1.0 + n ** (2.0 * alpha))


def gaussian_coefficients(spec: RandomDataSpec, index: int = 0) -> np.ndarray:
    """Raw complex Gaussians g_n (E|g_n|^2 = gaussian_scale), modes -N..N."""
    gen = np.random.Generator(
        np.random.Philox(key=np.array([spec.seed, index], dtype=np.uint64))
    )
    z = gen.standard_normal(2 * (2 * spec.max_mode + 1))
    pos = _draw_positions(spec.max_mode)
    g = z[pos] + 1j * z[pos + 1]
    return g * np.sqrt(spec.gaussian_scale / 2.0)


def sample(spec: RandomDataSpec, index: int = 0) -> fld.TorusField:
    """One random field; ``index`` selects a member of the ensemble."""
    coeffs = gaussian_coefficients(spec, index) * covariance_weights(spec.alpha, spec.max_mode)
    if spec.offset is not None:
        off = spec.offset.padded_to(spec.max_mode).coeffs
        coeffs = coeffs + off
    return fld.TorusField(coeffs, spec.max_mode)


def sample_ensemble(spec: RandomDataSpec, count: int):
    """Iterator over ``count`` independent samples (indices 0..count-1)."""
    for k in range(count):
        yield sample(spec, k)


def expected_mean_intensity(spec: RandomDataSpec) -> float:
    """E[mu(u0)] = gaussian_scale * sum 1/(1+|n|^(2 alpha)) + mu(offset)."""
    total = spec.gaussian_scale * renormalization_constant(spec.max_mode, spec.alpha)
    if spec.offset is not None:
        total += fld.mean_intensity(spec.offset)
    return total


def regularity_profile(spec: RandomDataSpec, s_values, mode_cutoffs, samples: int):
    """Median Sobolev-s norms of mode-M projections across the ensemble.

    Returns one row per (s, M):
    {"s", "cutoff", "median", "q25", "q75", "samples"}.
    """
    cutoffs = [int(m) for m in mode_cutoffs]
    if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
        raise ValueError("mode_cutoffs must be strictly increasing")
    if cutoffs and cutoffs[-1] > spec.max_mode:
        raise ValueError("cutoffs cannot exceed the sampler's max_mode")
    s_values = [float(s) for s in s_values]
    center = spec.max_mode
    bracket = 1.0 + np.abs(np.arange(-center, center + 1, dtype=np.float64))
    weights = [bracket ** (2.0 * s) for s in s_values]

    norms = np.empty((len(s_values), len(cutoffs), samples))
    for k in range(samples):
        a2 = np.abs(sample(spec, k).coeffs) ** 2
        for i, w in enumerate(weights):
            v = w * a2
            for j, m in enumerate(cutoffs):
                norms[i, j, k] = np.sqrt(v[center - m:center + m + 1].sum())

    rows = []
    for i, s in enumerate(s_values):
        for j, m in enumerate(cutoffs):
            q25, med, q75 = np.percentile(norms[i, j], [25.0, 50.0, 75.0])
            rows.append({
                "s": s, "cutoff": m, "median": float(med),
                "q25": float(q25), "q75": float(q75), "samples": samples,
            })
    return rows
