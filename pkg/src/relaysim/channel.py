"""Channel sampling: path loss, correlated Rayleigh draws, and the RNG contract.

Every random draw in the package comes from a substream keyed by the master
seed plus string tags (and indices such as the trial number), so results do
not depend on scheduling order or on how work is split across processes.
"""

import zlib

import numpy as np

from .correlation import psd_sqrt


def substream(seed, *tags):
    """Independent Generator for (seed, *tags).

    Tags may be strings (hashed with crc32, stable across platforms) or
    integers. Identical arguments always produce the identical stream.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for tag in tags:
        if isinstance(tag, str):
            entropy.append(zlib.crc32(tag.encode("utf-8")))
        else:
            entropy.append(int(tag) & 0xFFFFFFFFFFFFFFFF)
    return np.random.default_rng(np.random.SeedSequence(entropy))


def complex_normal(rng, shape, variance=1.0):
    """Circularly symmetric complex Gaussian samples, total variance per element."""
    scale = np.sqrt(np.asarray(variance, dtype=np.float64) / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def path_loss(d_ref, d, exponent):
    """Distance-based large-scale gain (d_ref / d) ** exponent."""
    if d_ref <= 0.0:
        raise ValueError(f"reference distance must be positive, got {d_ref}")
    if d <= 0.0:
        raise ValueError(f"distance must be positive, got {d}")
    if exponent < 0.0:
        raise ValueError(f"path-loss exponent must be non-negative, got {exponent}")
    return float((d_ref / d) ** exponent)


def large_scale_gains(d_ref, distances, exponent):
    """Per-user large-scale gains for a list of user-to-relay distances."""
    return np.array([path_loss(d_ref, d, exponent) for d in distances])


def draw_first_hop(recv_corr, gains, rng, recv_sqrt=None):
    """One realization of the user-to-relay channel matrix (N x K).

    Column k is sqrt(gain_k) * recv_corr^(1/2) @ h_k with h_k iid CN(0, I_N),
    so E{f_k f_k^H} = gain_k * recv_corr.
    """
    gains = np.asarray(gains, dtype=np.float64)
    if np.any(gains < 0.0):
        raise ValueError("large-scale gains must be non-negative")
    if recv_sqrt is None:
        recv_sqrt = psd_sqrt(recv_corr)
    n = recv_sqrt.shape[0]
    h = complex_normal(rng, (n, gains.size))
    return (recv_sqrt @ h) * np.sqrt(gains)[None, :]


def draw_second_hop(relay_gain, recv_corr, tx_corr, rng, recv_sqrt=None, tx_sqrt=None):
    """One realization of the relay-to-destination channel matrix (M x K).

    Doubly correlated Rayleigh: sqrt(relay_gain) * recv_corr^(1/2) @ H @
    tx_corr^(1/2) with H iid CN(0, 1).
    """
    if relay_gain < 0.0:
        raise ValueError(f"relay large-scale gain must be non-negative, got {relay_gain}")
    if recv_sqrt is None:
        recv_sqrt = psd_sqrt(recv_corr)
    if tx_sqrt is None:
        tx_sqrt = psd_sqrt(tx_corr)
    m = recv_sqrt.shape[0]
    k = tx_sqrt.shape[0]
    h = complex_normal(rng, (m, k))
    return np.sqrt(relay_gain) * (recv_sqrt @ h @ tx_sqrt)
