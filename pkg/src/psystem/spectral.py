"""Fourier collocation on the unit circle x in [0, 1)."""
from __future__ import annotations

import numpy as np


def grid(n: int) -> np.ndarray:
    return np.arange(n) / n


def wavenumbers(n: int) -> np.ndarray:
    k = 2.0 * np.pi * np.fft.rfftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[-1] = 0.0  # drop the unpaired Nyquist mode from odd derivatives
    return k


def derivative(f: np.ndarray, order: int = 1) -> np.ndarray:
    n = f.shape[-1]
    k = wavenumbers(n)
    return np.fft.irfft((1j * k) ** order * np.fft.rfft(f), n)


def derivatives(f: np.ndarray):
    """First and second derivatives from one forward transform."""
    n = f.shape[-1]
    k = wavenumbers(n)
    fh = np.fft.rfft(f)
    return np.fft.irfft(1j * k * fh, n), np.fft.irfft(-(k * k) * fh, n)


def tail_fraction(f: np.ndarray) -> float:
    """Share of the non-mean spectral energy held by the top third of the modes."""
    fh = np.fft.rfft(f)
    e = np.abs(fh[1:]) ** 2
    total = e.sum()
    if total <= 0.0 or total < 1e-28 * f.size ** 2:
        return 0.0
    cut = int(np.ceil(f.shape[-1] / 3.0))
    return float(e[cut - 1:].sum() / total) if cut - 1 < e.size else 0.0


def exp_filter(n: int, order: int = 16, strength: float = 36.0) -> np.ndarray:
    """Exponential filter weights on the rfft modes; weight 1 on the mean."""
    kappa = np.arange(n // 2 + 1) / (n / 2.0)
    return np.exp(-strength * kappa ** order)


def apply_filter(f: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return np.fft.irfft(np.fft.rfft(f) * weights, f.shape[-1])
