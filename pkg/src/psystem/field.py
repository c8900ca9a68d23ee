"""Sampled solution fields on the circle and their interpolation."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from . import spectral
from .constitutive import SigmaModel


class Frame(NamedTuple):
    t: float
    u: np.ndarray
    v: np.ndarray  # periodic part of v


@dataclass(frozen=True)
class StateField:
    """Periodic-in-x samples of ``(u, v)`` at increasing times.

    ``v`` is stored as its periodic part; the full function is
    ``v(t, x) = v_periodic(t, x) + winding_C * x``.
    """

    model: SigmaModel
    n_x: int
    frames: tuple = ()
    winding_C: float = 0.0
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        ts = [f.t for f in self.frames]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("frame times must be strictly increasing")
        for f in self.frames:
            if f.u.shape != (self.n_x,) or f.v.shape != (self.n_x,):
                raise ValueError("frame arrays must have length n_x")

    @classmethod
    def from_arrays(cls, model, times, U, V, winding_C=0.0, meta=None) -> "StateField":
        U = np.asarray(U, dtype=float)
        V = np.asarray(V, dtype=float)
        frames = tuple(Frame(float(t), U[i].copy(), V[i].copy()) for i, t in enumerate(times))
        return cls(model, U.shape[1], frames, float(winding_C), dict(meta or {}))

    @classmethod
    def from_functions(cls, model: SigmaModel, n_x: int, times: Sequence[float],
                       u_fn: Callable, v_fn: Optional[Callable] = None,
                       winding_C: float = 0.0) -> "StateField":
        """Sample ``u_fn(t, x)`` and the periodic part ``v_fn(t, x)`` on the grid."""
        x = spectral.grid(n_x)
        U = [np.broadcast_to(np.asarray(u_fn(t, x), dtype=float), x.shape) for t in times]
        if v_fn is None:
            V = [np.zeros(n_x) for _ in times]
        else:
            V = [np.broadcast_to(np.asarray(v_fn(t, x), dtype=float), x.shape) for t in times]
        return cls.from_arrays(model, times, U, V, winding_C)

    def append(self, t: float, u: np.ndarray, v: np.ndarray) -> "StateField":
        return StateField(self.model, self.n_x, self.frames + (Frame(float(t), u, v),),
                          self.winding_C, self.meta)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def x(self) -> np.ndarray:
        return spectral.grid(self.n_x)

    @cached_property
    def times(self) -> np.ndarray:
        return np.array([f.t for f in self.frames])

    @cached_property
    def U(self) -> np.ndarray:
        return np.array([f.u for f in self.frames])

    @cached_property
    def V(self) -> np.ndarray:
        return np.array([f.v for f in self.frames])

    @cached_property
    def _u_derivs(self):
        return spectral.derivatives(self.U)

    @cached_property
    def _v_derivs(self):
        return spectral.derivatives(self.V)

    @property
    def UX(self) -> np.ndarray:
        return self._u_derivs[0]

    @property
    def UXX(self) -> np.ndarray:
        return self._u_derivs[1]

    @property
    def VX(self) -> np.ndarray:
        """x-derivative of the periodic part of v (add ``winding_C`` for v_x)."""
        return self._v_derivs[0]

    @property
    def VXX(self) -> np.ndarray:
        return self._v_derivs[1]

    def full_v(self, i: int) -> np.ndarray:
        return self.frames[i].v + self.winding_C * self.x

    def sample(self, t, x) -> dict:
        """Interpolated ``u, u_x, v, v_x`` (full v, winding included) at points.

        Cubic Hermite in x using spectral slopes, linear in time.
        """
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        t, x = np.broadcast_arrays(t, x)
        i, w = locate(self.times, t)
        i1 = np.minimum(i + 1, len(self.frames) - 1)
        weights = _hermite_weights(x, self.n_x)
        out = {}
        for name, R, D in (("u", self.U, self.UX), ("u_x", self.UX, self.UXX),
                           ("v", self.V, self.VX), ("v_x", self.VX, self.VXX)):
            a = _hermite_gather(R, D, i, weights)
            if len(self.frames) > 1:
                a = (1.0 - w) * a + w * _hermite_gather(R, D, i1, weights)
            out[name] = a
        out["v"] = out["v"] + self.winding_C * x
        out["v_x"] = out["v_x"] + self.winding_C
        return out


def locate(times: np.ndarray, t):
    """Frame index and linear weight for times ``t`` (clipped to the span)."""
    t = np.asarray(t, dtype=float)
    if times.size == 1:
        return np.zeros(t.shape, dtype=int), np.zeros(t.shape)
    i = np.clip(np.searchsorted(times, t, side="right") - 1, 0, times.size - 2)
    w = (t - times[i]) / (times[i + 1] - times[i])
    return i, w


def _hermite_weights(x, n):
    s = x * n
    j = np.floor(s)
    th = s - j
    j0 = j.astype(int) % n
    th2 = th * th
    th3 = th2 * th
    h = 1.0 / n
    return (j0, (j0 + 1) % n, 2 * th3 - 3 * th2 + 1, (th3 - 2 * th2 + th) * h,
            -2 * th3 + 3 * th2, (th3 - th2) * h)


def _hermite_gather(R, D, i, weights):
    j0, j1, a0, b0, a1, b1 = weights
    return a0 * R[i, j0] + b0 * D[i, j0] + a1 * R[i, j1] + b1 * D[i, j1]


def hermite(rows: np.ndarray, drows: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Periodic cubic Hermite interpolation; ``rows[..., n]`` sampled at j/n."""
    n = rows.shape[-1]
    s = x * n
    j = np.floor(s)
    th = s - j
    j0 = j.astype(int) % n
    j1 = (j0 + 1) % n
    h = 1.0 / n
    th2 = th * th
    th3 = th2 * th
    take = (lambda r, j: r[j]) if rows.ndim == 1 else (
        lambda r, j: np.take_along_axis(r, j[..., None], axis=-1)[..., 0])
    return ((2 * th3 - 3 * th2 + 1) * take(rows, j0) + (th3 - 2 * th2 + th) * h * take(drows, j0)
            + (-2 * th3 + 3 * th2) * take(rows, j1) + (th3 - th2) * h * take(drows, j1))
