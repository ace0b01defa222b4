"""Forward-backward cosine coordinates built from diffusive Green profiles."""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .markov import GreenProfileSet

DEFAULT_TAU = 1e-12

_MAGIC = b"GFBE"
_VERSION = 1
_HEADER = struct.Struct("<4sIIf")


@dataclass(frozen=True, eq=False)
class FBEmbedding:
    n: int
    lam: float
    tau: float
    coords: np.ndarray
    degenerate_flags: np.ndarray

    def gram(self) -> np.ndarray:
        """The full cosine matrix ``Z Z^T``."""
        return self.coords @ self.coords.T


def normalize_profile(x, tau: float = DEFAULT_TAU) -> np.ndarray:
    """Return ``x / max(||x||_2, tau)``."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("profile has non-finite entries")
    return x / max(float(np.linalg.norm(x)), tau)


def _normalize_rows(x: np.ndarray, tau: float) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(x, axis=1)
    clamped = norms < tau
    return x / np.maximum(norms, tau)[:, None], clamped


def normalize_rows(x: np.ndarray, tau: float = DEFAULT_TAU) -> np.ndarray:
    """Row-wise :func:`normalize_profile`."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("profiles have non-finite entries")
    return _normalize_rows(x, tau)[0]


def build_embedding(forward: GreenProfileSet, backward: GreenProfileSet,
                    lam: float = 0.5, tau: float = DEFAULT_TAU) -> FBEmbedding:
    """Concatenate normalized forward and backward profiles with weights
    ``sqrt(lam)`` and ``sqrt(1 - lam)``, then renormalize."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    if tau <= 0:
        raise ValueError("tau must be positive")
    if forward.source_model.direction != "forward":
        raise ValueError("forward profiles must come from a forward walk")
    if backward.source_model.direction != "backward":
        raise ValueError("backward profiles must come from a backward walk")
    xf, xb = forward.rows, backward.rows
    if xf.shape != xb.shape:
        raise ValueError(f"profile shapes differ: {xf.shape} vs {xb.shape}")
    if not (np.all(np.isfinite(xf)) and np.all(np.isfinite(xb))):
        raise ValueError("profiles have non-finite entries")

    hf, clamp_f = _normalize_rows(xf, tau)
    hb, clamp_b = _normalize_rows(xb, tau)
    z = np.hstack([np.sqrt(lam) * hf, np.sqrt(1.0 - lam) * hb])
    z, clamp_z = _normalize_rows(z, tau)
    flags = clamp_f | clamp_b | clamp_z
    z.setflags(write=False)
    flags.setflags(write=False)
    return FBEmbedding(xf.shape[0], float(lam), float(tau), z, flags)


def _check_vertex(e: FBEmbedding, u: int):
    if not 0 <= u < e.n:
        raise IndexError(f"vertex {u} outside [0, {e.n})")


def cos_fb(e: FBEmbedding, u: int, v: int) -> float:
    """Forward-backward cosine: the inner product of the two coordinates."""
    _check_vertex(e, u)
    _check_vertex(e, v)
    return float(e.coords[u] @ e.coords[v])


def dist_fb(e: FBEmbedding, u: int, v: int) -> float:
    return float(np.sqrt(max(0.0, 2.0 - 2.0 * cos_fb(e, u, v))))


def save_embedding(e: FBEmbedding, path: str | os.PathLike) -> None:
    """Little-endian dump: ``GFBE``, version, n, lambda (f32), then the
    ``n x 2n`` float64 coordinates row-major."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, e.n, e.lam))
        fh.write(np.ascontiguousarray(e.coords, dtype="<f8").tobytes())


def load_embedding(path: str | os.PathLike) -> tuple[float, np.ndarray]:
    """Read a dump written by :func:`save_embedding`; returns ``(lam, coords)``."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError("truncated embedding header")
        magic, version, n, lam = _HEADER.unpack(head)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        if version != _VERSION:
            raise ValueError(f"unsupported embedding version {version}")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n * 2 * n:
        raise ValueError(f"expected {2 * n * n} values, found {data.size}")
    return float(lam), data.reshape(n, 2 * n).astype(np.float64)
