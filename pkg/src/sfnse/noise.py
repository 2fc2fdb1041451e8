"""Truncated Q-Wiener noise on the grid.

The driving noise is the truncated expansion W(t, x) = sum_l a_l phi_l(x) b_l(t)
with independent scalar Brownian motions b_l.  Increment tables are drawn from
a counter-based generator (Philox) so that entry (step, mode) is addressable
without generating predecessors, which lets coarse and fine paths of a
refinement study share their underlying randomness and lets independent paths
be sampled concurrently with no sequential generator state.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import DivisibilityError, DomainError, IoError, ShapeError
from .spectral import GridSpec

_MASK64 = (1 << 64) - 1
_PATH_HEADER = struct.Struct("<4sIQQQd")  # magic, version, seed, K, steps, dt
_PATH_MAGIC = b"SFNW"
_PATH_VERSION = 1


@dataclass(frozen=True)
class NoiseModel:
    """Spatial side of the noise: K mode profiles sampled at the grid nodes.

    ``mode_profiles`` has shape (K, N); ``f_phi`` is the pointwise sum of
    squared profiles (the Ito correction field, kept for diagnostics only;
    both schemes consume Stratonovich increments directly).  ``epsilon``
    scales whole noise fields at evaluation time and is never baked into
    increment tables.
    """

    K: int
    epsilon: float
    mode_profiles: np.ndarray
    f_phi: np.ndarray


@dataclass(frozen=True)
class WienerPath:
    """Realized table of Brownian increments, steps rows by K modes.

    Each entry is Normal(0, dt).  Regenerating with the same seed reproduces
    the table bit for bit.  ``level`` tags the refinement level for
    coarse/fine bookkeeping in convergence studies.
    """

    seed: int
    dt: float
    steps: int
    increments: np.ndarray
    level: int = 0


def build_noise_model(K: int, grid: GridSpec, epsilon: float = 0.0, profile="sin") -> NoiseModel:
    """Sample the noise mode profiles at the grid nodes.

    ``profile`` is either the string "sin" for the built-in family
    (1/l) * sin(pi * l * x), l = 1..K, sampled at the absolute coordinates of
    the grid nodes, or an array of K user-supplied rows of length N.
    """
    K = int(K)
    if K < 1:
        raise DomainError(f"noise needs K >= 1 modes, got {K}")
    epsilon = float(epsilon)
    if epsilon < 0.0:
        raise DomainError(f"noise amplitude epsilon must be >= 0, got {epsilon}")
    if isinstance(profile, str):
        if profile != "sin":
            raise DomainError(f"unknown built-in profile {profile!r}")
        x = grid.nodes()
        l = np.arange(1, K + 1, dtype=np.float64)[:, None]
        profiles = np.sin(np.pi * l * x[None, :]) / l
    else:
        profiles = np.array(profile, dtype=np.float64)
        if profiles.shape != (K, grid.N):
            raise DomainError(
                f"profile array must have shape ({K}, {grid.N}), got {profiles.shape}"
            )
    if not np.all(np.isfinite(profiles)):
        raise DomainError("noise profiles contain non-finite values")
    f_phi = np.sum(profiles**2, axis=0)
    profiles.setflags(write=False)
    f_phi.setflags(write=False)
    return NoiseModel(K, epsilon, profiles, f_phi)


def _philox(seed: int, counter: int = 0) -> np.random.Philox:
    seed = int(seed)
    if seed < 0:
        raise DomainError(f"seed must be a non-negative 64-bit integer, got {seed}")
    key = np.array([seed & _MASK64, 0], dtype=np.uint64)
    return np.random.Philox(key=key, counter=[counter, 0, 0, 0])


def _normal_from_raw(raw):
    # one raw 64-bit word -> uniform in (0, 1) -> exact inverse normal CDF;
    # fixed consumption keeps the (step, mode) -> counter map invertible
    u = (raw >> np.uint64(11)) * 2.0**-53 + 2.0**-54
    return ndtri(u)


def sample_wiener_path(
    model: NoiseModel, steps: int, dt: float, seed: int, level: int = 0
) -> WienerPath:
    """Draw the (steps x K) increment table, entries i.i.d. Normal(0, dt).

    Entry (n, l) is a pure function of (seed, n, l): it sits at position
    n*K + l of the keyed Philox raw stream, so any entry can be regenerated
    in isolation (see ``increment_entry``).
    """
    steps = int(steps)
    if steps < 1:
        raise DomainError(f"path needs steps >= 1, got {steps}")
    dt = float(dt)
    if dt <= 0.0:
        raise DomainError(f"path needs dt > 0, got {dt}")
    raw = _philox(seed).random_raw(steps * model.K)
    z = _normal_from_raw(np.asarray(raw, dtype=np.uint64))
    inc = (math.sqrt(dt) * z).reshape(steps, model.K)
    inc.setflags(write=False)
    return WienerPath(int(seed), dt, steps, inc, int(level))


def increment_entry(seed: int, step: int, mode: int, K: int, dt: float) -> float:
    """Entry (step, mode) of the increment table, without its predecessors.

    Philox emits 4 raw words per counter block, so position i = step*K + mode
    lives at word i % 4 of block i // 4.
    """
    i = int(step) * int(K) + int(mode)
    raw = _philox(seed, counter=i // 4).random_raw(i % 4 + 1)[-1]
    return math.sqrt(dt) * float(_normal_from_raw(np.uint64(raw)))


def coarsen_path(path: WienerPath, factor: int) -> WienerPath:
    """Merge consecutive increments: coarse row n = sum of fine rows n*factor..(n+1)*factor-1.

    Power-of-two factors are reduced by repeated pairwise halving so that
    coarsen(coarsen(p, 2), 2) and coarsen(p, 4) agree bit for bit; any odd
    remainder is folded left to right.  dt is multiplied by the factor and
    the refinement level decremented.
    """
    factor = int(factor)
    if factor < 1:
        raise DomainError(f"coarsening factor must be >= 1, got {factor}")
    if factor == 1:
        return path
    if path.steps % factor != 0:
        raise DivisibilityError(f"factor {factor} does not divide steps {path.steps}")
    inc = path.increments
    remaining = factor
    while remaining % 2 == 0:
        inc = inc[0::2] + inc[1::2]
        remaining //= 2
    if remaining > 1:
        blocks = inc.reshape(inc.shape[0] // remaining, remaining, path.increments.shape[1])
        acc = blocks[:, 0].copy()
        for t in range(1, remaining):
            acc += blocks[:, t]
        inc = acc
    inc = np.ascontiguousarray(inc)
    inc.setflags(write=False)
    return WienerPath(path.seed, path.dt * factor, path.steps // factor, inc, path.level - 1)


def increment_field(path: WienerPath, n: int, model: NoiseModel, grid: GridSpec) -> np.ndarray:
    """Spatial noise increment over step n: epsilon * sum_l profile_l(x) * db_l[n]."""
    if not 0 <= n < path.steps:
        raise IndexError(f"step index {n} outside 0..{path.steps - 1}")
    if path.increments.shape[1] != model.K:
        raise ShapeError(
            f"path carries {path.increments.shape[1]} modes, model has K={model.K}"
        )
    if model.mode_profiles.shape[1] != grid.N:
        raise ShapeError(
            f"noise model sampled at N={model.mode_profiles.shape[1]}, grid has N={grid.N}"
        )
    return model.epsilon * (path.increments[n] @ model.mode_profiles)


def dump_path(path: WienerPath, destination) -> None:
    """Write the path as a flat binary file; round-trips bit-exactly."""
    K = path.increments.shape[1]
    header = _PATH_HEADER.pack(
        _PATH_MAGIC, _PATH_VERSION, path.seed & _MASK64, K, path.steps, path.dt
    )
    try:
        with open(destination, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(path.increments, dtype="<f8").tobytes())
    except OSError as exc:
        raise IoError(destination, str(exc)) from exc


def load_path(source) -> WienerPath:
    """Read a path written by ``dump_path``."""
    try:
        with open(source, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoError(source, str(exc)) from exc
    if len(blob) < _PATH_HEADER.size:
        raise IoError(source, "truncated path file header")
    magic, version, seed, K, steps, dt = _PATH_HEADER.unpack_from(blob)
    if magic != _PATH_MAGIC:
        raise IoError(source, f"bad magic {magic!r}")
    if version != _PATH_VERSION:
        raise IoError(source, f"unsupported path file version {version}")
    expected = _PATH_HEADER.size + steps * K * 8
    if len(blob) != expected:
        raise IoError(source, f"expected {expected} bytes, found {len(blob)}")
    inc = np.frombuffer(blob, dtype="<f8", offset=_PATH_HEADER.size).reshape(steps, K).copy()
    inc.setflags(write=False)
    return WienerPath(int(seed), float(dt), int(steps), inc, 0)
