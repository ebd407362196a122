"""Log-spaced radial grids and finite-difference helpers.

All grids used by the solvers are geometric (uniform in s = ln r), which keeps
fourth-order stencils accurate for power-law-decaying profiles and makes
trapezoid quadrature in s exactly shift-invariant under rescaling r -> delta r.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["RadialGrid", "log_derivatives", "radial_derivatives", "channel_laplacian", "trapz_log"]

# Solver-facing grids must start at or inside the Taylor-series radius and
# reach at least into the far field.
MAX_R_START = 1e-3
MIN_R_MAX = 50.0


@dataclass(frozen=True)
class RadialGrid:
    """Strictly increasing radial nodes with r[0] > 0."""

    r: np.ndarray
    _s: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if r.ndim != 1 or r.size < 8:
            raise ValueError("grid needs a 1-d array of at least 8 nodes")
        if r[0] <= 0.0 or np.any(np.diff(r) <= 0.0):
            raise ValueError("grid nodes must be strictly increasing and positive")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "_s", np.log(r))

    @classmethod
    def log_spaced(cls, r_start: float = 1e-3, r_max: float = 50.0, per_decade: int = 400) -> "RadialGrid":
        """Geometric solver grid; enforces r_start <= 1e-3 and r_max >= 50."""
        if r_start > MAX_R_START:
            raise ValueError(f"solver grids require r_start <= {MAX_R_START:g}, got {r_start:g}")
        if r_max < MIN_R_MAX:
            raise ValueError(f"solver grids require r_max >= {MIN_R_MAX:g}, got {r_max:g}")
        decades = np.log10(r_max / r_start)
        n = int(np.ceil(decades * per_decade)) + 1
        return cls(np.geomspace(r_start, r_max, n))

    @property
    def s(self) -> np.ndarray:
        """ln r at the nodes."""
        return self._s

    @property
    def r_start(self) -> float:
        return float(self.r[0])

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    @property
    def n(self) -> int:
        return self.r.size

    def log_step(self) -> float:
        """Uniform step in s; raises if the grid is not geometric."""
        ds = np.diff(self._s)
        h = float(ds.mean())
        if not np.allclose(ds, h, rtol=1e-8, atol=1e-12):
            raise ValueError("grid is not uniform in log r")
        return h

    def outer_window(self, frac: float = 0.3) -> np.ndarray:
        """Boolean mask selecting the outer `frac` of the log range."""
        s = self._s
        return s >= s[-1] - frac * (s[-1] - s[0])

    def clip(self, r_lo: float = 0.0, r_hi: float = np.inf) -> "RadialGrid":
        mask = (self.r >= r_lo) & (self.r <= r_hi)
        return RadialGrid(self.r[mask])


# Fourth-order stencils on a uniform grid (interior: centered; edges: one-sided).

_D1_EDGE = np.array(
    [
        [-25.0, 48.0, -36.0, 16.0, -3.0, 0.0],
        [-3.0, -10.0, 18.0, -6.0, 1.0, 0.0],
    ]
) / 12.0
_D2_EDGE = np.array(
    [
        [45.0, -154.0, 214.0, -156.0, 61.0, -10.0],
        [10.0, -15.0, -4.0, 14.0, -6.0, 1.0],
    ]
) / 12.0


def _uniform_derivs(f: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    f = np.asarray(f, dtype=float)
    n = f.size
    if n < 6:
        raise ValueError("need at least 6 samples for fourth-order stencils")
    d1 = np.empty_like(f)
    d2 = np.empty_like(f)
    d1[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    d2[2:-2] = (-f[:-4] + 16.0 * f[1:-3] - 30.0 * f[2:-2] + 16.0 * f[3:-1] - f[4:]) / (12.0 * h * h)
    head, tail = f[:6], f[-6:][::-1]
    for k in (0, 1):
        d1[k] = _D1_EDGE[k] @ head / h
        d1[n - 1 - k] = -(_D1_EDGE[k] @ tail) / h
        d2[k] = _D2_EDGE[k] @ head / (h * h)
        d2[n - 1 - k] = _D2_EDGE[k] @ tail / (h * h)
    return d1, d2


def log_derivatives(f: np.ndarray, grid: RadialGrid) -> tuple[np.ndarray, np.ndarray]:
    """(df/ds, d2f/ds2) with s = ln r, fourth order."""
    return _uniform_derivs(f, grid.log_step())


def radial_derivatives(f: np.ndarray, grid: RadialGrid) -> tuple[np.ndarray, np.ndarray]:
    """(f', f'') in r from log-space stencils: f' = f_s/r, f'' = (f_ss - f_s)/r^2."""
    fs, fss = log_derivatives(f, grid)
    r = grid.r
    return fs / r, (fss - fs) / (r * r)


def channel_laplacian(f: np.ndarray, grid: RadialGrid, N: int, ell: int) -> np.ndarray:
    """f'' + (N-1)/r f' - ell(ell+N-2)/r^2 f by finite differences."""
    fs, fss = log_derivatives(f, grid)
    r2 = grid.r * grid.r
    return (fss + (N - 2.0) * fs - ell * (ell + N - 2.0) * np.asarray(f)) / r2


def trapz_log(values: np.ndarray, grid: RadialGrid) -> float:
    """integral of values dr computed as integral of values * r ds."""
    return float(np.trapezoid(np.asarray(values) * grid.r, grid.s))
