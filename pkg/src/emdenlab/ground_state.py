"""Radial ground states of the critical system by shooting.

The radial profile solves

    -u'' - (N-1)/r u' = v^p,   -v'' - (N-1)/r v' = u^q,   u'(0) = v'(0) = 0,

normalized by u(0) = u0 (default 1). The shooting parameter is gamma = v(0):
for generic gamma one of the components crosses zero at finite radius, and the
two crossing types bracket the ground-state value gamma_star. Which component
crosses on which side of gamma_star is *not* assumed; it is observed at runtime
and the bisection keys off the observed dichotomy.

Integration starts from a fourth-order Taylor expansion at r_start <= 1e-3,
proceeds in r up to r = 1, and in s = ln r beyond (power-law tails become
linear in s, so reaching r ~ 1e8 for classification costs only ~18 s-units).
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from emdenlab.grids import RadialGrid, channel_laplacian, log_derivatives, trapz_log
from emdenlab.hyperbola import CriticalPair, Regime, pair_from_p

__all__ = [
    "Classification",
    "ShootingOutcome",
    "TaylorStart",
    "GroundStateProfile",
    "DecayFit",
    "ScalarReduction",
    "IntegrationError",
    "CacheCorruptionError",
    "DecayFitError",
    "series_start",
    "integrate_radial",
    "shoot_bisection",
    "rescale_profile",
    "fit_decay",
    "sobolev_quotient",
    "check_scalar_reduction",
    "ode_residual",
    "validate_profile",
    "save_profile",
    "load_profile",
]

# Classification integrations may extend this far before a non-crossing gamma
# is declared indistinguishable from gamma_star.
_CLASSIFY_R_CAP = 1e8


class IntegrationError(RuntimeError):
    """Integrator step-size underflow (stiffness); carries the last radius."""

    def __init__(self, message: str, r_last: float):
        super().__init__(f"{message} (last radius r = {r_last:.6g})")
        self.r_last = r_last


class CacheCorruptionError(RuntimeError):
    """A persisted profile failed revalidation on load."""


class DecayFitError(ValueError):
    """Decay-law fit residual too large; r_max is too small for the tail."""


class Classification(Enum):
    U_HIT_ZERO = "u_hit_zero"
    V_HIT_ZERO = "v_hit_zero"
    SURVIVED = "survived"


@dataclass(frozen=True)
class ShootingOutcome:
    """Result of one shot: what crossed (if anything), where, at which gamma."""

    classification: Classification
    gamma: float
    r_cross: Optional[float]
    r_reached: float


def _sgnpow(x, e: float):
    """Odd-extension power sign(x)|x|^e, smooth enough through crossings."""
    return np.sign(x) * np.abs(x) ** e


@dataclass(frozen=True)
class TaylorStart:
    """Fourth-order expansion of (u, v) at the origin.

    u = u0 + a2 r^2 + a4 r^4,  v = v0 + b2 r^2 + b4 r^4 with
    a2 = -v0^p/(2N), a4 = p v0^(p-1) u0^q / (2N(4N+8)) and symmetrically for b.
    """

    pair: CriticalPair
    u0: float
    v0: float
    r_start: float
    a2: float
    a4: float
    b2: float
    b4: float

    def eval(self, r):
        r = np.asarray(r, dtype=float)
        r2 = r * r
        u = self.u0 + self.a2 * r2 + self.a4 * r2 * r2
        v = self.v0 + self.b2 * r2 + self.b4 * r2 * r2
        du = 2.0 * self.a2 * r + 4.0 * self.a4 * r2 * r
        dv = 2.0 * self.b2 * r + 4.0 * self.b4 * r2 * r
        return np.stack([u, du, v, dv])

    @property
    def state(self) -> np.ndarray:
        """(u, u', v, v') at r_start."""
        return self.eval(self.r_start)


def series_start(pair: CriticalPair, u0: float, v0: float, r_start: float = 1e-3) -> TaylorStart:
    """Taylor coefficients matching the system at the origin through r^4."""
    if r_start <= 0.0 or r_start > 1e-3:
        raise ValueError(f"r_start must lie in (0, 1e-3], got {r_start:g}")
    if u0 <= 0.0 or v0 < 0.0:
        raise ValueError("need u0 > 0 and v0 >= 0")
    N, p, q = pair.N, pair.p, pair.q
    c4 = 2.0 * N * (4.0 * N + 8.0)
    vp1 = v0 ** (p - 1.0) if v0 > 0.0 else (1.0 if p == 1.0 else 0.0 if p > 1.0 else math.inf)
    uq1 = u0 ** (q - 1.0)
    a2 = -(v0**p) / (2.0 * N)
    b2 = -(u0**q) / (2.0 * N)
    a4 = p * vp1 * u0**q / c4
    b4 = q * uq1 * v0**p / c4
    if not all(map(math.isfinite, (a2, a4, b2, b4))):
        raise ValueError("Taylor coefficients are not finite for these (u0, v0, p, q)")
    return TaylorStart(pair=pair, u0=u0, v0=v0, r_start=r_start, a2=a2, a4=a4, b2=b2, b4=b4)


class _RadialShot:
    """One integrated trajectory with piecewise dense evaluation."""

    def __init__(self, taylor: TaylorStart, sol_r, sol_s, r_switch: float, outcome: ShootingOutcome):
        self.taylor = taylor
        self.sol_r = sol_r
        self.sol_s = sol_s
        self.r_switch = r_switch
        self.outcome = outcome

    def eval(self, r) -> np.ndarray:
        """(u, u', v, v') at radii r (must not exceed the reached radius)."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r > self.outcome.r_reached * (1.0 + 1e-12)):
            raise ValueError("evaluation beyond the integrated radius")
        out = np.empty((4, r.size))
        lo = r < self.taylor.r_start
        mid = (~lo) & (r <= self.r_switch)
        hi = r > self.r_switch
        if lo.any():
            out[:, lo] = self.taylor.eval(r[lo])
        if mid.any():
            if self.sol_r is None:
                raise ValueError("dense output not stored for this shot")
            out[:, mid] = self.sol_r.sol(r[mid])
        if hi.any():
            if self.sol_s is None:
                raise ValueError("dense output not stored for this shot")
            z = self.sol_s.sol(np.log(r[hi]))
            out[0, hi] = z[0]
            out[1, hi] = z[1] / r[hi]
            out[2, hi] = z[2]
            out[3, hi] = z[3] / r[hi]
        return out


def _event_pair():
    def ev_u(t, y):
        return y[0]

    def ev_v(t, y):
        return y[2]

    for ev in (ev_u, ev_v):
        ev.terminal = True
        ev.direction = -1.0
    return [ev_u, ev_v]


def integrate_radial(
    pair: CriticalPair,
    u0: float,
    gamma: float,
    r_max: float,
    rtol: float = 1e-12,
    r_start: float = 1e-3,
    dense: bool = True,
    atol: float = 0.0,
) -> _RadialShot:
    """Integrate one shot to r_max or the first zero crossing.

    Error control is purely relative by default (atol = 0): both components
    stay positive and power-law sized until a transversal crossing, where the
    max(|y|, |y_new|) scaling keeps the controller finite.
    """
    if r_max <= r_start:
        raise ValueError("r_max must exceed r_start")
    N, p, q = pair.N, pair.p, pair.q
    taylor = series_start(pair, u0, gamma, r_start)

    def rhs_r(r, y):
        u, du, v, dv = y
        return (du, -(N - 1.0) / r * du - _sgnpow(v, p), dv, -(N - 1.0) / r * dv - _sgnpow(u, q))

    r_switch = min(1.0, r_max)
    sol_r = solve_ivp(
        rhs_r,
        (r_start, r_switch),
        taylor.state,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        dense_output=dense,
        events=_event_pair(),
    )
    if sol_r.status == -1:
        raise IntegrationError(sol_r.message, float(sol_r.t[-1]))
    if sol_r.status == 1:  # crossing inside [r_start, 1]
        hits = [(te[0], k) for k, te in enumerate(sol_r.t_events) if te.size]
        t_cross, which = min(hits)
        cls = Classification.U_HIT_ZERO if which == 0 else Classification.V_HIT_ZERO
        outcome = ShootingOutcome(cls, gamma, float(t_cross), float(t_cross))
        return _RadialShot(taylor, sol_r if dense else None, None, r_switch, outcome)
    if r_max <= 1.0:
        outcome = ShootingOutcome(Classification.SURVIVED, gamma, None, r_max)
        return _RadialShot(taylor, sol_r if dense else None, None, r_switch, outcome)

    y1 = sol_r.y[:, -1]
    z0 = (y1[0], y1[1] * r_switch, y1[2], y1[3] * r_switch)  # u, u_s, v, v_s at s=ln(r_switch)=0

    def rhs_s(s, z):
        u, us, v, vs = z
        e2s = math.exp(2.0 * s)
        return (us, -(N - 2.0) * us - e2s * _sgnpow(v, p), vs, -(N - 2.0) * vs - e2s * _sgnpow(u, q))

    sol_s = solve_ivp(
        rhs_s,
        (0.0, math.log(r_max)),
        z0,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        dense_output=dense,
        events=_event_pair(),
    )
    if sol_s.status == -1:
        raise IntegrationError(sol_s.message, math.exp(float(sol_s.t[-1])))
    if sol_s.status == 1:
        hits = [(te[0], k) for k, te in enumerate(sol_s.t_events) if te.size]
        s_cross, which = min(hits)
        cls = Classification.U_HIT_ZERO if which == 0 else Classification.V_HIT_ZERO
        r_cross = math.exp(float(s_cross))
        outcome = ShootingOutcome(cls, gamma, r_cross, r_cross)
    else:
        outcome = ShootingOutcome(Classification.SURVIVED, gamma, None, r_max)
    return _RadialShot(taylor, sol_r if dense else None, sol_s if dense else None, r_switch, outcome)


@dataclass
class GroundStateProfile:
    """A positive decaying radial solution sampled on a grid.

    Arrays are node values; `eval` uses the solver's dense output when the
    profile came straight from the integrator, and a log-space cubic spline
    when it was loaded from disk or synthesized.
    """

    pair: CriticalPair
    grid: RadialGrid
    gamma_star: float
    u0: float
    u: np.ndarray
    du: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    rtol: float = 1e-12
    evaluator: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False, compare=False)

    def eval(self, r) -> np.ndarray:
        """(u, u', v, v') at arbitrary radii within the integrated range."""
        if self.evaluator is None:
            self.evaluator = self._spline_evaluator()
        return self.evaluator(np.atleast_1d(np.asarray(r, dtype=float)))

    def _spline_evaluator(self):
        from scipy.interpolate import CubicSpline

        s = self.grid.s
        splines = [CubicSpline(s, comp) for comp in (self.u, self.du, self.v, self.dv)]

        def ev(r):
            x = np.log(np.clip(r, self.grid.r_start, self.grid.r_max))
            return np.stack([sp(x) for sp in splines])

        return ev

    @property
    def r_max(self) -> float:
        return self.grid.r_max


def validate_profile(profile: GroundStateProfile, residual_tol: float = 1e-6) -> float:
    """Positivity/monotonicity and FD residual check; returns the residual."""
    if np.any(profile.u <= 0.0) or np.any(profile.v <= 0.0):
        raise ValueError("profile components must be strictly positive")
    if np.any(profile.du >= 0.0) or np.any(profile.dv >= 0.0):
        raise ValueError("profile components must be strictly decreasing for r > 0")
    res = ode_residual(profile)
    if res > residual_tol:
        raise CacheCorruptionError(f"ODE residual {res:.3e} exceeds {residual_tol:.1e}")
    return res


def ode_residual(profile: GroundStateProfile) -> float:
    """Max relative residual of both equations under a 4th-order FD check.

    Works in s = ln r where the system reads f_ss + (N-2) f_s + r^2 * source,
    normalized pointwise by |f| + r^2|source|.
    """
    g = profile.grid
    N, p, q = profile.pair.N, profile.pair.p, profile.pair.q
    r2 = g.r * g.r
    inner = slice(2, -2)
    worst = 0.0
    for f, src in ((profile.u, profile.v**p), (profile.v, profile.u**q)):
        fs, fss = log_derivatives(f, g)
        res = fss + (N - 2.0) * fs + r2 * src
        scale = np.abs(f) + r2 * np.abs(src)
        worst = max(worst, float(np.max(np.abs(res[inner]) / scale[inner])))
    return worst


def _profile_from_shot(pair, grid, gamma, u0, shot: _RadialShot, rtol) -> GroundStateProfile:
    vals = shot.eval(grid.r)
    return GroundStateProfile(
        pair=pair,
        grid=grid,
        gamma_star=gamma,
        u0=u0,
        u=vals[0],
        du=vals[1],
        v=vals[2],
        dv=vals[3],
        rtol=rtol,
        evaluator=shot.eval,
    )


def shoot_bisection(
    pair: CriticalPair,
    u0: float = 1.0,
    bracket: tuple = (0.5, 2.0),
    grid: Optional[RadialGrid] = None,
    rel_tol: float = 1e-12,
    rtol: float = 1e-12,
    classify_rtol: float = 1e-10,
    auto_expand: bool = False,
) -> tuple[float, GroundStateProfile]:
    """Bisect gamma = v(0) between the two crossing classes.

    The bracket endpoints must classify differently (one component crossing
    for one endpoint, the other component for the other); with auto_expand the
    bracket is widened geometrically until they do. A shot that survives the
    current classification radius has that radius grown (up to 1e8) before
    being declared converged.
    """
    grid = grid or RadialGrid.log_spaced()
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (0.0 < lo < hi) or not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError(f"bracket must satisfy 0 < lo < hi, got {bracket!r}")

    r_classify = max(4.0 * grid.r_max, 400.0)

    def classify(gamma: float) -> ShootingOutcome:
        nonlocal r_classify
        while True:
            shot = integrate_radial(pair, u0, gamma, r_classify, rtol=classify_rtol, r_start=grid.r_start, dense=False)
            if shot.outcome.classification is not Classification.SURVIVED or r_classify >= _CLASSIFY_R_CAP:
                return shot.outcome
            r_classify = min(10.0 * r_classify, _CLASSIFY_R_CAP)

    out_lo, out_hi = classify(lo), classify(hi)
    if Classification.SURVIVED in (out_lo.classification, out_hi.classification):
        raise ValueError(
            "a bracket endpoint survives to r = 1e8 and is numerically indistinguishable "
            "from gamma_star; perturb or widen the bracket"
        )

    if out_lo.classification is out_hi.classification:
        if not auto_expand:
            raise ValueError(
                f"both bracket endpoints classify as {out_lo.classification.value}; "
                "widen the bracket (or pass auto_expand=True)"
            )
        for _ in range(64):
            lo /= 1.6
            hi *= 1.6
            out_lo, out_hi = classify(lo), classify(hi)
            if out_lo.classification is not out_hi.classification:
                break
        else:
            raise ValueError("auto-expansion failed to find a dichotomy bracket")

    for _ in range(300):
        if hi - lo <= rel_tol * max(abs(lo), abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        out_mid = classify(mid)
        if out_mid.classification is Classification.SURVIVED:
            # Survived to the cap: mid is gamma_star to far better than rel_tol.
            lo = hi = mid
            break
        if out_mid.classification is out_lo.classification:
            lo = mid
        else:
            hi = mid
    else:
        raise RuntimeError("bisection failed to converge")

    gamma_star = 0.5 * (lo + hi)
    final = integrate_radial(pair, u0, gamma_star, grid.r_max, rtol=rtol, r_start=grid.r_start, dense=True)
    if final.outcome.classification is not Classification.SURVIVED:
        raise RuntimeError(
            f"converged gamma still crosses at r = {final.outcome.r_cross:.4g} < r_max; "
            "reduce r_max or tighten rel_tol"
        )
    profile = _profile_from_shot(pair, grid, gamma_star, u0, final, rtol)
    validate_profile(profile)
    return gamma_star, profile


def rescale_profile(profile: GroundStateProfile, delta: float) -> GroundStateProfile:
    """Apply the scaling symmetry (delta^alpha u(delta r), delta^beta v(delta r)).

    Nodes whose image delta*r falls beyond the integrated range are dropped
    (for delta > 1); radii below r_start are served by the origin series or
    spline clamp of the source profile.
    """
    if not (delta > 0.0 and math.isfinite(delta)):
        raise ValueError(f"delta must be positive and finite, got {delta!r}")
    alpha, beta = profile.pair.alpha, profile.pair.beta
    r_keep = profile.grid.r[profile.grid.r * delta <= profile.grid.r_max * (1.0 + 1e-12)]
    if r_keep.size < 8:
        raise ValueError("rescaled grid would retain fewer than 8 nodes")
    grid = RadialGrid(r_keep)
    sa, sa1 = delta**alpha, delta ** (alpha + 1.0)
    sb, sb1 = delta**beta, delta ** (beta + 1.0)
    scale = np.array([sa, sa1, sb, sb1])[:, None]

    src_eval = profile.eval

    def ev(r):
        return scale * src_eval(np.asarray(r) * delta)

    vals = ev(grid.r)
    return GroundStateProfile(
        pair=profile.pair,
        grid=grid,
        gamma_star=sb * profile.gamma_star,
        u0=sa * profile.u0,
        u=vals[0],
        du=vals[1],
        v=vals[2],
        dv=vals[3],
        rtol=profile.rtol,
        evaluator=ev,
    )


@dataclass(frozen=True)
class DecayFit:
    """Far-field power-law fits (canonical orientation q >= p).

    u_exponent / a_p describe the component governed by the weak law
    (r^-(p(N-2)-2) sub-Serrin, r^-(N-2) log r at threshold, r^-(N-2) above);
    v_exponent / b_p the component with the clean r^-(N-2) tail.
    """

    u_exponent: float
    v_exponent: float
    a_p: float
    b_p: float
    log_flag: bool
    u_law_exponent: float
    v_law_exponent: float
    drift: float
    swapped: bool
    window: tuple
    max_log_residual: float


def fit_decay(profile: GroundStateProfile, window_frac: float = 0.3, residual_tol: float = 0.2) -> DecayFit:
    """Least-squares log-log fits over the outer `window_frac` of the grid."""
    cpair, swapped = profile.pair.canonical()
    N, p = cpair.N, cpair.p
    g = profile.grid
    if g.r_max < 50.0:
        raise ValueError("decay fits need r_max >= 50")
    weak = profile.u if not swapped else profile.v
    strong = profile.v if not swapped else profile.u
    mask = g.outer_window(window_frac)
    if mask.sum() < 20:
        raise ValueError("outer window has too few nodes for a fit")
    s, r = g.s[mask], g.r[mask]
    wk, st = weak[mask], strong[mask]
    logcase = cpair.regime is Regime.LOG_CASE

    def linfit(y):
        coef = np.polyfit(s, y, 1)
        resid = float(np.max(np.abs(np.polyval(coef, s) - y)))
        return float(coef[0]), resid

    slope_v, res_v = linfit(np.log(st))
    v_exponent = -slope_v
    b_p = float(np.mean(st * r ** (N - 2.0)))

    u_law = (N - 2.0) if not (cpair.regime is Regime.SUB_SERRIN) else p * (N - 2.0) - 2.0
    if logcase:
        slope_u, res_u = linfit(np.log(wk) - np.log(np.log(r)))
        a_p = float(np.mean(wk * r ** (N - 2.0) / np.log(r)))
    else:
        slope_u, res_u = linfit(np.log(wk))
        a_p = float(np.mean(wk * r**u_law))
    u_exponent = -slope_u

    # Drift of the compensated amplitude over the last decade.
    i_hi = g.n - 1
    i_lo = int(np.argmin(np.abs(g.r - g.r_max / 10.0)))

    def compensated(i):
        c = weak[i] * g.r[i] ** u_law
        return c / math.log(g.r[i]) if logcase else c

    drift = abs(compensated(i_hi) - compensated(i_lo)) / abs(compensated(i_hi))

    worst = max(res_u, res_v)
    if worst > residual_tol:
        raise DecayFitError(f"log-log fit residual {worst:.3g} exceeds {residual_tol:g}; increase r_max")
    return DecayFit(
        u_exponent=u_exponent,
        v_exponent=v_exponent,
        a_p=a_p,
        b_p=b_p,
        log_flag=logcase,
        u_law_exponent=u_law,
        v_law_exponent=N - 2.0,
        drift=float(drift),
        swapped=swapped,
        window=(float(r[0]), float(r[-1])),
        max_log_residual=worst,
    )


def _integral_with_ends(values: np.ndarray, grid: RadialGrid) -> float:
    """Trapezoid of f(r) r^{N-1}-type integrands plus analytic end continuation.

    `values` is the full integrand including the r^{N-1} weight. In s = ln r
    the summand g = values*r behaves like a growing exponential at the head
    and a decaying one at the tail; both ends are continued by their locally
    fitted exponentials (exact for pure power laws), so the estimate covers
    (0, infinity) rather than [r_start, r_max].
    """
    g = values * grid.r
    total = float(np.trapezoid(g, grid.s))
    h = grid.log_step()
    if g[0] > 0.0 and g[1] > g[0]:
        m = math.log(g[1] / g[0]) / h
        if m > 0.1:
            total += g[0] / m
    if g[-1] > 0.0 and g[-2] > g[-1]:
        k = math.log(g[-2] / g[-1]) / h
        if k > 0.05:
            total += g[-1] / k
        else:
            raise ValueError("integrand decays too slowly at r_max for a finite quotient")
    return total


def sobolev_quotient(obj, pair: Optional[CriticalPair] = None, grid: Optional[RadialGrid] = None) -> float:
    """Scale-invariant quotient ||Delta f||_{(p+1)/p}^... / ||f||_{q+1}^...

    For a GroundStateProfile the Laplacian is substituted from the equation
    (|Delta u| = v^p); for a raw array it is formed by finite differences.
    Both integrals are continued past the grid ends by fitted power laws.
    """
    if isinstance(obj, GroundStateProfile):
        pair, grid = obj.pair, obj.grid
        lap_abs = obj.v ** pair.p
        f = obj.u
    else:
        if pair is None or grid is None:
            raise ValueError("array input requires pair and grid")
        f = np.asarray(obj, dtype=float)
        lap_abs = np.abs(channel_laplacian(f, grid, pair.N, 0))
    N, p, q = pair.N, pair.p, pair.q
    rnm1 = grid.r ** (N - 1.0)
    num = _integral_with_ends(lap_abs ** ((p + 1.0) / p) * rnm1, grid)
    den = _integral_with_ends(np.abs(f) ** (q + 1.0) * rnm1, grid)
    if den <= 0.0:
        raise ValueError("denominator integral vanished")
    return num ** (p / (p + 1.0)) / den ** ((p + 1.0) / (p * (q + 1.0)))


@dataclass(frozen=True)
class ScalarReduction:
    """Dual-route check of -Delta((-Delta u)^(1/p)) = u^q."""

    max_residual: float
    vhat_vs_v: float
    r_seam: float


def _even_poly_fit(r: np.ndarray, f: np.ndarray, r_ref: float, n_terms: int = 6):
    """Least-squares even expansion f ~ sum c_k (r/r_ref)^{2k}."""
    x = (r / r_ref) ** 2
    basis = np.vander(x, n_terms, increasing=True)
    coef, *_ = np.linalg.lstsq(basis, f, rcond=None)
    return coef, x


def check_scalar_reduction(profile: GroundStateProfile, r_seam: float = 0.25) -> ScalarReduction:
    """Rebuild v from u alone by numerical differentiation and re-substitute.

    Forming -Delta twice from node data amplifies float noise like 1/r^2, so
    below r_seam the profile (an even function of r) is modeled by a fitted
    even polynomial whose Laplacian is taken analytically; beyond r_seam
    plain 4th-order finite differences are accurate. The residual of
    -Delta(vhat) = u^q is reported relative to max u^q.
    """
    g = profile.grid
    N, p, q = profile.pair.N, profile.pair.p, profile.pair.q
    inner = g.r <= r_seam
    n_in = int(inner.sum())
    if g.n - n_in < 16:
        raise ValueError("profile grid too short beyond r_seam for the FD route")
    source = profile.u**q
    src_max = float(np.max(source))
    resids = []
    vhat_devs = []

    if n_in >= 6 * 5:
        # Inner route: u = sum c_k rho^{2k}, rho = r/r_seam, all Laplacians exact.
        r_in = g.r[inner]
        coef, x = _even_poly_fit(r_in, profile.u[inner], r_seam)
        k = np.arange(coef.size, dtype=float)
        # -Delta maps rho^{2k} -> -2k(2k+N-2) rho^{2k-2} / r_seam^2.
        w = -(coef * 2.0 * k * (2.0 * k + N - 2.0))[1:] / r_seam**2
        polyval = np.polynomial.polynomial.polyval
        W = polyval(x, w)
        if np.any(W <= 0.0):
            raise ValueError("-Delta u is not positive on the inner region")
        jw = np.arange(1.0, w.size)
        dW = (r_in / r_seam**2) * polyval(x, 2.0 * jw * w[1:])
        lapW = polyval(x, 2.0 * jw * (2.0 * jw + N - 2.0) * w[1:]) / r_seam**2
        s_exp = 1.0 / p
        vhat_in = W**s_exp
        lap_vhat_in = s_exp * W ** (s_exp - 1.0) * lapW + s_exp * (s_exp - 1.0) * W ** (s_exp - 2.0) * dW**2
        resids.append(np.abs(lap_vhat_in + source[inner]))
        vhat_devs.append(np.abs(vhat_in - profile.v[inner]))
    else:
        inner = np.zeros(g.n, dtype=bool)

    # Outer route: one FD pass for -Delta u from stored du, one for -Delta vhat.
    og = RadialGrid(g.r[~inner])
    du_o, u_o = profile.du[~inner], profile.u[~inner]
    dus = log_derivatives(du_o, og)[0]
    minus_lap_u = -(dus / og.r + (N - 1.0) / og.r * du_o)
    if np.any(minus_lap_u <= 0.0):
        raise ValueError("-Delta u is not positive on the outer region")
    vhat_out = minus_lap_u ** (1.0 / p)
    lap_vhat_out = channel_laplacian(vhat_out, og, N, 0)
    trim = slice(3, -3)
    resids.append(np.abs(lap_vhat_out + u_o**q)[trim])
    vhat_devs.append(np.abs(vhat_out - profile.v[~inner]))

    rel = max(float(np.max(a)) for a in resids) / src_max
    dvv = max(float(np.max(a)) for a in vhat_devs) / float(np.max(profile.v))
    return ScalarReduction(max_residual=rel, vhat_vs_v=dvv, r_seam=r_seam)


# ---------------------------------------------------------------------------
# Persistence: CSV (r,u,v,du,dv) + JSON sidecar, atomic writes.


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def profile_paths(out_dir: str, pair: CriticalPair) -> tuple[str, str]:
    base = os.path.join(out_dir, f"gs_{pair.label()}")
    return base + ".csv", base + ".json"


def save_profile(profile: GroundStateProfile, csv_path: str) -> tuple[str, str]:
    """Write node data and metadata; returns (csv_path, json_path)."""
    json_path = os.path.splitext(csv_path)[0] + ".json"
    rows = ["r,u,v,du,dv"]
    for i in range(profile.grid.n):
        rows.append(
            f"{profile.grid.r[i]:.17g},{profile.u[i]:.17g},{profile.v[i]:.17g},"
            f"{profile.du[i]:.17g},{profile.dv[i]:.17g}"
        )
    _atomic_write(csv_path, "\n".join(rows) + "\n")
    pair = profile.pair
    meta = {
        "format": "gs-v1",
        "N": pair.N,
        "p": pair.p,
        "q": pair.q,
        "alpha": pair.alpha,
        "beta": pair.beta,
        "regime": pair.regime.value,
        "gamma_star": profile.gamma_star,
        "u0": profile.u0,
        "rtol": profile.rtol,
        "r_start": profile.grid.r_start,
        "r_max": profile.grid.r_max,
        "n_nodes": profile.grid.n,
    }
    _atomic_write(json_path, json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return csv_path, json_path


def load_profile(csv_path: str, validate: bool = True, residual_tol: float = 1e-5) -> GroundStateProfile:
    """Read a persisted profile; revalidates the ODE residual by default."""
    json_path = os.path.splitext(csv_path)[0] + ".json"
    with open(json_path) as fh:
        meta = json.load(fh)
    if meta.get("format") != "gs-v1":
        raise CacheCorruptionError(f"unknown profile format {meta.get('format')!r}")
    pair = pair_from_p(int(meta["N"]), float(meta["p"]))
    if abs(pair.q - float(meta["q"])) > 1e-9 * max(1.0, abs(pair.q)):
        raise CacheCorruptionError("sidecar (p, q) is off the critical hyperbola")
    cols = {"r": [], "u": [], "v": [], "du": [], "dv": []}
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if set(reader.fieldnames or ()) != set(cols):
            raise CacheCorruptionError(f"unexpected CSV columns {reader.fieldnames!r}")
        for row in reader:
            for k in cols:
                cols[k].append(float(row[k]))
    try:
        grid = RadialGrid(np.asarray(cols["r"]))
    except ValueError as exc:
        raise CacheCorruptionError(f"bad radial nodes: {exc}") from exc
    profile = GroundStateProfile(
        pair=pair,
        grid=grid,
        gamma_star=float(meta["gamma_star"]),
        u0=float(meta["u0"]),
        u=np.asarray(cols["u"]),
        du=np.asarray(cols["du"]),
        v=np.asarray(cols["v"]),
        dv=np.asarray(cols["dv"]),
        rtol=float(meta.get("rtol", 1e-12)),
    )
    if validate:
        try:
            validate_profile(profile, residual_tol=residual_tol)
        except (ValueError, CacheCorruptionError) as exc:
            raise CacheCorruptionError(f"profile failed revalidation: {exc}") from exc
    return profile
