"""Linearized radial channels around a ground state.

Perturbing the ground-state pair in a fixed spherical-harmonic sector gives a
coupled pair of radial functions (psi, phi) solving

    -psi'' - (N-1)/r psi' + ell(ell+N-2)/r^2 psi = p v^{p-1} phi,
    -phi'' - (N-1)/r phi' + ell(ell+N-2)/r^2 phi = q u^{q-1} psi.

Every channel is reduced to the ell = 0 form in 2*ell extra effective
dimensions: w = r^{-ell} psi and z = r^{-ell} phi satisfy

    w'' + (Neff-1)/r w' + p v^{p-1} z = 0,      Neff = N + 2*ell,
    z'' + (Neff-1)/r z' + q u^{q-1} w = 0,

with finite limits (a, b) at the origin.  The reduced unknowns stay bounded,
so regular solutions can be integrated without tracking an r^ell envelope.

Far out both potentials decay and each component approaches a combination of
the free modes 1 and r^{-(Neff-2)} plus small coupling responses.  Membership
of the perturbation in the natural decaying class is equivalent to the
vanishing of the two constant-mode coefficients (A_psi, A_phi); the channel
kernel is detected from the singular values of the 2x2 matrix mapping origin
data (a, b) to those growth coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .grids import RadialGrid, log_derivatives
from .hyperbola import CriticalPair, Regime
from .ground_state import (
    DecayFitError,
    GroundStateProfile,
    IntegrationError,
)

__all__ = [
    "ChannelSolution",
    "ConnectionMatrix",
    "MonotonicityReport",
    "LinearizedDecay",
    "ShootingNullity",
    "known_generators",
    "integrate_linearized",
    "extract_connection",
    "channel_residual",
    "kernel_nullity_shooting",
    "monotonicity_check",
    "verify_linearized_decay",
]

#: Singular values below this fraction of the largest count as zero when the
#: growth matrix is rank-tested.
NULLITY_THRESHOLD = 1e-6

#: Collocation radii for far-field extraction, as fractions of r_max.
R1_FRACTION = 0.8

#: Value/derivative extraction disagreement (relative to the local mode
#: scale) beyond which the far field is considered unresolved.
MISMATCH_TOL = 1e-2


# ---------------------------------------------------------------------------
# containers


@dataclass(frozen=True)
class ChannelSolution:
    """One regular solution of the channel-``ell`` linearized system.

    ``psi``/``phi`` are node values on ``grid``; ``start_coeffs = (a, b)``
    are the limits of ``r^-ell psi`` and ``r^-ell phi`` at the origin.
    ``growth`` and ``decayc`` hold the far-field coefficients of ``r^ell``
    and ``r^-(ell+N-2)`` for each component once extracted.
    """

    ell: int
    start_coeffs: tuple[float, float]
    grid: RadialGrid
    psi: np.ndarray
    phi: np.ndarray
    dpsi: np.ndarray
    dphi: np.ndarray
    profile: GroundStateProfile = field(repr=False)
    growth: Optional[tuple[float, float]] = None
    decayc: Optional[tuple[float, float]] = None
    extraction_mismatch: Optional[float] = None
    evaluator: Optional[Callable[[np.ndarray], np.ndarray]] = field(
        default=None, repr=False, compare=False
    )


@dataclass(frozen=True)
class ConnectionMatrix:
    """Growth coefficients of the two basis runs, column per start."""

    ell: int
    entries: np.ndarray  # 2x2; column j = (A_psi, A_phi) for start e_j
    singular_values: tuple[float, float]


@dataclass(frozen=True)
class ShootingNullity:
    """Kernel dimension of one channel plus the evidence behind it."""

    ell: int
    nullity: int
    matrix: ConnectionMatrix
    null_direction: Optional[tuple[float, float]]
    kernel: Optional[ChannelSolution]


@dataclass(frozen=True)
class MonotonicityReport:
    """Sign pattern of a channel solution with vanishing first start datum.

    All signs refer to the orientation that makes ``r^-ell psi`` positive
    near the origin.
    """

    ell: int
    is_strictly_monotone: bool
    increasing: bool
    orientation: float
    max_relative_violation: float
    psi_slope_positive: bool
    phi_slope_negative: bool


@dataclass(frozen=True)
class LinearizedDecay:
    """Fitted far-field exponents of a kernel element vs. the decay bound."""

    psi_exponent: float
    phi_exponent: float
    psi_bound: float
    phi_bound: float
    eta: float
    log_corrected: bool
    bound_satisfied: bool


# ---------------------------------------------------------------------------
# regular solutions


def _reduced_start(
    profile: GroundStateProfile, ell: int, a: float, b: float, r0: float
) -> tuple[np.ndarray, float, float]:
    """Second-order series state (w, w', z, z') at ``r0``."""
    pair = profile.pair
    neff = pair.N + 2 * ell
    u0, v0 = profile.u0, profile.gamma_star
    a2 = -pair.p * v0 ** (pair.p - 1.0) * b / (2.0 * neff)
    b2 = -pair.q * u0 ** (pair.q - 1.0) * a / (2.0 * neff)
    state = np.array(
        [a + a2 * r0 * r0, 2.0 * a2 * r0, b + b2 * r0 * r0, 2.0 * b2 * r0]
    )
    return state, a2, b2


class _ChannelShot:
    """Piecewise dense evaluator for one reduced-channel integration.

    ``eval`` returns the physical stack (psi, psi', phi, phi') obtained by
    re-attaching the r^ell envelope to the reduced dense output.
    """

    def __init__(self, start_eval, sol_r, sol_s, r_start: float, ell: int):
        self._start_eval = start_eval
        self._sol_r = sol_r
        self._sol_s = sol_s
        self._r_start = r_start
        self._ell = ell

    def eval(self, r: np.ndarray) -> np.ndarray:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty((4, r.size))
        lo = r < self._r_start
        mid = (~lo) & (r <= 1.0)
        hi = r > 1.0
        if lo.any():
            out[:, lo] = self._start_eval(r[lo])
        if mid.any():
            out[:, mid] = self._sol_r.sol(r[mid])
        if hi.any():
            y = self._sol_s.sol(np.log(r[hi]))
            out[0, hi] = y[0]
            out[1, hi] = y[1] / r[hi]
            out[2, hi] = y[2]
            out[3, hi] = y[3] / r[hi]
        ell = self._ell
        if ell:
            rl = r**ell
            w, dw, z, dz = out
            out = np.stack(
                [
                    rl * w,
                    rl * (dw + ell * w / r),
                    rl * z,
                    rl * (dz + ell * z / r),
                ]
            )
        return out


def integrate_linearized(
    profile: GroundStateProfile,
    ell: int,
    start: tuple[float, float],
    *,
    rtol: float = 1e-12,
    atol: Optional[float] = None,
    extract: bool = True,
) -> ChannelSolution:
    """Integrate the regular channel solution with origin data ``start``.

    The solution behaves like ``psi ~ a r^ell``, ``phi ~ b r^ell`` near the
    origin (second-order series start at the first grid node).  Far-field
    coefficients are filled by :func:`extract_connection` unless ``extract``
    is false.

    ``atol`` defaults to a small multiple of the start scale: components of
    a linear solution may vanish or sit many orders below their sibling, so
    purely relative error control would stall the integrator.
    """
    if ell < 0 or int(ell) != ell:
        raise ValueError(f"channel index must be a non-negative integer, got {ell!r}")
    a, b = float(start[0]), float(start[1])
    if a == 0.0 and b == 0.0:
        raise ValueError("origin data (a, b) must not both vanish")
    for name, val in (("a", a), ("b", b)):
        if not math.isfinite(val):
            raise ValueError(f"origin datum {name} must be finite, got {val!r}")

    ell = int(ell)
    pair = profile.pair
    neff = pair.N + 2 * ell
    grid = profile.grid
    r0 = grid.r_start
    if atol is None:
        atol = 1e-15 * (abs(a) + abs(b))
    y0, a2, b2 = _reduced_start(profile, ell, a, b, r0)

    def coupling(r: float) -> tuple[float, float]:
        u, _, v, _ = profile.eval(r)[:, 0]
        return pair.p * v ** (pair.p - 1.0), pair.q * u ** (pair.q - 1.0)

    def rhs_r(r, y):
        w, dw, z, dz = y
        pv, qu = coupling(r)
        drag = (neff - 1.0) / r
        return (dw, -drag * dw - pv * z, dz, -drag * dz - qu * w)

    sol_r = solve_ivp(
        rhs_r, (r0, 1.0), y0, method="DOP853", rtol=rtol, atol=atol, dense_output=True
    )
    if sol_r.status != 0:
        raise IntegrationError(
            f"inner channel integration stopped at r={sol_r.t[-1]:.3e}", sol_r.t[-1]
        )

    w1, dw1, z1, dz1 = sol_r.y[:, -1]
    y1 = np.array([w1, dw1, z1, dz1])  # at r = 1, where r*w' = w'

    def rhs_s(s, y):
        w, ws, z, zs = y
        r = math.exp(s)
        pv, qu = coupling(r)
        r2 = r * r
        return (ws, -(neff - 2.0) * ws - r2 * pv * z, zs, -(neff - 2.0) * zs - r2 * qu * w)

    sol_s = solve_ivp(
        rhs_s,
        (0.0, math.log(grid.r_max)),
        y1,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        dense_output=True,
    )
    if sol_s.status != 0:
        raise IntegrationError(
            f"outer channel integration stopped at s={sol_s.t[-1]:.3e}",
            math.exp(sol_s.t[-1]),
        )

    def start_eval(r: np.ndarray) -> np.ndarray:
        return np.stack(
            [a + a2 * r * r, 2.0 * a2 * r, b + b2 * r * r, 2.0 * b2 * r]
        )

    shot = _ChannelShot(start_eval, sol_r, sol_s, r0, ell)
    psi, dpsi, phi, dphi = shot.eval(grid.r)
    sol = ChannelSolution(
        ell=ell,
        start_coeffs=(a, b),
        grid=grid,
        psi=psi,
        phi=phi,
        dpsi=dpsi,
        dphi=dphi,
        profile=profile,
        evaluator=shot.eval,
    )
    if extract:
        coeffs, mismatch = _extract(sol)
        sol = replace(
            sol,
            growth=(coeffs[0], coeffs[2]),
            decayc=(coeffs[1], coeffs[3]),
            extraction_mismatch=mismatch,
        )
    return sol


def known_generators(profile: GroundStateProfile, ell: int) -> ChannelSolution:
    """The closed-form kernel element of channel 0 or 1.

    Channel 1 carries the radial derivative pair ``(u', v')``; channel 0
    carries the scaling direction ``(r u' + alpha u, r v' + beta v)``.  No
    other channel admits a decaying solution, so ``ell >= 2`` is an error.
    """
    pair = profile.pair
    grid = profile.grid
    r = grid.r
    u, du, v, dv = profile.u, profile.du, profile.v, profile.dv
    ddu = -(pair.N - 1.0) / r * du - v**pair.p
    ddv = -(pair.N - 1.0) / r * dv - u**pair.q
    u0, v0 = profile.u0, profile.gamma_star

    if ell == 1:
        psi, phi = du, dv
        dpsi, dphi = ddu, ddv
        start = (-(v0**pair.p) / pair.N, -(u0**pair.q) / pair.N)
    elif ell == 0:
        psi = r * du + pair.alpha * u
        phi = r * dv + pair.beta * v
        dpsi = (pair.alpha + 1.0) * du + r * ddu
        dphi = (pair.beta + 1.0) * dv + r * ddv
        start = (pair.alpha * u0, pair.beta * v0)
    else:
        raise ValueError(
            f"no kernel generator exists in channel ell={ell}; only ell in {{0, 1}}"
        )

    sol = ChannelSolution(
        ell=ell,
        start_coeffs=start,
        grid=grid,
        psi=np.asarray(psi, dtype=float),
        phi=np.asarray(phi, dtype=float),
        dpsi=np.asarray(dpsi, dtype=float),
        dphi=np.asarray(dphi, dtype=float),
        profile=profile,
    )
    coeffs, mismatch = _extract(sol)
    return replace(
        sol,
        growth=(coeffs[0], coeffs[2]),
        decayc=(coeffs[1], coeffs[3]),
        extraction_mismatch=mismatch,
    )


def channel_residual(solution: ChannelSolution) -> float:
    """Max residual of the reduced channel equations, relative to their scale.

    Both equations are evaluated in log-radius form on interior nodes and
    normalized by the largest term appearing in each equation across the
    grid, so the figure is meaningful even where a component passes through
    zero.
    """
    grid = solution.grid
    pair = solution.profile.pair
    ell = solution.ell
    neff = pair.N + 2 * ell
    r = grid.r
    rl = r ** float(ell)
    w = solution.psi / rl
    z = solution.phi / rl
    pv = pair.p * solution.profile.v ** (pair.p - 1.0)
    qu = pair.q * solution.profile.u ** (pair.q - 1.0)
    inner = slice(2, -2)

    worst = 0.0
    for f, g, pot in ((w, z, pv), (z, w, qu)):
        fs, fss = log_derivatives(f, grid)
        source = r * r * pot * g
        resid = fss + (neff - 2.0) * fs + source
        scale = max(np.max(np.abs(f)), np.max(np.abs(source)))
        worst = max(worst, float(np.max(np.abs(resid[inner])) / scale))
    return worst


# ---------------------------------------------------------------------------
# far-field connection


@dataclass(frozen=True)
class _Term:
    """One contribution c * r^mu * (ln r)^t to a far-field mode."""

    comp: int  # 0 -> psi side, 1 -> phi side (reduced components)
    c: float
    mu: float
    t: float

    def value(self, r: float) -> float:
        powlog = math.log(r) ** self.t if self.t else 1.0
        return self.c * r**self.mu * powlog

    def s_derivative(self, r: float) -> float:
        ln = math.log(r)
        base = self.c * r**self.mu
        val = self.mu * ln**self.t if self.t else self.mu
        if self.t:
            val += self.t * ln ** (self.t - 1.0)
        return base * val


def _potential_models(profile: GroundStateProfile, r_ref: float):
    """Local power-law models K(r) ~ K(r_ref) (r/r_ref)^-sigma of the couplings.

    The decay rate sigma is read off the profile's own logarithmic slope at
    ``r_ref``, which absorbs slowly varying (e.g. logarithmic) corrections
    far better than the nominal asymptotic exponent.
    """
    pair = profile.pair
    u, du, v, dv = profile.eval(r_ref)[:, 0]
    p_model = (pair.p * v ** (pair.p - 1.0), (pair.p - 1.0) * (-r_ref * dv / v))
    q_model = (pair.q * u ** (pair.q - 1.0), (pair.q - 1.0) * (-r_ref * du / u))
    return p_model, q_model


def _respond(term: _Term, models, neff: int, r_ref: float) -> _Term:
    """Particular solution generated in the opposite component by ``term``."""
    p_model, q_model = models
    strength, sigma = (p_model if term.comp == 1 else q_model)
    comp = 1 - term.comp
    s0 = -strength * r_ref**sigma * term.c
    mu = term.mu - sigma + 2.0
    disc = mu * (mu + neff - 2.0)
    if abs(disc) >= 1.0:
        return _Term(comp, s0 / disc, mu, term.t)
    # Near an indicial root the power-law response degenerates; snap to the
    # root and raise the logarithm power instead.
    mu_res = 0.0 if abs(mu) < abs(mu + neff - 2.0) else -(neff - 2.0)
    denom = (term.t + 1.0) * (2.0 * mu_res + neff - 2.0)
    return _Term(comp, s0 / denom, mu_res, term.t + 1.0)


def _build_modes(profile: GroundStateProfile, ell: int, r1: float, r2: float):
    """Four far-field modes as short response expansions.

    Order: psi-growing, psi-decaying, phi-growing, phi-decaying (reduced
    components; "growing" is the constant mode).
    """
    neff = profile.pair.N + 2 * ell
    models = _potential_models(profile, r2)
    k = neff - 2.0
    seeds = (
        _Term(0, 1.0, 0.0, 0.0),
        _Term(0, 1.0, -k, 0.0),
        _Term(1, 1.0, 0.0, 0.0),
        _Term(1, 1.0, -k, 0.0),
    )
    modes = []
    for seed in seeds:
        terms = [seed]
        frontier = [seed]
        for _ in range(3):
            scale = max(abs(t.value(r2)) for t in terms)
            frontier = [
                resp
                for resp in (_respond(t, models, neff, r2) for t in frontier)
                if abs(resp.value(r2)) > 1e-13 * scale
                or abs(resp.value(r1)) > 1e-13 * scale
            ]
            if not frontier:
                break
            terms.extend(frontier)
        modes.append(terms)
    return modes


def _pollution(
    modes, coeffs: np.ndarray, comp: int, r: float, derivative: bool, include_own: bool
) -> float:
    """Coupling content of component ``comp`` at ``r`` beyond the pure frame.

    Sums the catalog terms that the modes induce in ``comp``, weighted by the
    current coefficients.  Seed powers are never subtracted.  Round-trip
    corrections of the component's own modes are included only when
    ``include_own`` is set: they exist through coupling with the companion
    component, so they are data content for genuine solutions but must not
    be imposed on input whose companion carries no signal.
    """
    total = 0.0
    for j, terms in enumerate(modes):
        weight = coeffs[j]
        seed_comp = 0 if j < 2 else 1
        if weight == 0.0 or (seed_comp == comp and not include_own):
            continue
        for pos, t in enumerate(terms):
            if t.comp != comp or (seed_comp == comp and pos == 0):
                continue
            total += weight * (t.s_derivative(r) if derivative else t.value(r))
    return total


def _solve2(rows: np.ndarray, data: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(rows), axis=0)
    scale[scale == 0.0] = 1.0
    return np.linalg.solve(rows / scale, data) / scale


def _extract(solution: ChannelSolution) -> tuple[tuple[float, float, float, float], float]:
    grid = solution.grid
    ell = solution.ell
    r = grid.r
    i2 = r.size - 1
    i1 = int(np.argmin(np.abs(r - R1_FRACTION * r[i2])))
    if i1 >= i2 - 1:
        raise ValueError("grid too short to separate far-field modes")
    r1, r2 = float(r[i1]), float(r[i2])

    rl = r ** float(ell)
    w = solution.psi / rl
    z = solution.phi / rl
    # log-radius derivative of the reduced components: r w' = r^{1-ell} psi' - ell w
    ws = r ** (1.0 - ell) * solution.dpsi - ell * w
    zs = r ** (1.0 - ell) * solution.dphi - ell * z

    modes = _build_modes(solution.profile, ell, r1, r2)
    neff = solution.profile.pair.N + 2 * ell
    k = neff - 2.0

    # A component whose samples are negligible against the whole solution
    # carries no far-field information: its coefficients are pinned to zero
    # and it is exempt from the consistency gate.
    total = max(abs(w[i1]), abs(w[i2]), abs(z[i1]), abs(z[i2]))
    live = (
        max(abs(w[i1]), abs(w[i2])) > 1e-12 * total,
        max(abs(z[i1]), abs(z[i2])) > 1e-12 * total,
    )
    # Round-trip corrections only make sense when both components actually
    # couple; with a dead companion the pure frame is the whole story.
    include_own = live[0] and live[1]

    def iterate(rows_by_comp, data_by_comp, radii, use_derivative_row) -> np.ndarray:
        coeffs = np.zeros(4)
        for _ in range(4):
            nxt = np.zeros(4)
            for comp, cols in ((0, (0, 1)), (1, (2, 3))):
                if not live[comp]:
                    continue
                cleaned = np.array(
                    [
                        data_by_comp[comp][m]
                        - _pollution(
                            modes, coeffs, comp, radii[m], use_derivative_row[m], include_own
                        )
                        for m in range(2)
                    ]
                )
                ab = _solve2(rows_by_comp, cleaned)
                nxt[cols[0]], nxt[cols[1]] = ab
            coeffs = nxt
        return coeffs

    # value collocation at the two radii
    rows_val = np.array([[1.0, r1**-k], [1.0, r2**-k]])
    coeffs_val = iterate(
        rows_val,
        {0: (w[i1], w[i2]), 1: (z[i1], z[i2])},
        (r1, r2),
        (False, False),
    )
    # value + log-slope collocation at the outermost radius
    rows_der = np.array([[1.0, r2**-k], [0.0, -k * r2**-k]])
    coeffs_der = iterate(
        rows_der,
        {0: (w[i2], ws[i2]), 1: (z[i2], zs[i2])},
        (r2, r2),
        (False, True),
    )

    # Compare the two extractions mode value by mode value at r2, relative to
    # the size of the component itself there.
    mode_vals = np.array([1.0, r2**-k, 1.0, r2**-k])
    mismatch = 0.0
    for comp, idx, datum in ((0, (0, 1), w[i2]), (1, (2, 3), z[i2])):
        if not live[comp]:
            continue
        own = sum(abs(coeffs_val[j] * mode_vals[j]) for j in idx)
        scale = max(abs(datum), 0.1 * own)
        if scale == 0.0:
            continue
        dev = max(abs((coeffs_val[j] - coeffs_der[j]) * mode_vals[j]) for j in idx)
        mismatch = max(mismatch, dev / scale)
    if mismatch > MISMATCH_TOL:
        raise ValueError(
            f"far-field extraction disagreement {mismatch:.2e} in channel "
            f"ell={ell}: r_max={r2:g} too small for this channel"
        )
    a_psi, b_psi, a_phi, b_phi = coeffs_val
    return (float(a_psi), float(b_psi), float(a_phi), float(b_phi)), float(mismatch)


def extract_connection(solution: ChannelSolution) -> tuple[float, float, float, float]:
    """Far-field coefficients (A_psi, B_psi, A_phi, B_phi) of a channel solution.

    A's multiply ``r^ell`` (the non-decaying direction), B's multiply
    ``r^-(ell+N-2)``.  Values at 0.8*r_max and r_max determine the split; a
    derivative-based extraction at r_max must agree within 1% or the far
    field is declared unresolved.
    """
    coeffs, _ = _extract(solution)
    return coeffs


# ---------------------------------------------------------------------------
# nullity, monotonicity, decay


def kernel_nullity_shooting(
    profile: GroundStateProfile,
    ell: int,
    *,
    rtol: float = 1e-12,
    threshold: float = NULLITY_THRESHOLD,
) -> ShootingNullity:
    """Kernel dimension of channel ``ell`` from two regular shooting runs.

    The two runs with origin data (1, 0) and (0, 1) span all regular
    solutions; the kernel dimension is the rank deficiency of the matrix
    sending origin data to growth coefficients.  When the matrix is
    singular, the null direction is re-integrated to give the kernel
    element itself.
    """
    basis = [
        integrate_linearized(profile, ell, (1.0, 0.0), rtol=rtol),
        integrate_linearized(profile, ell, (0.0, 1.0), rtol=rtol),
    ]
    entries = np.array(
        [[sol.growth[0] for sol in basis], [sol.growth[1] for sol in basis]]
    )
    _, svals, vt = np.linalg.svd(entries)
    nullity = int(np.sum(svals < threshold * svals[0]))
    matrix = ConnectionMatrix(
        ell=ell, entries=entries, singular_values=(float(svals[0]), float(svals[1]))
    )
    null_direction = None
    kernel = None
    if nullity == 1:
        direction = vt[-1]
        if direction[0] < 0 or (direction[0] == 0 and direction[1] < 0):
            direction = -direction
        null_direction = (float(direction[0]), float(direction[1]))
        kernel = integrate_linearized(profile, ell, null_direction, rtol=rtol)
    return ShootingNullity(
        ell=ell,
        nullity=nullity,
        matrix=matrix,
        null_direction=null_direction,
        kernel=kernel,
    )


def monotonicity_check(solution: ChannelSolution) -> MonotonicityReport:
    """Sign-pattern audit of a solution with vanishing first origin datum.

    Requires ``a = 0`` (so ``r^-ell psi`` vanishes at the origin) and
    ``b != 0``.  After orienting the pair so that ``r^-ell psi`` is positive
    near the origin, the reduced first component must be strictly
    increasing; the report also records the companion signs (first
    component slope positive, second component slope negative).
    """
    a, b = solution.start_coeffs
    if a != 0.0:
        raise ValueError(
            f"monotonicity check requires vanishing first origin datum, got a={a!r}"
        )
    if b == 0.0:
        raise ValueError("monotonicity check needs a non-trivial start (b != 0)")

    grid = solution.grid
    r = grid.r
    ell = solution.ell
    rl = r ** float(ell)
    w = solution.psi / rl
    z = solution.phi / rl
    dw = (solution.dpsi - ell * solution.psi / r) / rl
    dz = (solution.dphi - ell * solution.phi / r) / rl

    w_scale = float(np.max(np.abs(w)))
    significant = np.abs(w) > 1e-12 * w_scale
    first = int(np.argmax(significant))
    orientation = float(np.sign(w[first]))

    dw_hat = orientation * dw
    dz_hat = orientation * dz
    slope_scale = float(np.max(np.abs(dw_hat)))
    wrong = -dw_hat / slope_scale
    max_violation = float(np.max(wrong))
    monotone = max_violation <= 1e-10

    dz_scale = float(np.max(np.abs(dz_hat)))
    dz_live = np.abs(dz_hat) > 1e-8 * dz_scale
    phi_slope_negative = bool(np.all(dz_hat[dz_live] < 0.0))
    psi_slope_positive = bool(np.all(dw_hat[significant] > 0.0))
    increasing = bool(orientation * (w[-1] - w[first]) > 0.0)

    return MonotonicityReport(
        ell=solution.ell,
        is_strictly_monotone=monotone,
        increasing=increasing,
        orientation=orientation,
        max_relative_violation=max_violation,
        psi_slope_positive=psi_slope_positive,
        phi_slope_negative=phi_slope_negative,
    )


def verify_linearized_decay(
    solution: ChannelSolution,
    pair: Optional[CriticalPair] = None,
    *,
    window_frac: float = 0.3,
    eta: float = 0.05,
) -> LinearizedDecay:
    """Fit far-field exponents of a kernel element and test the decay bound.

    The first component must decay at least like ``r^-((N-2)p-2)`` below the
    Serrin threshold and like ``r^-(N-2)`` otherwise; the second component
    always at least like ``r^-(N-2)``.  ``eta`` is the slack allowed on the
    fitted exponents.  In the borderline regime the first component's fit
    removes a logarithmic factor before reading off the power.
    """
    if pair is None:
        pair = solution.profile.pair
    grid = solution.grid
    mask = grid.outer_window(window_frac)
    if int(np.sum(mask)) < 20:
        raise DecayFitError(
            f"outer window holds {int(np.sum(mask))} nodes; need at least 20"
        )
    s = grid.s[mask]
    log_corrected = pair.regime is Regime.LOG_CASE

    def fitted_exponent(values: np.ndarray, compensate_log: bool) -> float:
        vals = np.abs(values[mask])
        if np.any(vals == 0.0):
            raise DecayFitError("component vanishes inside the fit window")
        y = np.log(vals)
        if compensate_log:
            y = y - np.log(s)
        return -float(np.polyfit(s, y, 1)[0])

    psi_exp = fitted_exponent(solution.psi, log_corrected)
    phi_exp = fitted_exponent(solution.phi, False)

    if pair.regime is Regime.SUB_SERRIN:
        psi_bound = pair.p * (pair.N - 2.0) - 2.0
    else:
        psi_bound = pair.N - 2.0
    phi_bound = pair.N - 2.0

    satisfied = (psi_exp >= psi_bound - eta) and (phi_exp >= phi_bound - eta)
    return LinearizedDecay(
        psi_exponent=psi_exp,
        phi_exponent=phi_exp,
        psi_bound=psi_bound,
        phi_bound=phi_bound,
        eta=eta,
        log_corrected=log_corrected,
        bound_satisfied=satisfied,
    )
