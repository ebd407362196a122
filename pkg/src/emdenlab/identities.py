"""Flux brackets, integral balances, and energy bookkeeping for channels.

For a channel solution (psi, phi) around the ground state (u, v), the
weighted Wronskian-type brackets

    I1(r) = r^{N-1} (v'' psi - v' psi'),
    I2(r) = r^{N-1} (u'' phi - u' phi'),

obey closed differentiation laws whose sum integrates to a Pohozaev-type
balance: I1(R) + I2(R) equals a weighted interior integral whose kernel
carries the factor ell(ell+N-2) - (N-1).  That factor vanishes at ell = 1,
is negative at ell = 0, and positive for ell >= 2, which is what shuts the
door on decaying solutions in the high channels: there the two sides of the
balance want opposite signs.

This module certifies the differentiation laws, the integrated balance, the
sign structure of the high-channel obstruction, channel energy norms with a
divergence witness, and the functional inequalities (Sobolev and Hardy
flavors) that make the tail of |I1| + |I2| integrable for finite-energy
solutions.  Second derivatives of the ground state are always obtained by
substituting its own equations, never by numerical differentiation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline

from .channels import ChannelSolution
from .grids import RadialGrid, channel_laplacian, log_derivatives
from .ground_state import GroundStateProfile
from .hyperbola import CriticalPair

__all__ = [
    "IdentityReport",
    "SignStructureReport",
    "compute_I",
    "check_derivative_formulas",
    "check_poho_identity",
    "check_sign_structure",
    "energy_norm",
    "inequality_ratios",
    "InequalityRatios",
    "integrability_tail",
    "identity_report",
    "poho_table",
]

#: Truncated-norm growth factor above which a norm is declared divergent.
DIVERGENCE_GROWTH = 1.5


# ---------------------------------------------------------------------------
# evaluation helpers


def _channel_coefficient(ell: int, N: int) -> float:
    """The weight ell(ell+N-2) - (N-1) appearing in the integral balance."""
    return float(ell * (ell + N - 2) - (N - 1))


def _second_derivatives(
    profile: GroundStateProfile, r: np.ndarray, du: np.ndarray, dv: np.ndarray,
    u: np.ndarray, v: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """(u'', v'') by substituting the ground-state equations."""
    pair = profile.pair
    nm1 = pair.N - 1.0
    ddu = -nm1 / r * du - v**pair.p
    ddv = -nm1 / r * dv - u**pair.q
    return ddu, ddv


def _profile_on(profile: GroundStateProfile, grid: RadialGrid):
    """Ground-state data on a channel grid, reusing stored arrays if shared."""
    if grid is profile.grid:
        return profile.u, profile.du, profile.v, profile.dv
    return profile.eval(grid.r)


def _eval_solution(solution: ChannelSolution, r: np.ndarray) -> np.ndarray:
    """(psi, psi', phi, phi') at arbitrary radii inside the solution grid."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if solution.evaluator is not None:
        return solution.evaluator(r)
    s = solution.grid.s
    logr = np.log(r)
    comps = (solution.psi, solution.dpsi, solution.phi, solution.dphi)
    return np.stack([CubicSpline(s, c)(logr) for c in comps])


def _brackets_on_grid(
    profile: GroundStateProfile, solution: ChannelSolution
) -> tuple[np.ndarray, np.ndarray]:
    """I1 and I2 sampled on the solution grid from stored arrays."""
    grid = solution.grid
    r = grid.r
    u, du, v, dv = _profile_on(profile, grid)
    ddu, ddv = _second_derivatives(profile, r, du, dv, u, v)
    weight = r ** (profile.pair.N - 1.0)
    I1 = weight * (ddv * solution.psi - dv * solution.dpsi)
    I2 = weight * (ddu * solution.phi - du * solution.dphi)
    return I1, I2


def compute_I(
    profile: GroundStateProfile, solution: ChannelSolution, R
) -> tuple[np.ndarray, np.ndarray] | tuple[float, float]:
    """The flux brackets (I1, I2) at radius R (scalar or array).

    Second derivatives of the ground state come from its own equations, so
    the only numerical content is the dense evaluation of the profile and of
    the channel solution at R.
    """
    grid = solution.grid
    R_arr = np.atleast_1d(np.asarray(R, dtype=float))
    if np.any(R_arr < grid.r_start) or np.any(R_arr > grid.r_max):
        raise ValueError(
            f"R must lie inside the solution grid "
            f"[{grid.r_start:g}, {grid.r_max:g}]"
        )
    u, du, v, dv = profile.eval(R_arr)
    ddu, ddv = _second_derivatives(profile, R_arr, du, dv, u, v)
    psi, dpsi, phi, dphi = _eval_solution(solution, R_arr)
    weight = R_arr ** (profile.pair.N - 1.0)
    I1 = weight * (ddv * psi - dv * dpsi)
    I2 = weight * (ddu * phi - du * dphi)
    if np.isscalar(R) or np.ndim(R) == 0:
        return float(I1[0]), float(I2[0])
    return I1, I2


# ---------------------------------------------------------------------------
# differentiation laws


def check_derivative_formulas(
    profile: GroundStateProfile, solution: ChannelSolution
) -> tuple[float, float]:
    """Max relative residuals of the closed forms for I1' and I2'.

    The brackets are sampled along the grid, differentiated numerically in
    log radius, and compared against their analytic derivatives

        I1' = r^{N-1} (-q u^{q-1} u' psi + p v^{p-1} v' phi - c/r^2 v' psi),
        I2' = r^{N-1} (-p v^{p-1} v' phi + q u^{q-1} u' psi - c/r^2 u' phi),

    with c = ell(ell+N-2) - (N-1).  Edge nodes of the finite-difference
    stencil are excluded.
    """
    grid = solution.grid
    pair = profile.pair
    r = grid.r
    u, du, v, dv = _profile_on(profile, grid)
    coef = _channel_coefficient(solution.ell, pair.N)
    weight = r ** (pair.N - 1.0)
    qu = pair.q * u ** (pair.q - 1.0) * du
    pv = pair.p * v ** (pair.p - 1.0) * dv
    terms1 = (-qu * solution.psi, pv * solution.phi, -coef / r**2 * dv * solution.psi)
    terms2 = (-pv * solution.phi, qu * solution.psi, -coef / r**2 * du * solution.phi)

    I1, I2 = _brackets_on_grid(profile, solution)
    inner = slice(3, -3)
    residuals = []
    for bracket, terms in ((I1, terms1), (I2, terms2)):
        rhs = weight * sum(terms)
        # Normalize by the largest participating term, not the (possibly
        # perfectly cancelling) sum, so symmetric points stay meaningful.
        scale = np.max(weight[inner] * sum(np.abs(t[inner]) for t in terms))
        dds, _ = log_derivatives(bracket, grid)
        numeric = dds / r
        residuals.append(float(np.max(np.abs(numeric[inner] - rhs[inner])) / scale))
    return residuals[0], residuals[1]


# ---------------------------------------------------------------------------
# integrated balance


def _cumulative_dr(values: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """Cumulative integral of ``values`` in dr along the log grid.

    Trapezoid with an endpoint Euler-Maclaurin correction: the error is then
    smooth fourth order rather than panel-rough second order.
    """
    h = grid.log_step()
    integrand = values * grid.r
    total = cumulative_trapezoid(integrand, dx=h, initial=0.0)
    slope = np.gradient(integrand, h, edge_order=2)
    return total - h * h / 12.0 * (slope - slope[0])


def _origin_head(values: np.ndarray, grid: RadialGrid) -> float:
    """Integral of the balance integrand from 0 to the first node.

    The integrand behaves like a pure power r^k near the origin; k is read
    off the first two nodes, and the contribution below them is the analytic
    power-law integral.
    """
    g0, g1 = float(values[0]), float(values[1])
    if g0 == 0.0 or g1 == 0.0 or (g0 < 0.0) != (g1 < 0.0):
        return 0.0
    k = math.log(abs(g1 / g0)) / grid.log_step()
    if k <= -1.0:
        return 0.0
    return g0 * grid.r_start / (k + 1.0)


def _balance_rhs(
    profile: GroundStateProfile, solution: ChannelSolution
) -> tuple[np.ndarray, float]:
    """Grid samples of the interior-integral side and the head correction."""
    grid = solution.grid
    pair = profile.pair
    r = grid.r
    _, du, _, dv = _profile_on(profile, grid)
    coef = _channel_coefficient(solution.ell, pair.N)
    integrand = coef * (du * solution.phi + dv * solution.psi) * r ** (pair.N - 3.0)
    head = _origin_head(integrand, grid)
    return -(_cumulative_dr(integrand, grid) + head), head


def _bracket_term_scale(
    profile: GroundStateProfile, solution: ChannelSolution, R_arr: np.ndarray
) -> np.ndarray:
    """Largest magnitude moving through either bracket before cancellation."""
    u, du, v, dv = profile.eval(R_arr)
    ddu, ddv = _second_derivatives(profile, R_arr, du, dv, u, v)
    psi, dpsi, phi, dphi = _eval_solution(solution, R_arr)
    weight = R_arr ** (profile.pair.N - 1.0)
    return weight * (
        np.abs(ddv * psi) + np.abs(dv * dpsi) + np.abs(ddu * phi) + np.abs(du * dphi)
    )


def poho_table(
    profile: GroundStateProfile,
    solution: ChannelSolution,
    R_values: Sequence[float],
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(I1, I2, interior side, normalized residual) at each requested R.

    Residuals are normalized by the largest term participating in either
    bracket, not by the (possibly perfectly cancelling) totals: at the
    symmetric point the channel-1 brackets vanish identically term against
    term, and dividing by them would turn an exactly satisfied identity
    into 0/0 noise.
    """
    grid = solution.grid
    R_arr = np.asarray(R_values, dtype=float)
    I1, I2 = compute_I(profile, solution, R_arr)
    scale = _bracket_term_scale(profile, solution, R_arr)
    rhs_grid, _ = _balance_rhs(profile, solution)
    rhs = CubicSpline(grid.s, rhs_grid)(np.log(R_arr))
    denom = np.maximum(scale, np.abs(rhs))
    gap = np.abs(I1 + I2 - rhs)
    residuals = np.where(denom > 0.0, gap / np.where(denom > 0.0, denom, 1.0), gap)
    return I1, I2, rhs, residuals


def channel1_exactness(
    profile: GroundStateProfile,
    solution: ChannelSolution,
    r_window: tuple = (1.0, 20.0),
) -> float:
    """Max |I1 + I2| over grid nodes in ``r_window``, relative to the terms.

    The channel-1 interior coefficient vanishes, so the balance identity
    degenerates to I1 + I2 = 0 at every radius.  This checks it on the node
    data itself — no interpolation — which is where the cancellation is
    sharpest and independent of whether the profile came from the solver or
    from a persisted cache.
    """
    if solution.ell != 1:
        raise ValueError("the exactness check applies to channel ell == 1 only")
    grid = solution.grid
    r = grid.r
    mask = (r >= r_window[0]) & (r <= r_window[1])
    if not mask.any():
        raise ValueError("r_window contains no grid nodes")
    I1, I2 = _brackets_on_grid(profile, solution)
    u, du, v, dv = _profile_on(profile, grid)
    ddu, ddv = _second_derivatives(profile, r, du, dv, u, v)
    weight = r ** (profile.pair.N - 1.0)
    scale = weight * (
        np.abs(ddv * solution.psi)
        + np.abs(dv * solution.dpsi)
        + np.abs(ddu * solution.phi)
        + np.abs(du * solution.dphi)
    )
    gap = np.abs(I1 + I2)[mask]
    denom = scale[mask]
    vals = np.where(denom > 0.0, gap / np.where(denom > 0.0, denom, 1.0), gap)
    return float(np.max(vals))


def check_poho_identity(
    profile: GroundStateProfile,
    solution: ChannelSolution,
    R_values: Sequence[float],
) -> np.ndarray:
    """Normalized residuals of I1(R) + I2(R) against the interior integral.

    Each residual is scaled by the largest of the three participating terms,
    so channels where everything is tiny (ell = 1, where the interior weight
    vanishes identically) still report near machine zero.
    """
    return poho_table(profile, solution, R_values)[3]


# ---------------------------------------------------------------------------
# sign structure of the high channels


@dataclass(frozen=True)
class SignStructureReport:
    """Zero locations and sign facts driving the ell >= 2 obstruction.

    ``psi_first_zero`` / ``phi_first_zero`` are None when the component
    keeps its sign up to the grid edge ("no finite zero observed"; a zero
    beyond r_max is indistinguishable from none at all).  The conditional
    fields are None whenever their hypotheses are vacuous on this solution.
    """

    ell: int
    flipped: bool
    psi_first_zero: Optional[float]
    phi_first_zero: Optional[float]
    phi_positive_near_origin: bool
    phi_positive_before_first: Optional[bool]
    outside_signs_ok: Optional[bool]
    interior_integral_at_first_zero: Optional[float]
    interior_integral_negative: Optional[bool]
    no_finite_zero: bool
    tail_bracket: float
    tail_bracket_drift: float


def _first_zero(r: np.ndarray, y: np.ndarray) -> tuple[Optional[float], Optional[int]]:
    sign = np.sign(y)
    crossings = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    if crossings.size == 0:
        return None, None
    i = int(crossings[0])
    frac = y[i] / (y[i] - y[i + 1])
    return float(r[i] + frac * (r[i + 1] - r[i])), i


def check_sign_structure(
    profile: GroundStateProfile,
    solution: ChannelSolution,
    ell: Optional[int] = None,
) -> SignStructureReport:
    """Certify the sign facts behind the high-channel rigidity argument.

    The solution is sign-normalized so psi > 0 near the origin.  The report
    locates first zeros r1 (psi) and r2 (phi), checks positivity of phi
    before the earlier zero and the negativity of the trailing component
    between the two zeros, and evaluates the weighted interior integral of
    the balance at R = min(r1, r2).  While both components stay positive
    that integral is strictly negative, forcing I1 + I2 to be positive --
    the opposite of what the boundary signs allow a decaying solution,
    which is the high-channel obstruction.  Without any finite zero the
    bracket sum itself is reported at the tail, where a nonzero limit marks
    a non-kernel solution.
    """
    if ell is None:
        ell = solution.ell
    if ell != solution.ell:
        raise ValueError(
            f"channel mismatch: solution carries ell={solution.ell}, got ell={ell}"
        )
    if ell < 2:
        raise ValueError("sign-structure analysis applies to channels ell >= 2")

    grid = solution.grid
    r = grid.r
    psi, phi = solution.psi, solution.phi
    # Normalize the overall sign so psi is positive near the origin.
    lead = psi[np.nonzero(np.abs(psi) > 0.0)[0][0]]
    flipped = lead < 0.0
    if flipped:
        psi, phi = -psi, -phi

    r1, i1 = _first_zero(r, psi)
    r2, i2 = _first_zero(r, phi)
    phi_positive_near_origin = bool(phi[np.nonzero(np.abs(phi) > 0.0)[0][0]] > 0.0)

    zeros = [z for z in (r1, r2) if z is not None]
    no_finite_zero = not zeros

    phi_before: Optional[bool] = None
    outside_ok: Optional[bool] = None
    interior_at_zero: Optional[float] = None
    interior_negative: Optional[bool] = None

    if not no_finite_zero:
        R = min(zeros)
        if phi_positive_near_origin:
            phi_before = bool(np.all(phi[r < R][1:] > 0.0))
        if i1 is not None and i2 is not None:
            if r1 < r2:
                outside_ok = bool(np.all(psi[i1 + 2 : i2] < 0.0))
            elif r2 < r1:
                outside_ok = bool(np.all(phi[i2 + 2 : i1] < 0.0))
        rhs_grid, _ = _balance_rhs(profile, solution)
        sign_factor = -1.0 if flipped else 1.0
        # The balance reads I1 + I2 = -(interior integral); report the
        # integral itself, whose strict negativity is the obstruction.
        interior_at_zero = float(
            -sign_factor * CubicSpline(grid.s, rhs_grid)(np.log(R))
        )
        interior_negative = interior_at_zero < 0.0

    I1, I2 = _brackets_on_grid(profile, solution)
    bracket = (-1.0 if flipped else 1.0) * (I1 + I2)
    tail_bracket = float(bracket[-1])
    half_idx = int(np.argmin(np.abs(r - 0.5 * grid.r_max)))
    scale = abs(tail_bracket) if tail_bracket != 0.0 else 1.0
    tail_drift = float(abs(bracket[-1] - bracket[half_idx]) / scale)

    return SignStructureReport(
        ell=ell,
        flipped=flipped,
        psi_first_zero=r1,
        phi_first_zero=r2,
        phi_positive_near_origin=phi_positive_near_origin,
        phi_positive_before_first=phi_before,
        outside_signs_ok=outside_ok,
        interior_integral_at_first_zero=interior_at_zero,
        interior_integral_negative=interior_negative,
        no_finite_zero=no_finite_zero,
        tail_bracket=tail_bracket,
        tail_bracket_drift=tail_drift,
    )


# ---------------------------------------------------------------------------
# energy norms and functional inequalities


def energy_norm(
    f: np.ndarray,
    grid: RadialGrid,
    N: int,
    ell: int,
    s: float,
    *,
    growth_factor: float = DIVERGENCE_GROWTH,
) -> float:
    """Channel energy norm (integral of |channel Laplacian|^s) ^ (1/s).

    Divergence witness: the truncated norm is evaluated with the upper limit
    at r_max/4, r_max/2 and r_max; when each doubling multiplies the norm by
    more than ``growth_factor`` the integral is declared divergent and the
    norm reported as +inf.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != grid.r.shape:
        raise ValueError("f must be sampled on the grid nodes")
    if not np.isfinite(s) or s <= 1.0:
        raise ValueError("the integrability exponent s must exceed 1")
    lap = channel_laplacian(f, grid, N, ell)
    integrand = np.abs(lap) ** s * grid.r ** (N - 1.0) * grid.r
    truncated = []
    for cut in (0.25 * grid.r_max, 0.5 * grid.r_max, np.inf):
        mask = grid.r <= cut
        truncated.append(float(np.trapezoid(integrand[mask], grid.s[mask]) ** (1.0 / s)))
    if truncated[2] > growth_factor * truncated[1] > growth_factor**2 * truncated[0]:
        return math.inf
    return truncated[2]


@dataclass(frozen=True)
class InequalityRatios:
    """Observed left/right ratios of the Sobolev and Hardy lower bounds.

    ``ratios`` maps a function tag to the ratio of its energy norm against
    each dominated integral ("sobolev" for the Lebesgue norm, "gradient" for
    the plain gradient norm, "hardy" for the weighted gradient norm).  The
    implicit constants are not certified, only observed.
    """

    pair: CriticalPair
    s_exponent: float
    t_exponent: float
    exponent_identity_residual: float
    ratios: dict[str, dict[str, float]]


def _dr_integral(values: np.ndarray, grid: RadialGrid) -> float:
    return float(np.trapezoid(values * grid.r, grid.s))


def inequality_ratios(
    profile: GroundStateProfile,
    solutions: Iterable[ChannelSolution] = (),
) -> InequalityRatios:
    """Ratios of energy norms to the Sobolev/Hardy-dominated integrals.

    Evaluated for the ground-state components u, v and for the channel
    components of any supplied (finite-energy) solutions: first components
    live in the p-side space, second components in the q-side space.  Also
    checks the conjugacy 1/s + 1/t = 1 of the two gradient exponents, which
    is what makes v' psi' integrable in the tail argument.
    """
    pair = profile.pair
    grid = profile.grid
    N = pair.N
    sp = (pair.p + 1.0) / pair.p
    sq = (pair.q + 1.0) / pair.q
    inv_t = pair.p / (pair.p + 1.0) - 1.0 / N
    inv_s = pair.q / (pair.q + 1.0) - 1.0 / N
    t_exp = 1.0 / inv_t
    s_exp = 1.0 / inv_s
    identity_residual = abs(inv_s + inv_t - 1.0)

    volume = grid.r ** (N - 1.0)
    entries: list[tuple[str, np.ndarray, np.ndarray, int, str]] = [
        ("u", profile.u, profile.du, 0, "p"),
        ("v", profile.v, profile.dv, 0, "q"),
    ]
    for sol in solutions:
        entries.append((f"psi[ell={sol.ell}]", sol.psi, sol.dpsi, sol.ell, "p"))
        entries.append((f"phi[ell={sol.ell}]", sol.phi, sol.dphi, sol.ell, "q"))

    ratios: dict[str, dict[str, float]] = {}
    for tag, f, df, ell, side in entries:
        if side == "p":
            lhs = energy_norm(f, grid, N, ell, sp)
            sob = _dr_integral(np.abs(f) ** (pair.q + 1.0) * volume, grid) ** (
                1.0 / (pair.q + 1.0)
            )
            grad = _dr_integral(np.abs(df) ** t_exp * volume, grid) ** inv_t
            ratios[tag] = {"sobolev": lhs / sob, "gradient": lhs / grad}
        else:
            lhs = energy_norm(f, grid, N, ell, sq)
            hardy = _dr_integral(
                grid.r ** (-sq) * np.abs(df) ** sq * volume, grid
            ) ** (1.0 / sq)
            grad = _dr_integral(np.abs(df) ** s_exp * volume, grid) ** inv_s
            ratios[tag] = {"hardy": lhs / hardy, "gradient": lhs / grad}

    return InequalityRatios(
        pair=pair,
        s_exponent=s_exp,
        t_exponent=t_exp,
        exponent_identity_residual=identity_residual,
        ratios=ratios,
    )


def integrability_tail(
    profile: GroundStateProfile, solution: ChannelSolution
) -> float:
    """Ratio of consecutive dyadic tail integrals of |I1| + |I2|.

    Integrates over [r_max/4, r_max/2] and [r_max/2, r_max]; a ratio below 1
    witnesses the decay that makes the brackets integrable at infinity for
    finite-energy solutions.
    """
    grid = solution.grid
    I1, I2 = _brackets_on_grid(profile, solution)
    y = np.abs(I1) + np.abs(I2)
    r = grid.r
    lower = (r >= 0.25 * grid.r_max) & (r < 0.5 * grid.r_max)
    upper = r >= 0.5 * grid.r_max
    w_lower = float(np.trapezoid((y * r)[lower], grid.s[lower]))
    w_upper = float(np.trapezoid((y * r)[upper], grid.s[upper]))
    return w_upper / w_lower


# ---------------------------------------------------------------------------
# report assembly


@dataclass(frozen=True)
class IdentityReport:
    """Certified integral-identity diagnostics for one channel solution."""

    pair: CriticalPair
    ell: int
    R_values: tuple[float, ...]
    I1_values: tuple[float, ...]
    I2_values: tuple[float, ...]
    derivative_residuals: tuple[float, float]
    poho_residuals: tuple[float, ...]
    integrability_tail: float
    energy_norms: dict[tuple[str, float], float]

    def __post_init__(self):
        fields = (
            self.I1_values
            + self.I2_values
            + self.derivative_residuals
            + self.poho_residuals
            + (self.integrability_tail,)
        )
        if not all(math.isfinite(x) for x in fields):
            raise ValueError("identity report contains non-finite residuals")


def identity_report(
    profile: GroundStateProfile,
    solution: ChannelSolution,
    R_values: Sequence[float] = (1.0, 5.0, 20.0),
) -> IdentityReport:
    """Bundle every identity diagnostic for one channel solution."""
    pair = profile.pair
    I1, I2, _, residuals = poho_table(profile, solution, R_values)
    deriv = check_derivative_formulas(profile, solution)
    tail = integrability_tail(profile, solution)
    sp = (pair.p + 1.0) / pair.p
    sq = (pair.q + 1.0) / pair.q
    grid = solution.grid
    norms = {
        ("psi", sp): energy_norm(solution.psi, grid, pair.N, solution.ell, sp),
        ("phi", sq): energy_norm(solution.phi, grid, pair.N, solution.ell, sq),
        ("u", sp): energy_norm(profile.u, profile.grid, pair.N, 0, sp),
        ("v", sq): energy_norm(profile.v, profile.grid, pair.N, 0, sq),
    }
    return IdentityReport(
        pair=pair,
        ell=solution.ell,
        R_values=tuple(float(R) for R in R_values),
        I1_values=tuple(float(x) for x in np.atleast_1d(I1)),
        I2_values=tuple(float(x) for x in np.atleast_1d(I2)),
        derivative_residuals=(float(deriv[0]), float(deriv[1])),
        poho_residuals=tuple(float(x) for x in residuals),
        integrability_tail=tail,
        energy_norms=norms,
    )
