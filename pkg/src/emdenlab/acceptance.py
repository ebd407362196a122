"""Acceptance suite: nine verifiable properties with one-line verdicts.

Each criterion measures something the rest of the package claims — the
closed-form profile at the symmetric point, exponent algebra, the
channel-by-channel kernel census by two independent methods, generator
residuals, integral identities, far-field decay laws, monotonicity and
energy-norm divergence, the decay bootstrap, and determinism of the artifact
pipeline — and compares it against fixed tolerances.  The same functions
back both the ``verify`` CLI subcommand and the acceptance test module; an
:class:`AcceptanceContext` memoizes the expensive shared state and accepts
injected providers so a test session can reuse its fixtures.
"""

from __future__ import annotations

import shutil
import tempfile
import time
import warnings
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from emdenlab.channels import (
    channel_residual,
    integrate_linearized,
    kernel_nullity_shooting,
    known_generators,
    monotonicity_check,
)
from emdenlab.grids import RadialGrid
from emdenlab.ground_state import (
    CacheCorruptionError,
    fit_decay,
    load_profile,
    shoot_bisection,
)
from emdenlab.hyperbola import (
    Regime,
    check_inequality_lemma,
    decay_bootstrap,
    pair_from_p,
    scaling_exponent_identity,
)
from emdenlab.identities import channel1_exactness, check_poho_identity, energy_norm
from emdenlab.pipeline import (
    RunConfig,
    expected_nullity_table,
    obtain_profile,
    run,
)
from emdenlab.spectral import channel_nullity_spectral

__all__ = [
    "TEST_POINTS",
    "AcceptanceContext",
    "CriterionResult",
    "VerifySummary",
    "all_criteria",
    "run_all",
    "verify_suite",
]

# The four verification points: logarithmic threshold, symmetric, sub-Serrin
# with a linear component, and a generic super-Serrin rational pair.
TEST_POINTS = ((3, 3.0), (4, 3.0), (5, 1.0), (5, 2.0))

ORACLE_PROFILE_TOL = 1e-5
ORACLE_GAMMA_TOL = 1e-8
ALGEBRA_TOL = 1e-12
EIGEN_WINDOW = 5e-3
GENERATOR_TOL = 1e-6
EIGENVECTOR_TOL = 1e-3
POHO_TOL = 1e-6
EXACTNESS_TOL = 1e-10
DECAY_RTOL = 0.02
DRIFT_TOL = 0.05
BOOTSTRAP_ETA = 1e-3
_SAMPLER_SEED = 184594917  # fixed: verify reports must be byte-reproducible


@dataclass(frozen=True)
class CriterionResult:
    """Outcome of one acceptance criterion."""

    index: int
    name: str
    passed: bool
    detail: str
    elapsed: float

    def line(self, with_timing: bool = True) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        suffix = f" ({self.elapsed:.1f}s)" if with_timing else ""
        return f"[{self.index}] {verdict} {self.name}: {self.detail}{suffix}"


class AcceptanceContext:
    """Shared, lazily computed state for the criteria.

    By default profiles are obtained through the pipeline cache (solved,
    persisted, reloaded) under ``config.out_dir``; a test session can inject
    ``profile_provider(N, p, wide)`` and ``shooting_provider(N, p, ell)`` to
    reuse its own fixtures instead.
    """

    def __init__(
        self,
        config: Optional[RunConfig] = None,
        *,
        profile_provider: Optional[Callable] = None,
        shooting_provider: Optional[Callable] = None,
    ):
        self.config = config if config is not None else RunConfig()
        self._profile_provider = profile_provider
        self._shooting_provider = shooting_provider
        self._pairs: dict = {}
        self._profiles: dict = {}
        self._shootings: dict = {}
        self._spectrals: dict = {}
        self._runs: dict = {}

    def pair(self, N: int, p: float):
        key = (N, p)
        if key not in self._pairs:
            self._pairs[key] = pair_from_p(N, p)
        return self._pairs[key]

    def profile(self, N: int, p: float, wide: bool = False):
        key = (N, p, wide)
        if key not in self._profiles:
            if self._profile_provider is not None:
                prof = self._profile_provider(N, p, wide)
            else:
                cfg = self.config
                if wide:
                    cfg = replace(cfg, r_max=max(1000.0, cfg.r_max))
                pair = self.pair(N, p)
                sub = "wide" if wide else "points"
                point_dir = Path(cfg.out_dir) / "accept" / sub / pair.label()
                prof, _ = obtain_profile(pair, cfg, point_dir)
            self._profiles[key] = prof
        return self._profiles[key]

    def shooting(self, N: int, p: float, ell: int):
        key = (N, p, ell)
        if key not in self._shootings:
            if self._shooting_provider is not None:
                result = self._shooting_provider(N, p, ell)
            else:
                result = kernel_nullity_shooting(
                    self.profile(N, p), ell, rtol=self.config.ode_rtol
                )
            self._shootings[key] = result
        return self._shootings[key]

    def spectral(self, N: int, p: float, ell: int):
        key = (N, p, ell)
        if key not in self._spectrals:
            self._spectrals[key] = channel_nullity_spectral(
                self.profile(N, p),
                ell,
                M=self.config.nystrom_m,
                window=self.config.eigen_window,
                shooting_nullity=self.shooting(N, p, ell).nullity,
            )
        return self._spectrals[key]

    def channel_run(self, N: int, p: float, ell: int, start: tuple):
        key = (N, p, ell, start)
        if key not in self._runs:
            self._runs[key] = integrate_linearized(
                self.profile(N, p), ell, start, rtol=self.config.ode_rtol
            )
        return self._runs[key]


# ---------------------------------------------------------------------------
# criteria


def criterion_closed_form_oracle(ctx: AcceptanceContext) -> CriterionResult:
    """Fresh solve at the symmetric point against the explicit profile."""
    t0 = time.perf_counter()
    cfg = ctx.config
    pair = pair_from_p(4, 3)
    grid = RadialGrid.log_spaced(cfg.r_start, 50.0, per_decade=cfg.per_decade)
    gamma, prof = shoot_bisection(
        pair, bracket=(0.5, 2.0), grid=grid, rtol=cfg.ode_rtol, auto_expand=True
    )
    exact = 1.0 / (1.0 + grid.r**2 / 8.0)
    err = max(
        float(np.max(np.abs(prof.u - exact) / exact)),
        float(np.max(np.abs(prof.v - exact) / exact)),
    )
    gamma_dev = abs(gamma - 1.0)
    elapsed = time.perf_counter() - t0
    passed = err <= ORACLE_PROFILE_TOL and gamma_dev <= ORACLE_GAMMA_TOL and elapsed < 10.0
    detail = (
        f"max relative profile error {err:.3g} (tol {ORACLE_PROFILE_TOL:g}), "
        f"gamma deviation {gamma_dev:.3g} (tol {ORACLE_GAMMA_TOL:g})"
    )
    return CriterionResult(1, "closed-form oracle", passed, detail, elapsed)


def criterion_hyperbola_algebra(ctx: AcceptanceContext) -> CriterionResult:
    """Exponent identities on random pairs; inequality chain on the sub grid."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(_SAMPLER_SEED)
    worst = 0.0
    for N in range(3, 9):
        lo = 2.0 / (N - 2)
        for p in lo + 1e-3 + 10.0 * rng.random(100):
            res = scaling_exponent_identity(pair_from_p(N, float(p)))
            worst = max(worst, abs(res.hyperbola_residual), abs(res.alpha_beta_residual))
    lemma_holds = True
    checked = 0
    for N in range(3, 9):
        lo, hi = 2.0 / (N - 2), N / (N - 2.0)
        margin = 1e-6 * (hi - lo)
        for p in np.linspace(lo + margin, hi - margin, 257):
            pair = pair_from_p(N, float(p))
            if pair.regime is Regime.SUB_SERRIN:
                checked += 1
                lemma_holds = lemma_holds and check_inequality_lemma(pair).holds
    elapsed = time.perf_counter() - t0
    passed = worst <= ALGEBRA_TOL and lemma_holds and checked >= 1000 and elapsed < 1.0
    detail = (
        f"worst identity residual {worst:.3g} (tol {ALGEBRA_TOL:g}) over 600 pairs, "
        f"inequality chain holds on {checked} sub-Serrin grid points: {lemma_holds}"
    )
    return CriterionResult(2, "hyperbola algebra", passed, detail, elapsed)


def criterion_nondegeneracy_table(ctx: AcceptanceContext) -> CriterionResult:
    """Kernel census by both methods across channels 0..6 at all four points."""
    t0 = time.perf_counter()
    expected = list(expected_nullity_table(6))
    tables_ok = True
    agree = True
    cells = []
    for N, p in TEST_POINTS:
        shooting_table = []
        spectral_table = []
        for ell in range(7):
            shooting_table.append(ctx.shooting(N, p, ell).nullity)
            report = ctx.spectral(N, p, ell)
            spectral_table.append(report.nullity_spectral)
            agree = agree and report.agree
        tables_ok = tables_ok and shooting_table == expected and spectral_table == expected
        cells.append(f"{ctx.pair(N, p).label()}={''.join(map(str, shooting_table))}")
    elapsed = time.perf_counter() - t0
    passed = tables_ok and agree and elapsed < 300.0
    detail = (
        f"nullities {' '.join(cells)} (expected {''.join(map(str, expected))}), "
        f"methods agree on every channel: {agree}"
    )
    return CriterionResult(3, "nondegeneracy table", passed, detail, elapsed)


def criterion_generator_residuals(ctx: AcceptanceContext) -> CriterionResult:
    """Closed-form kernel elements solve their equations; eigenvectors match."""
    t0 = time.perf_counter()
    worst_residual = 0.0
    worst_match = 0.0
    for N, p in TEST_POINTS:
        profile = ctx.profile(N, p)
        pair = profile.pair
        for ell in (0, 1):
            worst_residual = max(
                worst_residual, channel_residual(known_generators(profile, ell))
            )
            report = ctx.spectral(N, p, ell)
            mask = (report.nodes > 0.1) & (report.nodes < 20.0)
            nodes = report.nodes[mask]
            u, du, v, dv = profile.eval(nodes)
            if ell == 1:
                gen_psi, gen_phi = du, dv
            else:
                gen_psi = nodes * du + pair.alpha * u
                gen_phi = nodes * dv + pair.beta * v
            got_psi, got_phi = report.psi[mask], report.phi[mask]
            scale = float(np.dot(got_psi, gen_psi) / np.dot(gen_psi, gen_psi))
            for got, ref in ((got_psi, gen_psi), (got_phi, gen_phi)):
                mismatch = float(
                    np.max(np.abs(got - scale * ref)) / np.max(np.abs(scale * ref))
                )
                worst_match = max(worst_match, mismatch)
    elapsed = time.perf_counter() - t0
    passed = worst_residual <= GENERATOR_TOL and worst_match <= EIGENVECTOR_TOL
    detail = (
        f"worst generator residual {worst_residual:.3g} (tol {GENERATOR_TOL:g}), "
        f"worst eigenvector mismatch {worst_match:.3g} (tol {EIGENVECTOR_TOL:g})"
    )
    return CriterionResult(4, "generator residuals", passed, detail, elapsed)


def criterion_balance_identity(ctx: AcceptanceContext) -> CriterionResult:
    """Flux balance at sampled radii; exact cancellation in channel 1."""
    t0 = time.perf_counter()
    R_values = (1.0, 5.0, 20.0)
    worst_poho = 0.0
    worst_exact = 0.0
    for N, p in TEST_POINTS:
        profile = ctx.profile(N, p)
        for solution in (
            known_generators(profile, 0),
            ctx.channel_run(N, p, 2, (1.0, 0.0)),
        ):
            residuals = check_poho_identity(profile, solution, R_values)
            worst_poho = max(worst_poho, float(np.max(residuals)))
        for solution in (
            known_generators(profile, 1),
            ctx.channel_run(N, p, 1, (0.3, -0.7)),
        ):
            worst_exact = max(worst_exact, channel1_exactness(profile, solution))
    elapsed = time.perf_counter() - t0
    passed = worst_poho <= POHO_TOL and worst_exact <= EXACTNESS_TOL
    detail = (
        f"worst normalized residual {worst_poho:.3g} at R in {{1, 5, 20}}, channels 0 and 2 "
        f"(tol {POHO_TOL:g}); worst channel-1 cancellation {worst_exact:.3g} (tol {EXACTNESS_TOL:g})"
    )
    return CriterionResult(5, "balance identity", passed, detail, elapsed)


def criterion_decay_laws(ctx: AcceptanceContext) -> CriterionResult:
    """Far-field exponents on wide grids against the regime laws."""
    t0 = time.perf_counter()
    failures = []
    stats = []
    for N, p in TEST_POINTS:
        profile = ctx.profile(N, p, wide=True)
        pair = profile.pair
        label = pair.label()
        fit = fit_decay(profile)
        v_dev = abs(fit.v_exponent - (N - 2.0)) / (N - 2.0)
        if v_dev > DECAY_RTOL:
            failures.append(f"{label} v-exponent {fit.v_exponent:.4g}")
        if (N, p) == (5, 1.0):
            u_target = p * (N - 2.0) - 2.0
            if abs(fit.u_exponent - u_target) / u_target > DECAY_RTOL:
                failures.append(f"{label} u-exponent {fit.u_exponent:.4g}")
        if (N, p) == (4, 3.0):
            if abs(fit.u_exponent - (N - 2.0)) / (N - 2.0) > DECAY_RTOL:
                failures.append(f"{label} u-exponent {fit.u_exponent:.4g}")
        if (N, p) == (3, 3.0):
            if not fit.log_flag:
                failures.append(f"{label} missing log correction")
            elif fit.drift > DRIFT_TOL:
                failures.append(f"{label} drift {fit.drift:.3g}")
        stats.append(f"{label} u={fit.u_exponent:.3f} v={fit.v_exponent:.3f}")
    elapsed = time.perf_counter() - t0
    passed = not failures and elapsed < 240.0
    detail = (
        f"fitted exponents {'; '.join(stats)} within {DECAY_RTOL:.0%} of the laws, "
        f"log-point drift gated at {DRIFT_TOL:.0%}"
    )
    if failures:
        detail = "off-law fits: " + "; ".join(failures)
    return CriterionResult(6, "decay laws", passed, detail, elapsed)


def criterion_monotonicity(ctx: AcceptanceContext) -> CriterionResult:
    """(0, 1) starts are strictly monotone; energy norms diverge as expected."""
    t0 = time.perf_counter()
    mono_ok = True
    worst_violation = 0.0
    divergence_ok = True
    for N, p in TEST_POINTS:
        profile = ctx.profile(N, p)
        pair = profile.pair
        s = (pair.p + 1.0) / pair.p
        for ell in (0, 2):
            solution = ctx.channel_run(N, p, ell, (0.0, 1.0))
            report = monotonicity_check(solution)
            mono_ok = mono_ok and report.is_strictly_monotone
            worst_violation = max(worst_violation, report.max_relative_violation)
            norm = energy_norm(solution.psi, profile.grid, pair.N, ell, s)
            if ell == 2 or (N, p) == (5, 1.0):
                divergence_ok = divergence_ok and norm == float("inf")
    elapsed = time.perf_counter() - t0
    passed = mono_ok and worst_violation <= 1e-10 and divergence_ok
    detail = (
        f"strictly monotone at channels 0 and 2 for all points "
        f"(worst relative violation {worst_violation:.3g}, tol 1e-10); truncated energy "
        f"norms diverge where the growth law says they must: {divergence_ok}"
    )
    return CriterionResult(7, "monotonicity and divergence", passed, detail, elapsed)


def criterion_bootstrap(ctx: AcceptanceContext) -> CriterionResult:
    """Decay bootstrap saturates at the regime limits, increasing on the way."""
    t0 = time.perf_counter()
    eta = BOOTSTRAP_ETA
    ok = True
    limits = []
    for N, p in TEST_POINTS:
        pair = ctx.pair(N, p)
        result = decay_bootstrap(pair, eta=eta)
        cpair, _ = pair.canonical()
        if cpair.regime is Regime.SUB_SERRIN:
            targets = (cpair.p * (N - 2.0) - 2.0, N - 2.0)
        else:
            targets = (N - 2.0, N - 2.0)
        alpha_inf, beta_inf = result.alphas[-1], result.betas[-1]
        ok = ok and abs(alpha_inf - targets[0]) <= 5.0 * eta
        ok = ok and abs(beta_inf - targets[1]) <= 5.0 * eta
        da = np.diff(result.alphas)
        db = np.diff(result.betas)
        # strictly increasing up to saturation; the fixed point may repeat once
        ok = ok and bool(np.all(da[:-1] > 0.0)) and da[-1] >= -1e-14
        ok = ok and (db.size == 0 or (bool(np.all(db[:-1] > 0.0)) and db[-1] >= -1e-14))
        limits.append(f"{pair.label()}=({alpha_inf:.4g}, {beta_inf:.4g})")
    elapsed = time.perf_counter() - t0
    detail = (
        f"limits {' '.join(limits)} within 5*eta of the regime targets "
        f"(eta {eta:g}), sequences increasing to saturation"
    )
    return CriterionResult(8, "bootstrap recursion", passed=bool(ok), detail=detail, elapsed=elapsed)


def _scale_csv_column(csv_path: Path, column: str, factor: float) -> None:
    lines = csv_path.read_text().splitlines()
    header = lines[0].split(",")
    idx = header.index(column)
    out = [lines[0]]
    for line in lines[1:]:
        parts = line.split(",")
        parts[idx] = f"{float(parts[idx]) * factor:.17g}"
        out.append(",".join(parts))
    csv_path.write_text("\n".join(out) + "\n")


def criterion_determinism(ctx: AcceptanceContext) -> CriterionResult:
    """Byte-identical reports under cache reuse; tamper detection."""
    t0 = time.perf_counter()
    base = Path(tempfile.mkdtemp(prefix="emdenlab-determinism-"))
    try:
        cfg = RunConfig(
            points=((4, 3.0),),
            ell_max=2,
            per_decade=200,
            nystrom_m=120,
            out_dir=str(base),
            workers=1,
        )
        report_path = base / "N4_p3" / "report.json"
        csv_path = base / "N4_p3" / "gs_N4_p3.csv"

        first = run(cfg)
        bytes_first = report_path.read_bytes()
        second = run(cfg)
        bytes_second = report_path.read_bytes()
        identical = bytes_first == bytes_second
        reused = all(rec.status == "cached" for rec in second.points)
        verdicts_ok = first.all_ok and second.all_ok

        # Gross tamper: off-equation data must be rejected at load time.
        _scale_csv_column(csv_path, "u", 1.3)
        try:
            load_profile(str(csv_path))
            gross_detected = False
        except CacheCorruptionError:
            gross_detected = True
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            recovered = run(cfg)
        warned = any("revalidation" in str(w.message) for w in caught)
        recovery_ok = (
            all(rec.status == "solved" for rec in recovered.points)
            and recovered.all_ok
            and report_path.read_bytes() == bytes_first
        )

        # Subtle tamper: consistent-looking derivative data slips the
        # residual check but must fail the identity gates.
        _scale_csv_column(csv_path, "du", 1.005)
        tampered = run(cfg)
        subtle_caught = all(
            rec.status == "cached" and rec.identities_ok is False and not rec.verdict_ok
            for rec in tampered.points
        )
    finally:
        shutil.rmtree(base, ignore_errors=True)
    elapsed = time.perf_counter() - t0
    passed = (
        identical and reused and verdicts_ok and gross_detected and warned and recovery_ok and subtle_caught
    )
    detail = (
        f"rerun report byte-identical: {identical}; cache reused: {reused}; "
        f"gross tamper rejected on load: {gross_detected}; recompute restores the exact "
        f"report: {recovery_ok}; subtle tamper caught by identity gates: {subtle_caught}"
    )
    return CriterionResult(9, "determinism and cache integrity", passed, detail, elapsed)


# ---------------------------------------------------------------------------
# suite driver


def all_criteria() -> tuple:
    return (
        criterion_closed_form_oracle,
        criterion_hyperbola_algebra,
        criterion_nondegeneracy_table,
        criterion_generator_residuals,
        criterion_balance_identity,
        criterion_decay_laws,
        criterion_monotonicity,
        criterion_bootstrap,
        criterion_determinism,
    )


def run_all(ctx: Optional[AcceptanceContext] = None) -> list:
    ctx = ctx if ctx is not None else AcceptanceContext()
    return [criterion(ctx) for criterion in all_criteria()]


@dataclass(frozen=True)
class VerifySummary:
    results: tuple
    report_path: Optional[str]

    @property
    def all_passed(self) -> bool:
        return all(res.passed for res in self.results)


def verify_suite(
    config: Optional[RunConfig] = None,
    *,
    tighten: float = 1.0,
    emit: Optional[Callable] = print,
) -> VerifySummary:
    """Run every criterion, print one verdict line each, write the report.

    ``tighten`` divides the configured solver and quadrature tolerances (a
    stability knob: the measured figures must not depend on them).  The
    acceptance gates themselves are fixed constants.  The JSON report
    excludes timings so repeated runs are byte-identical.
    """
    config = config if config is not None else RunConfig()
    if tighten != 1.0:
        if tighten <= 0.0:
            raise ValueError(f"tighten factor must be positive, got {tighten!r}")
        config = replace(
            config,
            ode_rtol=config.ode_rtol / tighten,
            quad_tol=config.quad_tol / tighten,
        )
    ctx = AcceptanceContext(config)
    results = run_all(ctx)
    for res in results:
        if emit is not None:
            emit(res.line())
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "format": "verify-v1",
        "criteria": [
            {"index": r.index, "name": r.name, "passed": r.passed, "detail": r.detail}
            for r in results
        ],
        "all_passed": all(r.passed for r in results),
    }
    from emdenlab.pipeline import _write_json

    report_path = _write_json(out / "verify_report.json", payload)
    return VerifySummary(results=tuple(results), report_path=str(report_path))
