"""Parameter algebra on the critical hyperbola.

A pair of exponents (p, q) with 1/(p+1) + 1/(q+1) = (N-2)/N drives everything
else in this package: the scaling exponents alpha = 2(p+1)/(pq-1) and
beta = 2(q+1)/(pq-1) (which satisfy alpha + beta = N - 2 exactly on the
hyperbola), the Serrin-threshold regime of the weaker exponent, and the
eta-slack bootstrap recursion that certifies the decay rates of the ground
state components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Union

__all__ = [
    "Regime",
    "CriticalPair",
    "ExponentResiduals",
    "InequalityReport",
    "BootstrapResult",
    "serrin_exponent",
    "pair_from_p",
    "scaling_exponent_identity",
    "check_inequality_lemma",
    "decay_bootstrap",
]

ExponentLike = Union[int, float, Fraction]

# Relative half-width of the float band around the Serrin threshold used when
# the exponent does not come in as an exact rational.
_SERRIN_BAND = 1e-12


class Regime(Enum):
    """Position of p relative to the Serrin exponent N/(N-2)."""

    SUB_SERRIN = "sub_serrin"
    LOG_CASE = "log_case"
    SUPER_SERRIN = "super_serrin"


def serrin_exponent(N: int) -> float:
    return N / (N - 2.0)


def _classify(N: int, p: float, p_exact: Optional[Fraction]) -> Regime:
    if p_exact is not None:
        serrin = Fraction(N, N - 2)
        if p_exact == serrin:
            return Regime.LOG_CASE
        return Regime.SUB_SERRIN if p_exact < serrin else Regime.SUPER_SERRIN
    serrin = serrin_exponent(N)
    if abs(p - serrin) <= _SERRIN_BAND * serrin:
        return Regime.LOG_CASE
    return Regime.SUB_SERRIN if p < serrin else Regime.SUPER_SERRIN


@dataclass(frozen=True)
class CriticalPair:
    """One point (p, q) on the critical hyperbola in dimension N.

    `regime` classifies this pair's own p; operations that assume q >= p
    canonicalize through `canonical()` and report the swap.
    """

    N: int
    p: float
    q: float
    alpha: float
    beta: float
    regime: Regime
    p_exact: Optional[Fraction] = None
    q_exact: Optional[Fraction] = None

    def canonical(self) -> tuple["CriticalPair", bool]:
        """Return (pair with p <= q, swapped flag)."""
        if self.p <= self.q:
            return self, False
        swapped = CriticalPair(
            N=self.N,
            p=self.q,
            q=self.p,
            alpha=self.beta,
            beta=self.alpha,
            regime=_classify(self.N, self.q, self.q_exact),
            p_exact=self.q_exact,
            q_exact=self.p_exact,
        )
        return swapped, True

    @property
    def serrin(self) -> float:
        return serrin_exponent(self.N)

    def label(self) -> str:
        """Filesystem-friendly tag, e.g. 'N5_p2.75'."""
        return f"N{self.N}_p{self.p:g}"


def pair_from_p(N: int, p: ExponentLike) -> CriticalPair:
    """Solve the hyperbola for q given (N, p).

    Requires integer N >= 3 and p > 2/(N-2) (below that bound the conjugate
    exponent is infinite or negative). Exact rationals are propagated so the
    Serrin comparison can be made exactly.
    """
    if not isinstance(N, int) or isinstance(N, bool):
        raise ValueError(f"dimension N must be an integer, got {N!r}")
    if N < 3:
        raise ValueError(f"dimension N must be >= 3, got {N}")

    p_exact: Optional[Fraction] = None
    if isinstance(p, (int, Fraction)) and not isinstance(p, bool):
        p_exact = Fraction(p)
    pf = float(p)
    if not math.isfinite(pf) or pf <= 2.0 / (N - 2):
        raise ValueError(f"p must be finite and exceed 2/(N-2) = {2.0 / (N - 2):g}, got {p!r}")

    q_exact: Optional[Fraction] = None
    if p_exact is not None:
        q_exact = 1 / (Fraction(N - 2, N) - 1 / (p_exact + 1)) - 1
        qf = float(q_exact)
    else:
        qf = 1.0 / ((N - 2.0) / N - 1.0 / (pf + 1.0)) - 1.0

    alpha = 2.0 * (pf + 1.0) / (pf * qf - 1.0)
    beta = 2.0 * (qf + 1.0) / (pf * qf - 1.0)
    return CriticalPair(
        N=N,
        p=pf,
        q=qf,
        alpha=alpha,
        beta=beta,
        regime=_classify(N, pf, p_exact),
        p_exact=p_exact,
        q_exact=q_exact,
    )


@dataclass(frozen=True)
class ExponentResiduals:
    """Residuals of the defining algebraic identities for one pair."""

    hyperbola_residual: float
    alpha_beta_residual: float
    alpha_def_residual: float
    beta_def_residual: float

    @property
    def max_residual(self) -> float:
        return max(
            abs(self.hyperbola_residual),
            abs(self.alpha_beta_residual),
            abs(self.alpha_def_residual),
            abs(self.beta_def_residual),
        )


def scaling_exponent_identity(pair: CriticalPair) -> ExponentResiduals:
    """Residuals of the hyperbola relation and alpha + beta = N - 2."""
    N, p, q = pair.N, pair.p, pair.q
    return ExponentResiduals(
        hyperbola_residual=1.0 / (p + 1.0) + 1.0 / (q + 1.0) - (N - 2.0) / N,
        alpha_beta_residual=pair.alpha + pair.beta - (N - 2.0),
        alpha_def_residual=pair.alpha - 2.0 * (p + 1.0) / (p * q - 1.0),
        beta_def_residual=pair.beta - 2.0 * (q + 1.0) / (p * q - 1.0),
    )


@dataclass(frozen=True)
class InequalityReport:
    """The strict chain (p(N-2)-2)(q-1) > 4-(N-2)(p-1) > 2 for sub-Serrin p."""

    lhs: float
    mid: float
    holds: bool
    swapped: bool


def check_inequality_lemma(pair: CriticalPair) -> InequalityReport:
    """Evaluate the sub-Serrin inequality chain on the canonical orientation.

    Only meaningful for 2/(N-2) < p < N/(N-2); other regimes raise.
    """
    cpair, swapped = pair.canonical()
    if cpair.regime is not Regime.SUB_SERRIN:
        raise ValueError(
            f"inequality chain requires sub-Serrin p; canonical p = {cpair.p:g} is {cpair.regime.value}"
        )
    N, p, q = cpair.N, cpair.p, cpair.q
    lhs = (p * (N - 2) - 2.0) * (q - 1.0)
    mid = 4.0 - (N - 2) * (p - 1.0)
    return InequalityReport(lhs=lhs, mid=mid, holds=bool(lhs > mid > 2.0), swapped=swapped)


@dataclass(frozen=True)
class BootstrapResult:
    """Iterates of the eta-slack decay recursion and their limits.

    alphas[n] bounds the first component's decay exponent after n rounds
    (alphas[0] = 0 is the trivial seed), betas[n] the second component's.
    Exponents here refer to the canonical orientation q >= p.
    """

    alphas: tuple
    betas: tuple
    eta: float
    swapped: bool
    regime: Regime

    @property
    def alpha_limit(self) -> float:
        return self.alphas[-1]

    @property
    def beta_limit(self) -> float:
        return self.betas[-1]

    @property
    def n_steps(self) -> int:
        return len(self.betas)


def decay_bootstrap(pair: CriticalPair, eta: float = 1e-3) -> BootstrapResult:
    """Run the decay-exponent bootstrap recursion with slack eta.

    Sub-Serrin:   beta_n  = min{N-2, (p(N-2)-2)(q-1) - 2 + alpha_n} - eta
    otherwise:    beta_n  = min{N-2, (N-2)(q-1) - 2 + alpha_n} - eta
    always:       alpha_{n+1} = min{N-2, (N-2)(p-1) - 2 + beta_n} - eta

    starting from alpha_1 = 0.  The recursion saturates in a handful of steps
    at ((N-2)p - 2, N-2) - O(eta) in the sub-Serrin regime and at
    (N-2, N-2) - O(eta) otherwise.
    """
    if not (0.0 < eta < 0.1):
        raise ValueError(f"eta must lie in (0, 0.1), got {eta!r}")
    cpair, swapped = pair.canonical()
    N, p, q = cpair.N, cpair.p, cpair.q
    sub = cpair.regime is Regime.SUB_SERRIN
    beta_gain = (p * (N - 2) - 2.0) * (q - 1.0) if sub else (N - 2.0) * (q - 1.0)
    alpha_gain = (N - 2.0) * (p - 1.0)

    alphas = [0.0]
    betas: list = []
    for _ in range(64):
        a = alphas[-1]
        b = min(N - 2.0, beta_gain - 2.0 + a) - eta
        a_next = min(N - 2.0, alpha_gain - 2.0 + b) - eta
        if b <= 0.0 or a_next <= alphas[0] - 1e-12:
            raise ArithmeticError(
                f"bootstrap produced a non-positive exponent at {cpair.label()}; invalid pair"
            )
        betas.append(b)
        converged = abs(a_next - a) < 1e-14 and len(betas) >= 2 and abs(betas[-1] - betas[-2]) < 1e-14
        alphas.append(a_next)
        if converged:
            break
    else:
        raise ArithmeticError(f"bootstrap failed to converge in 64 iterations at {cpair.label()}")

    return BootstrapResult(
        alphas=tuple(alphas),
        betas=tuple(betas),
        eta=eta,
        swapped=swapped,
        regime=cpair.regime,
    )
