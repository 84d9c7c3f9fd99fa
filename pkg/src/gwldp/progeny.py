"""Total progeny of a branching process: distribution, generating function, mean.

With offspring law f (mass p_h, mean mu_f) and initial-population law g, the
process dies out almost surely when p_0 > 0 and mu_f <= 1, and the total
progeny Y (all individuals ever alive) is then a proper random variable.
Its unit-start law follows from the offspring law by the Dwass identity
pi_k = (1/k) * (p^{*k})_{k-1} and its generating function G solves the fixed
point G(s) = s * f(G(s)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import offspring as off
from .errors import ConvergenceError, HypothesisError
from .offspring import Pmf

FIXED_POINT_TOL = 1e-14
FIXED_POINT_MAX_ITER = 10 ** 6
NEWTON_RESIDUAL = 1e-12
NEWTON_MAX_ITER = 200


@dataclass(frozen=True)
class ProgenyModel:
    """An offspring law paired with an initial-population law.

    Carries the derived quantities used everywhere downstream: exact means,
    the total-progeny mean nu = mu_g / (1 - mu_f), and extinction
    probabilities for unit and random starts.
    """

    f: Pmf
    g: Pmf
    mu_f: float
    mu_g: float
    nu: float
    p_ext_unit: float
    p_ext: float
    subcritical_strict: bool
    q0_zero: bool


def build_model(f: Pmf, g: Pmf) -> ProgenyModel:
    mu_f = off.mean_exact(f)
    mu_g = off.mean_exact(g)
    if mu_f < 1.0:
        nu = mu_g / (1.0 - mu_f)
    elif mu_f == 1.0:
        nu = math.inf if mu_g > 0.0 else 0.0
    else:
        nu = math.nan  # supercritical: total progeny defective
    p_unit = extinction_probability(f)
    return ProgenyModel(
        f=f,
        g=g,
        mu_f=mu_f,
        mu_g=mu_g,
        nu=nu,
        p_ext_unit=p_unit,
        p_ext=off.pgf_exact(g, p_unit),
        subcritical_strict=mu_f < 1.0,
        q0_zero=g.p0 == 0.0,
    )


def extinction_probability(f: Pmf, tol: float = FIXED_POINT_TOL,
                           max_iter: int = FIXED_POINT_MAX_ITER) -> float:
    """Minimal fixed point of the offspring generating function on [0, 1].

    Returns exactly 1.0 in the almost-sure-extinction regime (p_0 > 0 and
    mu_f <= 1); otherwise iterates s <- f(s) from 0, which increases
    monotonically to the minimal root.
    """
    if f.p0 > 0.0 and off.mean_exact(f) <= 1.0:
        return 1.0
    s = 0.0
    for _ in range(max_iter):
        s_next = off.pgf_exact(f, s)
        if abs(s_next - s) < tol:
            return s_next
        s = s_next
    raise ConvergenceError(
        f"extinction fixed point did not converge within {max_iter} iterations"
    )


def _require_proper(f: Pmf) -> None:
    mu = off.mean_exact(f)
    if f.p0 <= 0.0 or mu > 1.0:
        raise HypothesisError(
            "total progeny is defective unless the offspring law has mass at "
            f"zero and mean at most 1 (got p_0={f.p0!r}, mean={mu!r})"
        )


def total_progeny_pmf_dwass(f: Pmf, k_max: int) -> Pmf:
    """Unit-start total-progeny law {pi_k : 1 <= k <= k_max} by the Dwass identity.

    The k-fold convolution power of the stored offspring table is built
    incrementally from the (k-1)-fold one; every convolution is truncated at
    index k_max, which cannot disturb the coefficients pi_k with k <= k_max.
    """
    _require_proper(f)
    if k_max < 1:
        raise HypothesisError(f"k_max must be >= 1, got {k_max}")
    table = np.zeros(k_max + 1)
    table[f.support[f.support <= k_max]] = f.probs[f.support <= k_max]
    conv = table.copy()  # k-fold convolution power, truncated
    pi = np.zeros(k_max + 1)
    pi[1] = conv[0]
    for k in range(2, k_max + 1):
        conv = np.convolve(conv, table)[: k_max + 1]
        pi[k] = conv[k - 1] / k
    deficit = max(1.0 - float(pi.sum()), 0.0)
    return Pmf(np.arange(1, k_max + 1), pi[1:], truncation_deficit=deficit)


def total_progeny_pgf(f: Pmf, s: float,
                      tol: float = FIXED_POINT_TOL,
                      newton_residual: float = NEWTON_RESIDUAL) -> float:
    """Unit-start total-progeny generating function G(s), G = s * f(G).

    For s in [0, 1] the monotone iteration G <- s*f(G) from 0 converges to
    the minimal root.  For s > 1 the series is continued analytically as the
    smallest root > 0 of s*f(u) = u, found by damped Newton from u = 1;
    when no such root exists (s beyond the convergence domain) the infinite
    marker is returned.
    """
    _require_proper(f)
    if s < 0.0:
        raise HypothesisError(f"pgf argument must be nonnegative, got {s}")
    if s <= 1.0:
        g = 0.0
        for _ in range(FIXED_POINT_MAX_ITER):
            g_next = s * off.pgf_exact(f, g)
            if abs(g_next - g) < tol:
                return g_next
            g = g_next
        raise ConvergenceError(
            f"total-progeny fixed point did not converge at s={s!r}"
        )
    # analytic continuation: h(u) = s*f(u) - u is convex with h(1) = s-1 > 0;
    # Newton from u=1 walks monotonically up to the smallest root when the
    # slope there is negative, and the slope turning nonnegative certifies
    # that no root exists to the right.
    u = 1.0
    for _ in range(NEWTON_MAX_ITER):
        fu = off.pgf_exact(f, u)
        if math.isinf(fu):
            return math.inf
        h = s * fu - u
        if abs(h) < newton_residual:
            return u
        hp = s * off.pgf_derivative_exact(f, u) - 1.0
        if hp >= 0.0:
            return math.inf
        step = -h / hp
        u_next = u + step
        # float overshoot past the root flips the sign of h; damp back
        while s * off.pgf_exact(f, u_next) - u_next < -newton_residual and step > 1e-300:
            step *= 0.5
            u_next = u + step
        u = u_next
    return math.inf


def compound_pgf(model: ProgenyModel, s: float) -> float:
    """Generating function of the total progeny with random start: g(G(s))."""
    inner = total_progeny_pgf(model.f, s)
    if math.isinf(inner):
        return math.inf
    return off.pgf_exact(model.g, inner)


def progeny_mean(model: ProgenyModel) -> float:
    """Mean total progeny mu_g / (1 - mu_f), with the critical-case conventions."""
    if model.mu_f > 1.0:
        raise HypothesisError(
            f"total progeny mean requires offspring mean <= 1, got {model.mu_f!r}"
        )
    if model.mu_f == 1.0:
        return math.inf if model.mu_g > 0.0 else 0.0
    return model.mu_g / (1.0 - model.mu_f)
