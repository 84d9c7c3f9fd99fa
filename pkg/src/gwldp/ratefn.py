"""Cramer rate functions for empirical means of branching-process quantities.

Everything here is a Legendre-Fenchel transform sup{theta*x - Lambda(theta)}
of some cumulant generating function Lambda.  Two construction routes exist
for most rates:

* closed forms that compose the offspring rate I_f and the initial-population
  rate I_g (progeny rate y*I_f((y-1)/y), bivariate rate, the two estimator
  rates, and the variational mean-initial rate), and
* direct numerical conjugates of the relevant cgf, which serve as independent
  oracles for the closed forms.

The conjugate solver is derivative-free: the dual root of Lambda'(theta) = x
is bracketed by exponential expansion and bisected, with Lambda' estimated by
central differences.  Domain edges (finite radius of the generating function)
are detected through infinite evaluations; suprema attained at an edge are
refined on a geometric grid, and brackets that exceed |theta| = 700 report the
capped value with a saturation marker, since exp overflows just beyond there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import offspring as off
from . import progeny as prog
from .errors import HypothesisError
from .offspring import Pmf
from .progeny import ProgenyModel

THETA_CAP = 700.0       # |theta| beyond which exp(theta) is numerically unusable
THETA_TOL = 1e-11       # bisection tolerance on the dual variable
REFINE_TOL = 1e-8       # successive-estimate tolerance for edge suprema
GOLDEN_TOL = 1e-9       # interval tolerance for 1-D golden-section searches

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class CgfEvaluator:
    """A cumulant generating function Lambda(theta) = log E[exp(theta*W)].

    Carries the support metadata the conjugate solver needs for the exact
    boundary values: the rate at the minimum (maximum) support point of W is
    -log P(W = min) (resp. max), attained as theta -> -inf (+inf).
    """

    fn: Callable[[float], float]
    mean: float
    theta_max: float
    support_min: float
    support_max: float
    log_mass_min: float
    log_mass_max: float | None = None


@dataclass(frozen=True)
class RateValue:
    """A rate-function evaluation.

    ``argmax_theta`` is the optimizing dual variable when the supremum is
    interior, or a marker string when it is attained at or toward a boundary
    ("support_min", "support_max", "theta_max") or was capped ("theta_cap").
    ``route`` records the construction path: closed, direct, or oracle.
    """

    value: float
    argmax_theta: float | str | None
    route: str = "direct"
    argmin_z: float | None = None


def _safe_log(p: float) -> float:
    return math.log(p) if p > 0.0 else -math.inf


def _log_pgf_stable(pmf: Pmf, log_s: float) -> float:
    """log f(s) at s = exp(log_s), stable for very negative and large log_s."""
    if log_s > 708.0:
        return math.inf
    fam = pmf.family
    if fam == "bernoulli":
        p = pmf.params["p"]
        if p == 0.0:
            return 0.0
        if p == 1.0:
            return log_s
        return float(np.logaddexp(math.log(1.0 - p), math.log(p) + log_s))
    if fam == "geometric":
        a = pmf.params["a"]
        if log_s >= -math.log(a):
            return math.inf
        return math.log(1.0 - a) - math.log1p(-a * math.exp(log_s))
    if fam == "poisson":
        lam = pmf.params["lambda"]
        return lam * math.expm1(log_s)
    pos = pmf.probs > 0.0
    sup = pmf.support[pos].astype(np.float64)
    probs = pmf.probs[pos]
    rel = sup - sup[0]
    with np.errstate(over="ignore"):
        acc = float(np.dot(probs, np.exp(log_s * rel)))
    if not math.isfinite(acc):
        return math.inf
    return log_s * float(sup[0]) + math.log(acc)


def cgf_of_pmf(pmf: Pmf) -> CgfEvaluator:
    """Cgf of an integer law W ~ pmf: Lambda(theta) = log f(exp(theta)).

    Uses the exact family closed form where tagged, so truncated storage does
    not bias the transform.
    """
    dom = off.gen_fn_domain(pmf)
    pos = pmf.probs > 0.0
    s_min = float(pmf.support[pos][0])
    if pmf.family in ("geometric", "poisson"):
        s_max, log_mass_max = math.inf, None
    else:
        s_max = float(pmf.support[pos][-1])
        log_mass_max = _safe_log(float(pmf.probs[pos][-1]))
    return CgfEvaluator(
        fn=lambda theta: _log_pgf_stable(pmf, theta),
        mean=off.mean_exact(pmf),
        theta_max=dom.theta_max,
        support_min=s_min,
        support_max=s_max,
        log_mass_min=_safe_log(float(pmf.probs[pos][0])),
        log_mass_max=log_mass_max,
    )


def _finiteness_sup(fn: Callable[[float], float], cap: float = THETA_CAP) -> float:
    """Right boundary of {theta >= 0 : fn(theta) < inf}, located by bisection."""
    if math.isfinite(fn(cap)):
        return math.inf
    lo, hi = 0.0, cap
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if math.isfinite(fn(mid)):
            lo = mid
        else:
            hi = mid
    return lo


def cgf_progeny_unit(f: Pmf) -> CgfEvaluator:
    """Cgf of the unit-start total progeny: Lambda(beta) = log G(exp(beta)).

    P(Y = 1) equals the offspring mass at zero, which pins the exact boundary
    value of the conjugate at y = 1.
    """
    _require_subcritical(f)

    def fn(beta: float) -> float:
        v = prog.total_progeny_pgf(f, math.exp(min(beta, 708.0)))
        return math.log(v) if math.isfinite(v) and v > 0.0 else math.inf

    mu_f = off.mean_exact(f)
    if f.max_support == 0:
        s_max, log_mass_max = 1.0, 0.0   # no offspring ever: Y = 1 surely
    else:
        s_max, log_mass_max = math.inf, None
    return CgfEvaluator(
        fn=fn,
        mean=1.0 / (1.0 - mu_f),
        theta_max=_finiteness_sup(fn),
        support_min=1.0,
        support_max=s_max,
        log_mass_min=_safe_log(f.p0),
        log_mass_max=log_mass_max,
    )


def cgf_progeny_compound(model: ProgenyModel) -> CgfEvaluator:
    """Cgf of the total progeny with random start: log g(G(exp(beta)))."""
    _require_subcritical(model.f)
    f, g = model.f, model.g

    def fn(beta: float) -> float:
        v = prog.total_progeny_pgf(f, math.exp(min(beta, 708.0)))
        if not math.isfinite(v) or v <= 0.0:
            return math.inf
        return _log_pgf_stable(g, math.log(v))

    g_pos = g.probs > 0.0
    r_min = float(g.support[g_pos][0])
    if f.max_support == 0 and g.family not in ("geometric", "poisson"):
        s_max = float(g.support[g_pos][-1])
        log_mass_max = _safe_log(float(g.probs[g_pos][-1]))
    else:
        s_max, log_mass_max = math.inf, None
    # P(Y = r_min) = q_{r_min} * p_0^{r_min}: all initial individuals childless
    return CgfEvaluator(
        fn=fn,
        mean=model.nu,
        theta_max=_finiteness_sup(fn),
        support_min=r_min,
        support_max=s_max,
        log_mass_min=_safe_log(float(g.probs[g_pos][0])) + r_min * _safe_log(f.p0),
        log_mass_max=log_mass_max,
    )


# ---------------------------------------------------------------------------
# conjugate solver
# ---------------------------------------------------------------------------

def _dlam(fn: Callable[[float], float], theta: float) -> float:
    h = 1e-7 * max(1.0, abs(theta))
    upper = fn(theta + h)
    if math.isinf(upper):
        return math.inf
    lower = fn(theta - h)
    return (upper - lower) / (2.0 * h)


def _edge_supremum(fn, x: float, t: float, edge: float,
                   refine_tol: float) -> tuple[float, str]:
    # objective theta*x - Lambda(theta) still rising at the domain edge: chase
    # the limit on a geometric grid with one-step extrapolation
    prev = t * x - fn(t)
    for _ in range(200):
        t = t + 0.5 * (edge - t)
        lam = fn(t)
        if math.isinf(lam):
            edge = t
            continue
        v = t * x - lam
        if abs(v - prev) < refine_tol:
            return v + (v - prev), "theta_max"
        prev = v
    return prev, "theta_max"


def _conjugate_raw(fn, x: float, support_min: float, support_max: float,
                   log_mass_min: float, log_mass_max: float | None,
                   theta_tol: float = THETA_TOL,
                   refine_tol: float = REFINE_TOL) -> tuple[float, float | str]:
    """sup over theta of theta*x - fn(theta) for a convex cgf-like fn.

    Returns the raw supremum (which may be negative for shifted cgfs) plus
    the optimizing theta or a boundary marker.
    """
    if x < support_min:
        return math.inf, "below_support"
    if x == support_min:
        return -log_mass_min, "support_min"
    if math.isfinite(support_max):
        if x > support_max:
            return math.inf, "above_support"
        if x == support_max:
            assert log_mass_max is not None
            return -log_mass_max, "support_max"

    # ---- upper bracket end: tilted mean must reach x
    hi, edge = 1.0, None
    while not math.isfinite(fn(hi)):
        edge, hi = hi, 0.5 * hi
        if hi < 1e-300:
            raise HypothesisError("cgf is infinite on all of (0, 1e-300]")
    while True:
        d = _dlam(fn, hi)
        if math.isinf(d) or d >= x:
            break
        if edge is None:
            nxt = 2.0 * hi
            if nxt > THETA_CAP:
                t = THETA_CAP
                lam = fn(t)
                while math.isinf(lam) and t > hi:
                    t = 0.5 * (hi + t)
                    lam = fn(t)
                return t * x - lam, "theta_cap"
            if math.isfinite(fn(nxt)):
                hi = nxt
            else:
                edge = nxt
        else:
            if edge - hi <= 1e-13 * max(1.0, abs(edge)):
                return _edge_supremum(fn, x, hi, edge, refine_tol)
            nxt = 0.5 * (hi + edge)
            if math.isfinite(fn(nxt)):
                hi = nxt
            else:
                edge = nxt

    # ---- lower bracket end
    lo = -1.0
    while _dlam(fn, lo) > x:
        lo *= 2.0
        if lo < -THETA_CAP:
            lo = -THETA_CAP
            return lo * x - fn(lo), "theta_cap"
    if lo >= hi:
        lo = hi - 1.0

    # ---- bisection on the monotone derivative
    while hi - lo > theta_tol:
        mid = 0.5 * (lo + hi)
        if _dlam(fn, mid) < x:
            lo = mid
        else:
            hi = mid
    theta = 0.5 * (lo + hi)
    value = theta * x - fn(theta)
    # central differences lose the derivative signal when x sits within a
    # few ulps of a support boundary (the dual root runs off to ~|log ulp|);
    # the objective is concave, so a direct value climb recovers the loss
    step = max(1.0, 0.25 * abs(theta))
    for _ in range(500):
        if step <= 1e-11 or abs(theta) > THETA_CAP:
            break
        moved = False
        for cand in (theta + step, theta - step):
            lam = fn(cand)
            if math.isfinite(lam):
                v = cand * x - lam
                if v > value:
                    theta, value = cand, v
                    moved = True
                    break
        step = step * 2.0 if moved else step * 0.5
    return value, theta


def legendre(cgf: CgfEvaluator, x: float) -> RateValue:
    """Legendre-Fenchel transform of the cgf at x: sup{theta*x - Lambda(theta)}.

    A genuine rate value: nonnegative, zero exactly at the mean of the law.
    """
    value, argmax = _conjugate_raw(cgf.fn, x, cgf.support_min, cgf.support_max,
                                   cgf.log_mass_min, cgf.log_mass_max)
    return RateValue(_nonneg(value), argmax, route="direct")


def _nonneg(value: float) -> float:
    # clamp solver dust, normalizing -0.0 away for clean emission
    return value if value > 0.0 else 0.0


def golden_min(fn, lo: float, hi: float, tol: float = GOLDEN_TOL,
               max_iter: int = 300) -> tuple[float, float]:
    """Golden-section minimum of a unimodal function on [lo, hi]."""
    a, b = float(lo), float(hi)
    if b - a <= tol:
        mid = 0.5 * (a + b)
        return mid, fn(mid)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
    if fc <= fd:
        return c, fc
    return d, fd


# ---------------------------------------------------------------------------
# the one-dimensional rates
# ---------------------------------------------------------------------------

def _require_subcritical(f: Pmf) -> None:
    mu = off.mean_exact(f)
    if f.p0 <= 0.0 or mu >= 1.0:
        raise HypothesisError(
            "requires a strictly subcritical offspring law with mass at zero "
            f"(got p_0={f.p0!r}, mean={mu!r})"
        )


def _require_estimator_hypotheses(model: ProgenyModel) -> None:
    _require_subcritical(model.f)
    if not model.q0_zero:
        raise HypothesisError(
            "estimator rates need an initial law with no mass at zero "
            f"(got q_0={model.g.p0!r}), so the empirical means stay positive"
        )


def rate_offspring(f: Pmf, x: float) -> RateValue:
    """Rate function I_f of the empirical mean of i.i.d. offspring counts."""
    return legendre(cgf_of_pmf(f), x)


def rate_initial(g: Pmf, z: float) -> RateValue:
    """Rate function I_g of the empirical mean of i.i.d. initial populations."""
    return legendre(cgf_of_pmf(g), z)


def rate_progeny_direct(f: Pmf, y: float) -> RateValue:
    """Unit-start total-progeny rate by direct conjugation of log G(exp(beta)).

    Independent oracle for rate_progeny_closed: it never touches I_f.
    """
    return legendre(cgf_progeny_unit(f), y)


def rate_progeny_closed(f: Pmf, y: float) -> RateValue:
    """Unit-start total-progeny rate in closed form: y * I_f((y-1)/y) for y >= 1.

    Below y = 1 the rate is infinite, since the total progeny is at least 1
    almost surely.
    """
    _require_subcritical(f)
    if y < 1.0:
        return RateValue(math.inf, "below_support", route="closed")
    inner = rate_offspring(f, (y - 1.0) / y)
    return RateValue(y * inner.value, inner.argmax_theta, route="closed")


def _require_bivariate_hypotheses(model: ProgenyModel) -> None:
    _require_subcritical(model.f)
    if not math.isfinite(model.mu_g):
        raise HypothesisError("initial-population mean must be finite")
    if off.gen_fn_domain(model.g).theta_max <= 0.0:
        raise HypothesisError(
            "joint exponential moments must be finite near the origin; "
            "the initial law's generating function needs a radius above 1"
        )


def rate_bivariate(model: ProgenyModel, y: float, z: float) -> RateValue:
    """Joint rate for (mean total progeny, mean initial population).

    y * I_f((y-z)/y) + I_g(z) on {y >= z > 0}, I_g(0) at the origin, and
    infinite elsewhere (the sample cone Y >= Z >= 0 is almost sure).
    """
    _require_bivariate_hypotheses(model)
    if y == 0.0 and z == 0.0:
        inner = rate_initial(model.g, 0.0)
        return RateValue(inner.value, inner.argmax_theta, route="closed")
    if not (y >= z > 0.0):
        return RateValue(math.inf, "outside_cone", route="closed")
    part_f = rate_offspring(model.f, (y - z) / y)
    part_g = rate_initial(model.g, z)
    return RateValue(y * part_f.value + part_g.value, None, route="closed")


def rate_bivariate_oracle(model: ProgenyModel, y: float, z: float,
                          tol: float = GOLDEN_TOL) -> RateValue:
    """Joint rate by direct two-variable maximization of the exact joint cgf.

    The joint cgf is log g(e^gamma * G(e^beta)); the inner supremum over gamma
    is solved by the generic conjugate machinery on the scaled law, the outer
    concave problem over beta by golden section on an adaptive bracket.  This
    route never composes I_f and I_g, so it cross-checks the closed form.
    """
    _require_bivariate_hypotheses(model)
    f, g = model.f, model.g
    if y == 0.0 and z == 0.0:
        inner = rate_initial(g, 0.0)
        return RateValue(inner.value, inner.argmax_theta, route="oracle")
    if not (y >= z > 0.0):
        return RateValue(math.inf, "outside_cone", route="oracle")

    g_pos = g.probs > 0.0
    r_min = float(g.support[g_pos][0])
    log_q_min = _safe_log(float(g.probs[g_pos][0]))
    if g.family in ("geometric", "poisson"):
        r_max, log_q_max = math.inf, None
    else:
        r_max = float(g.support[g_pos][-1])
        log_q_max = _safe_log(float(g.probs[g_pos][-1]))
    if z < r_min or z > r_max:
        return RateValue(math.inf, "outside_support", route="oracle")

    def outer(beta: float) -> float:
        c = prog.total_progeny_pgf(f, math.exp(min(beta, 708.0)))
        if not math.isfinite(c) or c <= 0.0:
            return -math.inf
        log_c = math.log(c)
        inner, _ = _conjugate_raw(
            lambda gamma: _log_pgf_stable(g, gamma + log_c), z,
            support_min=r_min, support_max=r_max,
            log_mass_min=log_q_min + r_min * log_c,
            log_mass_max=None if log_q_max is None else log_q_max + r_max * log_c,
        )
        return beta * y + inner

    def beta_domain(beta: float) -> float:
        c = prog.total_progeny_pgf(f, math.exp(min(beta, 708.0)))
        return 0.0 if math.isfinite(c) else math.inf

    right = _finiteness_sup(beta_domain)
    if math.isinf(right):
        right = THETA_CAP
    left = -48.0
    marker: float | str
    while True:
        b_star, neg_val = golden_min(lambda b: -outer(b), left, right, tol=tol)
        if b_star > left + 1e-5:
            marker = b_star
            break
        if left <= -THETA_CAP:
            marker = "theta_cap"
            break
        left = max(2.0 * left, -THETA_CAP)
    return RateValue(_nonneg(-neg_val), marker, route="oracle")


def rate_estimator_ratio(model: ProgenyModel, x: float) -> RateValue:
    """Rate of the ratio estimator (Ybar - Zbar)/Ybar of the offspring mean.

    Equals -log g(exp(-I_f(x)/(1-x))) on [0, 1) and is infinite elsewhere;
    with no initial mass at zero, points where I_f is infinite also map to
    infinity through g(0) = 0.
    """
    _require_estimator_hypotheses(model)
    if not 0.0 <= x < 1.0:
        return RateValue(math.inf, "outside_domain", route="closed")
    c = rate_offspring(model.f, x).value / (1.0 - x)
    if math.isinf(c):
        return RateValue(math.inf, "offspring_rate_infinite", route="closed")
    value = -_log_pgf_stable(model.g, -c)
    return RateValue(_nonneg(value), None, route="closed")


def rate_estimator_deterministic(f: Pmf, mu_g: float, x: float) -> RateValue:
    """Rate of the ratio estimator when the initial population is mu_g surely.

    mu_g * I_f(x)/(1-x) on [0, 1), infinite elsewhere.  mu_g is a population
    size, at least 1; non-integer values are accepted for comparison sweeps.
    """
    _require_subcritical(f)
    if mu_g < 1.0:
        raise HypothesisError(
            f"deterministic initial population must be at least 1, got {mu_g!r}"
        )
    if not 0.0 <= x < 1.0:
        return RateValue(math.inf, "outside_domain", route="closed")
    value = mu_g * rate_offspring(f, x).value / (1.0 - x)
    return RateValue(value, None, route="closed")


def _min_bivariate_over_z(model: ProgenyModel, y: float,
                          tol: float = GOLDEN_TOL) -> tuple[float, float | None]:
    """inf over z of y*I_f((y-z)/y) + I_g(z), the marginal/contraction kernel.

    Both summands are infinite outside r_min <= z <= min(y, r_max), so the
    search bracket is exactly that interval; the objective is convex there.
    """
    g = model.g
    g_pos = g.probs > 0.0
    r_min = float(g.support[g_pos][0])
    if g.family in ("geometric", "poisson"):
        z_hi = y
    else:
        z_hi = min(y, float(g.support[g_pos][-1]))
    if r_min > z_hi:
        return math.inf, None

    def objective(z: float) -> float:
        return (y * rate_offspring(model.f, (y - z) / y).value
                + rate_initial(g, z).value)

    if z_hi - r_min <= tol:
        return objective(r_min), r_min
    z_star, v_star = golden_min(objective, r_min, z_hi, tol=tol)
    for z_end in (r_min, z_hi):
        v_end = objective(z_end)
        if v_end < v_star:
            z_star, v_star = z_end, v_end
    return v_star, z_star


def rate_estimator_meaninit(model: ProgenyModel, x: float,
                            tol: float = GOLDEN_TOL) -> RateValue:
    """Rate of the estimator (Ybar - mu_g)/Ybar, by the variational formula.

    Minimizes the joint rate along y = mu_g/(1-x) over the initial-mean
    variable z.  For a childless offspring law the minimizer is pinned at
    z = mu_g/(1-x) and the rate collapses to I_g there, which also yields the
    finite range x >= 1 - mu_g/r_min.
    """
    _require_estimator_hypotheses(model)
    if x >= 1.0:
        return RateValue(math.inf, "outside_domain", route="direct")
    y0 = model.mu_g / (1.0 - x)
    if model.mu_f == 0.0:
        inner = rate_initial(model.g, y0)
        return RateValue(inner.value, inner.argmax_theta, route="direct",
                         argmin_z=y0 if math.isfinite(inner.value) else None)
    value, z_star = _min_bivariate_over_z(model, y0, tol=tol)
    return RateValue(value, None, route="direct", argmin_z=z_star)


def rate_progeny_marginal(model: ProgenyModel, y: float) -> RateValue:
    """Rate of the mean total progeny with random start.

    Contraction of the joint rate onto its first coordinate; the unit-start
    closed form is used when the initial population is surely 1.
    """
    _require_subcritical(model.f)
    g = model.g
    if g.support.size == 1 and g.min_support == 1:
        return rate_progeny_closed(model.f, y)
    value, z_star = _min_bivariate_over_z(model, y)
    return RateValue(value, None, route="closed", argmin_z=z_star)


def ratio_rate_via_contraction(model: ProgenyModel, x: float,
                               tol: float = GOLDEN_TOL) -> RateValue:
    """Ratio-estimator rate recomputed as inf over z of the joint rate.

    Minimizes rate_bivariate(z/(1-x), z) over z; independent oracle for
    rate_estimator_ratio, exercising the contraction along (y-z)/y = x.
    """
    _require_estimator_hypotheses(model)
    if not 0.0 <= x < 1.0:
        return RateValue(math.inf, "outside_domain", route="oracle")
    g = model.g
    g_pos = g.probs > 0.0
    r_min = float(g.support[g_pos][0])
    if g.family in ("geometric", "poisson"):
        z_hi = r_min + 80.0   # convex objective grows linearly; generous cap
    else:
        z_hi = float(g.support[g_pos][-1])

    def objective(z: float) -> float:
        return rate_bivariate(model, z / (1.0 - x), z).value

    if z_hi - r_min <= tol:
        return RateValue(objective(r_min), None, route="oracle", argmin_z=r_min)
    z_star, v_star = golden_min(objective, r_min, z_hi, tol=tol)
    for z_end in (r_min, z_hi):
        v_end = objective(z_end)
        if v_end < v_star:
            z_star, v_star = z_end, v_end
    return RateValue(v_star, None, route="oracle", argmin_z=z_star)


# ---------------------------------------------------------------------------
# rate comparison table
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateComparison:
    """One row of the random-start vs deterministic-start comparison."""

    x: float
    j_random: float
    j_diamond: float
    i_f: float
    leq_ok: bool
    strict: bool
    chain_ok: bool | None
    extrapolated: bool


def compare_rates(model: ProgenyModel, x_grid) -> list[RateComparison]:
    """Tabulate J_random <= J_diamond (Jensen ordering) over a grid.

    The deterministic-start rate is evaluated with the model's mu_g; when
    mu_g is not an integer the row is flagged extrapolated, since the
    deterministic comparison process has an integer initial population.
    A chain flag additionally records J_diamond > I_f > 0 on (0,1) away
    from the offspring mean whenever mu_g >= 1.
    """
    _require_estimator_hypotheses(model)
    mu_g = model.mu_g
    extrapolated = abs(mu_g - round(mu_g)) > 1e-12
    rows = []
    for x in x_grid:
        x = float(x)
        j_rand = rate_estimator_ratio(model, x).value
        j_diam = rate_estimator_deterministic(model.f, mu_g, x).value
        i_f = rate_offspring(model.f, x).value
        leq_ok = j_rand <= j_diam + 1e-10
        both_finite = math.isfinite(j_rand) and math.isfinite(j_diam)
        strict = both_finite and (j_diam - j_rand) > 1e-12
        if 0.0 < x < 1.0 and x != model.mu_f and mu_g >= 1.0:
            chain_ok: bool | None = j_diam > i_f > 0.0
        else:
            chain_ok = None
        rows.append(RateComparison(x, j_rand, j_diam, i_f, leq_ok, strict,
                                   chain_ok, extrapolated))
    return rows
