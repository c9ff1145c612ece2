"""Young-function calculus for Orlicz-type energies.

The central object is :class:`YoungFunction`: an evaluable convex growth
function G with density g = G', index bounds sandwiching t*g(t)/G(t), and a
provenance label.  On top of it the module provides

* closed-form families (powers, powers with a logarithmic factor, piecewise
  powers) and combinators (weighted sums, maxima, compositions),
* numeric inversion and convex conjugation,
* the critical Sobolev conjugate, tabulated from the singular integral of
  the inverse, together with the composed gauge functions used to bound
  norms of level-set indicators,
* modulars, Luxemburg norms and a Chebyshev-type tail bound on weighted
  samples,
* the smallness threshold that drives superlinear truncation recursions
  to zero.

Every function is extended evenly to negative arguments, so G(|t|) is what
evaluation computes.  The index bounds (p_minus, p_plus) control all scaling
inequalities used downstream: the doubling bound G(2t) <= 2**p_plus * G(t),
the sum splitting G(a+b) <= (C/2)(G(a)+G(b)) with C = 2**p_plus, and the
two-sided sandwiches for G and its inverse under argument scaling.

All operations are pure functions of immutable inputs.  Objects that rely
on tabulation build their tables eagerly at construction, so evaluation is
read-only and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

__all__ = [
    "YoungFunctionError",
    "BracketError",
    "QuadratureError",
    "EmbeddingConditionError",
    "YoungFunction",
    "WeightedSamples",
    "make_power",
    "make_power_log",
    "make_piecewise_power",
    "combine",
    "scale_young",
    "normalize_young",
    "inverse",
    "conjugate",
    "sobolev_conjugate",
    "embedding_composition",
    "indicator_gauge",
    "modular",
    "luxemburg_norm",
    "luxemburg_scale",
    "chebyshev_bound",
    "sequence_threshold",
    "iterate_recursion",
    "young_from_config",
    "builtin_families",
    "builtin_embedding_params",
    "check_young_wellformed",
]


class YoungFunctionError(ValueError):
    """Parameters or data violate the Young-function contract."""


class BracketError(RuntimeError):
    """A monotone root bracket could not be established."""


class QuadratureError(RuntimeError):
    """Singular quadrature failed to converge."""


class EmbeddingConditionError(ValueError):
    """The growth/smoothness parameters violate s * p_plus < n."""


_GAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _GAUSS_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        _GAUSS_CACHE[order] = (x, w)
    return _GAUSS_CACHE[order]


def _call_even(fn: Callable[[np.ndarray], np.ndarray], t) -> np.ndarray | float:
    arr = np.abs(np.asarray(t, dtype=float))
    out = fn(np.atleast_1d(arr))
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


@dataclass(frozen=True)
class YoungFunction:
    """Convex growth function G with density g = G' and index bounds.

    ``evaluate`` and ``derivative`` act on nonnegative arguments; calls go
    through ``__call__`` which applies the even extension G(|t|).  The index
    bounds satisfy p_minus <= t*g(t)/G(t) <= p_plus on the sampled range,
    with 1 < p_minus <= p_plus < inf.  ``normalized`` records whether
    G(1) = 1.  ``inverse_fn``, when present, is a closed-form or tabulated
    inverse used to skip bisection.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    p_minus: float
    p_plus: float
    normalized: bool
    label: str
    inverse_fn: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)

    def __post_init__(self):
        if not (1.0 < self.p_minus <= self.p_plus < np.inf):
            raise YoungFunctionError(
                f"index bounds must satisfy 1 < p_minus <= p_plus < inf, got "
                f"({self.p_minus}, {self.p_plus}) for {self.label}"
            )

    def __call__(self, t):
        return _call_even(self.evaluate, t)

    def g(self, t):
        """Density g(|t|); callers needing the odd extension use slope_odd."""
        return _call_even(self.derivative, t)

    def slope_odd(self, t):
        """Odd extension sign(t) * g(|t|), the derivative of the even G."""
        arr = np.asarray(t, dtype=float)
        out = np.sign(arr) * _call_even(self.derivative, arr)
        if arr.ndim == 0:
            return float(out)
        return out

    def ratio(self, t):
        """Elasticity t * g(t) / G(t) for t > 0."""
        arr = np.abs(np.asarray(t, dtype=float))
        return arr * self.g(arr) / self(arr)

    @property
    def doubling_constant(self) -> float:
        """C = 2**p_plus, the doubling bound G(2t) <= C G(t)."""
        return 2.0 ** self.p_plus


@dataclass(frozen=True)
class WeightedSamples:
    """Sample values paired with positive quadrature weights (volume units)."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)
        if v.shape != w.shape or v.ndim != 1:
            raise ValueError("values and weights must be 1-d arrays of equal length")
        if not np.all(w > 0):
            raise ValueError("weights must be strictly positive")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))


# ---------------------------------------------------------------------------
# Closed-form families
# ---------------------------------------------------------------------------


def make_power(p: float) -> YoungFunction:
    """G(t) = t**p for an exponent p > 1; both index bounds equal p."""
    if not p > 1.0:
        raise YoungFunctionError(f"power exponent must exceed 1, got {p}")
    p = float(p)

    def ev(t):
        return t**p

    def dv(t):
        return p * t ** (p - 1.0)

    def inv(y):
        return y ** (1.0 / p)

    return YoungFunction(ev, dv, p, p, True, f"power({p:g})", inv)


def make_power_log(p: float) -> YoungFunction:
    """G(t) = t**p * (1 + |log t|), G(0) = 0.

    The elasticity t*g/G equals (p - 1 + p*L)/(1 + L) below t = 1 (with
    L = -log t) and (p + 1 + p*L)/(1 + L) above, so its range is the open
    interval (p-1, p+1).  For p > 2 these limits are recorded as the exact
    index bounds; for p in (1, 2] the infimum is <= 1 and the bounds are
    recorded from a dense log grid over [1e-6, 1e6] instead, which keeps the
    sampled elasticity inside (1, inf).  Construction fails if the sampled
    elasticity leaves (1, inf).  The function is convex for
    p >= (3 + sqrt(5)) / 2; below that g dips on a short interval left of 1.
    """
    if not p > 1.0:
        raise YoungFunctionError(f"power_log exponent must exceed 1, got {p}")
    p = float(p)

    def ev(t):
        out = np.zeros_like(t)
        pos = t > 0
        tp = t[pos]
        out[pos] = tp**p * (1.0 + np.abs(np.log(tp)))
        return out

    def dv(t):
        out = np.zeros_like(t)
        pos = t > 0
        tp = t[pos]
        lg = np.log(tp)
        # right-continuous at the kink t = 1
        out[pos] = np.where(
            tp >= 1.0,
            tp ** (p - 1.0) * (p + 1.0 + p * lg),
            tp ** (p - 1.0) * (p - 1.0 - p * lg),
        )
        return out

    if p > 2.0:
        p_minus, p_plus = p - 1.0, p + 1.0
    else:
        grid = np.logspace(-6, 6, 12 * 512 + 1)
        ratios = grid * dv(grid) / ev(grid)
        p_minus = float(np.min(ratios))
        p_plus = float(np.max(ratios))
        if p_minus <= 1.0:
            raise YoungFunctionError(
                f"power_log({p:g}): sampled elasticity leaves (1, inf); "
                f"minimum {p_minus:.6g}"
            )
    return YoungFunction(ev, dv, p_minus, p_plus, True, f"power_log({p:g})")


def make_piecewise_power(p: float, q: float) -> YoungFunction:
    """G(t) = t**p on [0, 1] and t**q beyond, continuous with G(1) = 1.

    Index bounds are (min(p, q), max(p, q)).  Convexity requires p <= q;
    the density is taken right-continuous at the junction.
    """
    if not (p > 1.0 and q > 1.0):
        raise YoungFunctionError(f"piecewise exponents must exceed 1, got ({p}, {q})")
    p, q = float(p), float(q)

    def ev(t):
        return np.where(t <= 1.0, t**p, t**q)

    def dv(t):
        return np.where(t < 1.0, p * t ** (p - 1.0), q * t ** (q - 1.0))

    def inv(y):
        return np.where(y <= 1.0, y ** (1.0 / p), y ** (1.0 / q))

    return YoungFunction(
        ev, dv, min(p, q), max(p, q), True, f"piecewise_power({p:g},{q:g})", inv
    )


# ---------------------------------------------------------------------------
# Combinators
# ---------------------------------------------------------------------------


def combine(
    kind: str,
    parts: Sequence[YoungFunction],
    coefficients: Optional[Sequence[float]] = None,
) -> YoungFunction:
    """Combine Young functions by weighted sum, pointwise max, or composition.

    Sums and maxima inherit [min p_minus, max p_plus]; compositions multiply
    the bounds of their parts.  Results are generally unnormalized; the
    ``normalized`` flag records whether G(1) = 1 happens to hold.
    """
    parts = list(parts)
    if not parts:
        raise YoungFunctionError("combine requires at least one part")

    if kind == "sum":
        if coefficients is None:
            coefficients = [1.0] * len(parts)
        coeffs = np.asarray(list(coefficients), dtype=float)
        if coeffs.shape != (len(parts),):
            raise YoungFunctionError("one coefficient per part is required")
        if np.any(coeffs < 0) or not np.any(coeffs > 0):
            raise YoungFunctionError("sum coefficients must be nonnegative, one positive")

        def ev(t):
            return sum(c * f.evaluate(t) for c, f in zip(coeffs, parts) if c > 0)

        def dv(t):
            return sum(c * f.derivative(t) for c, f in zip(coeffs, parts) if c > 0)

        active = [f for c, f in zip(coeffs, parts) if c > 0]
        p_minus = min(f.p_minus for f in active)
        p_plus = max(f.p_plus for f in active)
        label = "sum(" + ",".join(f"{c:g}*{f.label}" for c, f in zip(coeffs, parts)) + ")"
    elif kind == "max":
        if coefficients is not None:
            raise YoungFunctionError("max takes no coefficients")

        def ev(t):
            return np.maximum.reduce([f.evaluate(t) for f in parts])

        def dv(t):
            vals = np.stack([f.evaluate(t) for f in parts])
            slopes = np.stack([f.derivative(t) for f in parts])
            top = np.max(vals, axis=0)
            # right-continuous choice at crossings: steepest active branch
            tied = vals >= top * (1.0 - 1e-14)
            return np.max(np.where(tied, slopes, -np.inf), axis=0)

        p_minus = min(f.p_minus for f in parts)
        p_plus = max(f.p_plus for f in parts)
        label = "max(" + ",".join(f.label for f in parts) + ")"
    elif kind == "compose":
        if coefficients is not None:
            raise YoungFunctionError("compose takes no coefficients")

        def ev(t):
            v = t
            for f in reversed(parts):
                v = f.evaluate(v)
            return v

        def dv(t):
            v = t
            acc = np.ones_like(t)
            for f in reversed(parts):
                acc = acc * f.derivative(v)
                v = f.evaluate(v)
            return acc

        p_minus = float(np.prod([f.p_minus for f in parts]))
        p_plus = float(np.prod([f.p_plus for f in parts]))
        label = "compose(" + ",".join(f.label for f in parts) + ")"
    else:
        raise YoungFunctionError(f"unknown combinator kind {kind!r}")

    probe = float(ev(np.array([1.0]))[0])
    return YoungFunction(ev, dv, p_minus, p_plus, abs(probe - 1.0) <= 1e-12, label)


def scale_young(yf: YoungFunction, c: float) -> YoungFunction:
    """Value rescaling c * G.  Index bounds are unchanged."""
    if not c > 0:
        raise YoungFunctionError("scale factor must be positive")
    c = float(c)
    inv = None
    if yf.inverse_fn is not None:
        base_inv = yf.inverse_fn

        def inv(y):
            return base_inv(y / c)

    probe = c * float(yf.evaluate(np.array([1.0]))[0])
    return YoungFunction(
        lambda t: c * yf.evaluate(t),
        lambda t: c * yf.derivative(t),
        yf.p_minus,
        yf.p_plus,
        abs(probe - 1.0) <= 1e-12,
        f"{c:g}*{yf.label}",
        inv,
    )


def normalize_young(yf: YoungFunction) -> YoungFunction:
    """Rescale values by 1/G(1) so that G(1) = 1; indices are preserved."""
    g1 = float(yf.evaluate(np.array([1.0]))[0])
    if not np.isfinite(g1) or g1 <= 0:
        raise YoungFunctionError(f"cannot normalize {yf.label}: G(1) = {g1}")
    out = scale_young(yf, 1.0 / g1)
    return YoungFunction(
        out.evaluate,
        out.derivative,
        out.p_minus,
        out.p_plus,
        True,
        f"normalized({yf.label})",
        out.inverse_fn,
    )


# ---------------------------------------------------------------------------
# Inversion and conjugation
# ---------------------------------------------------------------------------


def _bisect_increasing(fn, target, *, iters: int = 110, max_expand: int = 400):
    """Solve fn(t) = target for nondecreasing fn with fn(0) = 0, fn -> inf.

    Vectorized bracket expansion followed by fixed-count geometric bisection,
    which keeps the result accurate in relative terms across hundreds of
    orders of magnitude.  At jump discontinuities of fn the iteration
    converges to the jump location, the right-continuous generalized
    inverse.
    """
    y = np.asarray(target, dtype=float)
    scalar = y.ndim == 0
    y = np.atleast_1d(y).astype(float)
    if np.any(y < 0) or not np.all(np.isfinite(y)):
        raise ValueError("inverse targets must be finite and nonnegative")
    lo = np.full_like(y, 1e-300)
    hi = np.ones_like(y)
    short = np.asarray(fn(hi)) < y
    for _ in range(max_expand):
        if not short.any():
            break
        lo[short] = hi[short]
        hi[short] *= 8.0
        if np.any(hi > 1e290):
            raise BracketError("bracket expansion exceeded floating-point range")
        short = np.asarray(fn(hi)) < y
    else:
        raise BracketError("no upper bracket found; malformed growth function")
    # geometric bisection: the log-interval halves every step, so ~110 steps
    # resolve any magnitude in [1e-300, 1e290] to full relative precision
    for _ in range(iters):
        mid = np.sqrt(lo * hi)
        left = np.asarray(fn(mid)) < y
        lo = np.where(left, mid, lo)
        hi = np.where(left, hi, mid)
    out = np.sqrt(lo * hi)
    out[y == 0.0] = 0.0
    return float(out[0]) if scalar else out


def inverse(yf: YoungFunction, y) -> float | np.ndarray:
    """Inverse G^{-1}(y) for y >= 0, monotone in y.

    Uses a closed-form inverse when the family provides one, otherwise
    monotone bisection on G.
    """
    arr = np.asarray(y, dtype=float)
    if np.any(arr < 0):
        raise ValueError("inverse targets must be nonnegative")
    if yf.inverse_fn is not None:
        out = yf.inverse_fn(np.atleast_1d(arr))
        return float(out[0]) if arr.ndim == 0 else np.asarray(out).reshape(arr.shape)
    return _bisect_increasing(lambda t: yf.evaluate(t), arr)


def conjugate(yf: YoungFunction) -> YoungFunction:
    """Complementary function sup_a { t a - G(a) }.

    Evaluation solves the first-order condition g(a) = t by monotone
    bisection; the derivative of the result is the right-continuous
    generalized inverse of g.  Index bounds swap and conjugate:
    (p_plus', p_minus') with r' = r / (r - 1).
    """

    def maximizer(t):
        return _bisect_increasing(lambda a: yf.derivative(a), t)

    def ev(t):
        a = maximizer(t)
        val = t * a - yf.evaluate(a)
        return np.maximum(val, 0.0)

    def dv(t):
        return maximizer(t)

    p_minus = yf.p_plus / (yf.p_plus - 1.0)
    p_plus = yf.p_minus / (yf.p_minus - 1.0)
    probe = float(ev(np.array([1.0]))[0])
    return YoungFunction(
        ev, dv, p_minus, p_plus, abs(probe - 1.0) <= 1e-12, f"conjugate({yf.label})"
    )


# ---------------------------------------------------------------------------
# Critical Sobolev conjugate
# ---------------------------------------------------------------------------


class _LogLogTable:
    """Monotone log-log interpolation with power-law extrapolation.

    ``derivative`` is the exact derivative of the interpolant itself (the
    interpolant is C1), so integrands tabulated here can be paired with
    gradients that match them to rounding error.
    """

    def __init__(self, x: np.ndarray, y: np.ndarray):
        self.logx = np.log(x)
        self.logy = np.log(y)
        self._interp = PchipInterpolator(self.logx, self.logy, extrapolate=False)
        self._dinterp = self._interp.derivative()
        self.slope_lo = (self.logy[1] - self.logy[0]) / (self.logx[1] - self.logx[0])
        self.slope_hi = (self.logy[-1] - self.logy[-2]) / (self.logx[-1] - self.logx[-2])

    def _eval(self, flat: np.ndarray, want_slope: bool):
        val = np.zeros_like(flat)
        slope = np.zeros_like(flat)
        pos = flat > 0.0
        lx = np.log(flat[pos])
        ly = np.empty_like(lx)
        ls = np.empty_like(lx)
        below = lx < self.logx[0]
        above = lx > self.logx[-1]
        inside = ~(below | above)
        ly[inside] = self._interp(lx[inside])
        ly[below] = self.logy[0] + self.slope_lo * (lx[below] - self.logx[0])
        ly[above] = self.logy[-1] + self.slope_hi * (lx[above] - self.logx[-1])
        val[pos] = np.exp(ly)
        if want_slope:
            ls[inside] = self._dinterp(lx[inside])
            ls[below] = self.slope_lo
            ls[above] = self.slope_hi
            slope[pos] = ls
        return val, slope

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        val, _ = self._eval(np.atleast_1d(arr).astype(float), False)
        return val.reshape(arr.shape) if arr.ndim else float(val[0])

    def derivative(self, x):
        arr = np.asarray(x, dtype=float)
        flat = np.atleast_1d(arr).astype(float)
        val, slope = self._eval(flat, True)
        out = np.zeros_like(flat)
        pos = flat > 0.0
        out[pos] = val[pos] * slope[pos] / flat[pos]
        return out.reshape(arr.shape) if arr.ndim else float(out[0])


def _head_integral(ginv, tau0: float, beta: float, s_over_n: float, atol: float) -> float:
    """Integral of G^{-1}(tau) * tau**(-1 - s/n) over (0, tau0].

    Substituting sigma = tau**beta with beta = 1/p_plus - s/n turns the
    worst-admissible integrand into a bounded one, so geometric bisection
    toward sigma = 0 with Gauss panels gains a factor ~2 per octave even for
    growth exponents near the embedding threshold.  Non-decaying panel
    contributions flag the integral as divergent.
    """
    if not beta > 0:
        raise QuadratureError("nonpositive head exponent; the integral diverges")
    x, w = _gauss(8)
    expo = -s_over_n / beta - 1.0
    total = 0.0
    hi = tau0**beta
    prev = None
    stall = 0
    for _ in range(400):
        lo = hi * 0.5
        mid = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x
        with np.errstate(under="ignore"):
            tau = mid ** (1.0 / beta)
            contrib = float(
                np.sum(w * ginv(tau) * mid**expo) * 0.5 * (hi - lo) / beta
            )
        total += contrib
        if prev is not None and prev > 0 and contrib >= prev:
            stall += 1
            if stall > 20:
                raise QuadratureError(
                    "integral of the inverse against the singular kernel "
                    "diverges near 0"
                )
        else:
            stall = 0
        if contrib < max(0.01 * atol, abs(total) * 1e-15):
            return total
        prev = contrib
        hi = lo
    raise QuadratureError("singular head integral failed to converge")


def sobolev_conjugate(
    yf: YoungFunction,
    s: float,
    n: int,
    *,
    tau_min: float = 1e-15,
    tau_max: float = 1e15,
    knots_per_decade: int = 512,
    atol: float = 1e-10,
) -> YoungFunction:
    """Critical conjugate G*: the function whose inverse is
    int_0^t G^{-1}(tau) * tau**(-(n+s)/n) dtau.

    Requires s * p_plus < n, which makes the integrand integrable at 0 and
    the integral divergent at infinity.  The inverse is tabulated on a log
    grid (geometric grading toward 0 for the singular head), then inverted
    through monotone log-log interpolation.  ``inverse_fn`` of the result is
    the tabulated integral itself.
    """
    if not (0.0 < s < 1.0):
        raise EmbeddingConditionError(f"smoothness order must lie in (0,1), got {s}")
    if n < 1:
        raise EmbeddingConditionError(f"dimension must be >= 1, got {n}")
    if not s * yf.p_plus < n:
        raise EmbeddingConditionError(
            f"s * p_plus = {s * yf.p_plus:.6g} must be < n = {n} for {yf.label}"
        )
    s_over_n = s / float(n)

    def ginv(tau):
        return np.asarray(inverse(yf, tau), dtype=float)

    decades = np.log10(tau_max) - np.log10(tau_min)
    m = int(round(decades * knots_per_decade)) + 1
    taus = np.logspace(np.log10(tau_min), np.log10(tau_max), m)

    beta = 1.0 / yf.p_plus - s_over_n
    head = _head_integral(ginv, taus[0], beta, s_over_n, atol)
    if head <= 0:
        raise QuadratureError("vanishing head integral; malformed growth function")

    x, w = _gauss(8)
    lo = taus[:-1]
    hi = taus[1:]
    mid = 0.5 * (hi + lo)[:, None] + 0.5 * (hi - lo)[:, None] * x[None, :]
    vals = ginv(mid.ravel()).reshape(mid.shape) * mid ** (-1.0 - s_over_n)
    segs = 0.5 * (hi - lo) * (vals @ w)
    wtab = head + np.concatenate(([0.0], np.cumsum(segs)))

    inv_table = _LogLogTable(taus, wtab)      # tau -> (G*)^{-1} value
    fwd_table = _LogLogTable(wtab, taus)      # t -> G*(t)

    p_star_minus = n * yf.p_minus / (n - s * yf.p_minus)
    p_star_plus = n * yf.p_plus / (n - s * yf.p_plus)

    def ev(t):
        return np.asarray(fwd_table(t), dtype=float)

    def dv(t):
        tau = np.asarray(fwd_table(t), dtype=float)
        out = np.zeros_like(tau)
        pos = tau > 0
        out[pos] = 1.0 / (ginv(tau[pos]) * tau[pos] ** (-1.0 - s_over_n))
        return out

    def inv(y):
        return np.asarray(inv_table(y), dtype=float)

    probe = float(ev(np.array([1.0]))[0])
    return YoungFunction(
        ev,
        dv,
        p_star_minus,
        p_star_plus,
        abs(probe - 1.0) <= 1e-12,
        f"sobolev_conjugate({yf.label};s={s:g},n={n})",
        inv,
    )


def embedding_composition(
    yf: YoungFunction, s: float, n: int, gstar: Optional[YoungFunction] = None
) -> YoungFunction:
    """The composition G* o G^{-1}, itself a Young function.

    Its Luxemburg norm bounds norms of superpositions G(u) in terms of the
    critical norm of u.  The elasticity of the composition at t is the ratio
    of the elasticities of G* and G at the common argument G^{-1}(t), so the
    index bounds are recorded from a dense sample of that ratio; the crude
    quotient of the individual extremes can dip below 1 for families with a
    wide index spread even though the composition is a Young function.
    """
    if gstar is None:
        gstar = sobolev_conjugate(yf, s, n)

    # tabulate eagerly: families without a closed-form inverse would
    # otherwise re-run a vector bisection inside every norm evaluation
    knots = np.logspace(-15.0, 15.0, 30 * 256 + 1)
    table = _LogLogTable(
        knots, np.asarray(gstar(np.asarray(inverse(yf, knots), dtype=float)))
    )

    def ev(t):
        return np.asarray(table(t), dtype=float)

    def dv(t):
        y = np.asarray(inverse(yf, t), dtype=float)
        gy = yf.derivative(y)
        out = np.zeros_like(y)
        pos = gy > 0
        out[pos] = gstar.derivative(y[pos]) / gy[pos]
        return out

    ys = np.asarray(inverse(yf, np.logspace(-8.0, 8.0, 3201)), dtype=float)
    ratios = gstar.ratio(ys) / yf.ratio(ys)
    p_minus = float(np.min(ratios))
    p_plus = float(np.max(ratios))
    if p_minus <= 1.0:
        raise YoungFunctionError(
            f"composition of {gstar.label} with the inverse of {yf.label} has "
            f"sampled elasticity {p_minus:.4g} <= 1"
        )
    probe = float(ev(np.array([1.0]))[0])
    return YoungFunction(
        ev,
        dv,
        p_minus,
        p_plus,
        abs(probe - 1.0) <= 1e-12,
        f"embedding_composition({yf.label};s={s:g},n={n})",
    )


def indicator_gauge(
    yf: YoungFunction, s: float, n: int, t, gstar: Optional[YoungFunction] = None
):
    """Gauge t * (G* o G^{-1})^{-1}(1/t) = t * G((G*)^{-1}(1/t)) for t > 0.

    Bounds the conjugate-norm of the indicator of a set of measure t.  For a
    pure power G = t**p it reduces to c * t**(s p / n).
    """
    if gstar is None:
        gstar = sobolev_conjugate(yf, s, n)
    arr = np.asarray(t, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("the gauge is defined for positive measures only")
    flat = np.atleast_1d(arr)
    w = np.asarray(gstar.inverse_fn(1.0 / flat), dtype=float)
    out = flat * np.asarray(yf.evaluate(w), dtype=float)
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


# ---------------------------------------------------------------------------
# Modulars, Luxemburg norms, tail bound
# ---------------------------------------------------------------------------


def modular(yf: YoungFunction, u: WeightedSamples) -> float:
    """Weighted sum of G(|values|); zero exactly when all values vanish."""
    return float(np.dot(u.weights, yf(np.abs(u.values))))


def luxemburg_scale(
    modular_of_scaled: Callable[[float], float],
    *,
    tol: float = 1e-11,
    max_expand: int = 2000,
) -> float:
    """Smallest lam with modular(u/lam) <= 1 for a strictly decreasing map.

    ``modular_of_scaled(lam)`` must return the modular of u/lam.  Returns the
    bisected lam with |modular - 1| <= tol.
    """
    lam = 1.0
    val = modular_of_scaled(lam)
    if val > 1.0:
        for _ in range(max_expand):
            lam *= 2.0
            val = modular_of_scaled(lam)
            if val <= 1.0:
                break
        else:
            raise BracketError("no upper bracket for the Luxemburg scale")
        lo, hi = lam / 2.0, lam
    else:
        for _ in range(max_expand):
            lam /= 2.0
            if lam < 1e-300:
                return 0.0
            val = modular_of_scaled(lam)
            if val > 1.0:
                break
        else:
            return 0.0
        lo, hi = lam, lam * 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = modular_of_scaled(mid)
        if abs(val - 1.0) <= tol:
            return mid
        if val > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def luxemburg_norm(yf: YoungFunction, u: WeightedSamples) -> float:
    """Luxemburg norm inf{ lam > 0 : modular(u/lam) <= 1 }; 0 for u = 0."""
    if not np.any(u.values != 0.0):
        return 0.0
    absvals = np.abs(u.values)
    return luxemburg_scale(lambda lam: float(np.dot(u.weights, yf(absvals / lam))))


def chebyshev_bound(yf: YoungFunction, u: WeightedSamples, t: float) -> tuple[float, float]:
    """Measure of {values >= t} and the modular bound modular / G(t).

    The returned pair satisfies measure <= bound; a violation raises,
    since it would mean the weighted counting itself is broken.
    """
    if not t > 0:
        raise ValueError("threshold must be positive")
    measure = float(np.sum(u.weights[u.values >= t]))
    bound = modular(yf, u) / float(yf(t))
    if measure > bound * (1.0 + 1e-12) + 1e-300:
        raise AssertionError(
            f"tail bound violated: measure {measure} > bound {bound} at t={t}"
        )
    return measure, bound


# ---------------------------------------------------------------------------
# Superlinear recursion threshold
# ---------------------------------------------------------------------------


def sequence_threshold(c_bar: float, c_tilde: float, delta: float) -> float:
    """Starting level below which a_{k+1} = c_bar * c_tilde**(k+1) * a_k**(1+delta)
    is guaranteed to decay to zero.

    Solving the recursion in log space shows the sharp threshold is
    c_bar**(-1/delta) * c_tilde**(-(1+delta)/delta**2); a factor 0.5 of
    safety is applied.  For c_bar, c_tilde >= 1 the resulting iterates are
    strictly decreasing from the first step.
    """
    if not (c_bar > 0 and c_tilde > 0):
        raise ValueError("recursion constants must be positive")
    if not (0.0 < delta < 1.0):
        raise ValueError("superlinearity exponent must lie in (0, 1)")
    log_eps = (
        np.log(0.5)
        - np.log(c_bar) / delta
        - np.log(c_tilde) * (1.0 + delta) / delta**2
    )
    if log_eps < -745.0:  # exp underflow; the guarantee degenerates to a_0 = 0
        return 0.0
    if log_eps > 690.0:  # constants below 1: any representable start decays
        return 1e300
    return float(np.exp(log_eps))


def iterate_recursion(
    c_bar: float, c_tilde: float, delta: float, a0: float, steps: int
) -> np.ndarray:
    """Worst-case iterates a_{k+1} = c_bar * c_tilde**(k+1) * a_k**(1+delta)."""
    out = np.empty(steps + 1)
    out[0] = a0
    a = float(a0)
    for k in range(steps):
        a = c_bar * c_tilde ** (k + 1) * a ** (1.0 + delta)
        a = min(a, 1e300)
        out[k + 1] = a
    return out


# ---------------------------------------------------------------------------
# Declarative descriptors and the built-in roster
# ---------------------------------------------------------------------------


def young_from_config(desc: dict) -> YoungFunction:
    """Build a Young function from a declarative record.

    Records are either a family with parameters, e.g.
    ``{"family": "power", "p": 2}``, or a combinator tree
    ``{"family": "sum", "parts": [...], "coefficients": [...]}``.  A record
    may be wrapped as ``{"family": "normalized", "base": {...}}`` or scaled
    with ``{"family": "scaled", "base": {...}, "factor": c}``.
    """
    if not isinstance(desc, dict) or "family" not in desc:
        raise YoungFunctionError(f"malformed growth-function record: {desc!r}")
    fam = desc["family"]
    if fam == "power":
        return make_power(desc["p"])
    if fam == "power_log":
        return make_power_log(desc["p"])
    if fam == "piecewise_power":
        return make_piecewise_power(desc["p"], desc["q"])
    if fam in ("sum", "max", "compose"):
        parts = [young_from_config(d) for d in desc["parts"]]
        return combine(fam, parts, desc.get("coefficients"))
    if fam == "normalized":
        return normalize_young(young_from_config(desc["base"]))
    if fam == "scaled":
        return scale_young(young_from_config(desc["base"]), desc["factor"])
    raise YoungFunctionError(f"unknown growth-function family {fam!r}")


def builtin_families() -> dict[str, YoungFunction]:
    """Roster of representative instances used by the verification suites."""
    return {
        "power2": make_power(2.0),
        "power3.5": make_power(3.5),
        "piecewise2_3": make_piecewise_power(2.0, 3.0),
        "powerlog3": make_power_log(3.0),
        "summix": normalize_young(combine("sum", [make_power(2.0), make_power(3.0)])),
    }


def builtin_embedding_params() -> dict[str, tuple[float, int]]:
    """Per-roster (s, n) pairs satisfying s * p_plus < n."""
    return {
        "power2": (0.5, 2),
        "power3.5": (0.5, 2),
        "piecewise2_3": (0.5, 2),
        "powerlog3": (0.45, 2),
        "summix": (0.5, 2),
    }


def check_young_wellformed(
    yf: YoungFunction, ts: Optional[np.ndarray] = None, *, check_convexity: bool = True
) -> dict:
    """Sampled structural checks: G(0) = 0, strict increase, convexity,
    elasticity inside the declared bounds, and the doubling inequality.

    Returns a dict of worst-case margins (nonnegative means satisfied).
    """
    if ts is None:
        ts = np.logspace(-3, 3, 601)
    vals = yf(ts)
    g0 = float(yf(0.0))
    increase = float(np.min(np.diff(vals)))
    ratios = yf.ratio(ts)
    lower = float(np.min(ratios - yf.p_minus))
    upper = float(np.min(yf.p_plus - ratios))
    doubled = yf.doubling_constant * vals
    doubling = float(np.min((doubled - yf(2.0 * ts)) / doubled))
    report = {
        "g_at_zero": g0,
        "strict_increase_margin": increase,
        "elasticity_lower_margin": lower,
        "elasticity_upper_margin": upper,
        "doubling_margin": doubling,
    }
    if check_convexity:
        # finite-difference convexity on a uniform refinement of each decade
        tt = np.linspace(ts[0], ts[-1], 2048)
        vv = yf(tt)
        second = vv[2:] - 2.0 * vv[1:-1] + vv[:-2]
        report["convexity_margin"] = float(np.min(second))
    return report
