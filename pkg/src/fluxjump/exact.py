"""Closed-form reference solutions for the two-flux interface problem.

Two constructions live here.  The *backward construction* prescribes a
piecewise-constant profile ``z`` (negative levels ``w_0 < ... < w_k`` on
``(0, R)``) that the solution's interface output must sweep through, and
produces piecewise-constant initial data together with an exact evaluator
for the resulting entropy solution.  The *oscillatory profile* is a chain of
algebraically tuned jump positions ``x_i`` and times ``t_k`` whose limit
profile at the final time has finite classical variation being fed by
initial data of finite total variation, while its fractional variation of a
critical order diverges; it is bridged into the backward construction by
sampling its profile ``rho`` into levels.

Throughout, the right flux is ``f`` (convex, minimum 0 at ``theta_f``) and
the left flux is ``g`` (convex, minimum at ``theta_g``); the reference family
is ``f = |u|**(p+1)``, ``g = u**2 - 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import (ConstructionError, DomainError, InfeasibilityError,
                     ParameterError)
from .flux import (FluxPair, FluxSpec, deriv_inv, inv_minus, inv_plus,
                   power_law_flux, shifted_quadratic)
from .rootfind import bisect


# -- fast closed-form flux operations ---------------------------------------

class _Ops:
    """Vectorized closed-form flux operations for one pair.

    Falls back to scalar bisection-based inverses for flux kinds without a
    closed form; the shipped kinds (power law, shifted quadratic) always hit
    the fast path.
    """

    def __init__(self, pair: FluxPair) -> None:
        self.pair = pair
        self.f = pair.right.eval
        self.fp = pair.right.deriv
        self.g = pair.left.eval
        self.gp = pair.left.deriv
        self.fp_inv = self._deriv_inv_fn(pair.right)
        self.gp_inv = self._deriv_inv_fn(pair.left)
        self.g_plus_inv = self._inv_fn(pair.left, +1)
        self.g_minus_inv = self._inv_fn(pair.left, -1)

    @staticmethod
    def _deriv_inv_fn(flux: FluxSpec) -> Callable[[np.ndarray], np.ndarray]:
        if flux.kind == "power_law":
            r = flux.param

            def fn(xi):
                xi = np.asarray(xi, dtype=float)
                return np.sign(xi) * (np.abs(xi) / r) ** (1.0 / (r - 1.0))
            return fn
        if flux.kind == "shifted_quadratic":
            return lambda xi: np.asarray(xi, dtype=float) / 2.0
        return np.vectorize(lambda xi: deriv_inv(flux, float(xi)))

    @staticmethod
    def _inv_fn(flux: FluxSpec, sign: int) -> Callable[[np.ndarray], np.ndarray]:
        if flux.kind == "power_law":
            r = flux.param

            def fn(y):
                y = np.asarray(y, dtype=float)
                return sign * y ** (1.0 / r)
            return fn
        if flux.kind == "shifted_quadratic":
            c = flux.param

            def fn(y):
                y = np.asarray(y, dtype=float)
                return sign * np.sqrt(y - c)
            return fn
        if sign > 0:
            return np.vectorize(lambda y: inv_plus(flux, float(y)))
        return np.vectorize(lambda y: inv_minus(flux, float(y)))

    def hplus(self, xi):
        return self.gp(self.g_plus_inv(self.f(self.fp_inv(xi))))


def hplus(pair: FluxPair, xi: float) -> float:
    """Interface transfer speed ``g' ∘ g_+^{-1} ∘ f ∘ (f')^{-1}`` at ``xi``.

    This maps the slope of a right-side characteristic to the slope of the
    left-side characteristic carrying the transmitted state.

    Args:
        pair: left/right flux pair.
        xi: right-side slope; nonnegative.

    Returns:
        The left-side slope.

    Raises:
        DomainError: naming the failing stage if any composition step leaves
            its domain (e.g. the flux value drops below ``min g``).
    """
    if xi < 0.0:
        raise DomainError(f"stage (f')^-1: slope must be nonnegative, got {xi!r}")
    try:
        c = deriv_inv(pair.right, float(xi))
    except Exception as exc:
        raise DomainError(f"stage (f')^-1: {exc}") from exc
    y = float(pair.right.eval(c))
    try:
        d = inv_plus(pair.left, y)
    except Exception as exc:
        raise DomainError(f"stage g_+^-1: {exc}") from exc
    return float(pair.left.deriv(d))


# -- oscillatory-profile parameters and sequences ----------------------------

class CounterexampleParams(NamedTuple):
    """Derived exponents of the oscillatory profile."""

    alpha: float
    beta: float
    lam: float


def counterexample_params(p: float, eps: float) -> CounterexampleParams:
    """Exponent triple ``(alpha, beta, lambda)`` for nondegeneracy ``p``.

    Args:
        p: right-flux nondegeneracy exponent, at least 1.
        eps: excess over the critical variation order; positive.

    Returns:
        ``alpha = (p/(p+1))(1 + (4p+2) eps / (3(2p+1)))``,
        ``beta  = (p/(p+1))(1 + 2(3p+2) eps / (3(2p+1)))``,
        ``lam   = 1 + 2 p eps / (3(2p+1))``; they satisfy
        ``beta - alpha = lam - 1``.

    Raises:
        ParameterError: if ``p < 1`` or ``eps <= 0``.
    """
    if p < 1.0:
        raise ParameterError(f"p must be at least 1, got {p!r}")
    if eps <= 0.0:
        raise ParameterError(f"eps must be positive, got {eps!r}")
    denom = 3.0 * (2.0 * p + 1.0)
    lam = 1.0 + 2.0 * p * eps / denom
    alpha = (p / (p + 1.0)) * (1.0 + (4.0 * p + 2.0) * eps / denom)
    beta = (p / (p + 1.0)) * (1.0 + 2.0 * (3.0 * p + 2.0) * eps / denom)
    return CounterexampleParams(alpha=alpha, beta=beta, lam=lam)


def _cp(p: float) -> float:
    return (p + 1.0) ** (-1.0 - 1.0 / p)


def _h(p: float, a) -> np.ndarray:
    """Interface arrival speed of the level carrying amplitude ``a``."""
    a = np.asarray(a, dtype=float)
    return 2.0 * np.sqrt(1.0 + _cp(p) * a ** (1.0 + 1.0 / p))


def _psi(p: float, a) -> np.ndarray:
    """Interpolant weight ``sqrt(1 + a**(1+1/p))``.

    The interval interpolant between ``(t1, a1)`` and ``(t2, a2)`` admits
    positive constants exactly when ``t2/t1 > psi(a1)/psi(a2)``; since the
    profile weight ``h`` discounts the amplitude term, that gap also forces
    ``t1 h(a1) < t2 h(a2)``.
    """
    a = np.asarray(a, dtype=float)
    return np.sqrt(1.0 + a ** (1.0 + 1.0 / p))


@dataclass(frozen=True)
class CounterexampleSpec:
    """The oscillatory profile: tuned sequences plus interval interpolants.

    Index convention: point ``j`` (0-based) corresponds to absolute index
    ``i = i0 + j``; ``a_even[j] = i**(-beta)``, ``a_odd[j] = i**(-alpha)``,
    ``t_even[j] = t_{2i}``, ``t_odd[j] = t_{2i+1}``, and
    ``xs[j] = (1 - t_{2i}) a_{2i}``.  Interval ``j`` spans
    ``(xs[j+1], xs[j])`` with boundary values ``t_odd[j]`` at ``xs[j]`` and
    ``t_even[j+1]`` at ``xs[j+1]``.

    Attributes:
        p: nondegeneracy exponent of the right flux.
        eps: variation-order excess.
        alpha, beta, lam: derived exponents.
        i0: first absolute index.
        mode: t-sequence recurrence used ("literal" or "greedy").
        seed_gap: seeded value of ``1 - t_{2 i0}``.
        margin: greedy-mode safety factor.
        a_even, a_odd, t_even, t_odd, xs: the sequences.
        c_const, d_const: per-interval interpolant constants ``(C, d)``.
        e_start, e_slope: per-interval stable parametrization of the same
            interpolant (the quantity ``1 - (xi + d)/C`` is linear in ``xi``).
    """

    p: float
    eps: float
    alpha: float
    beta: float
    lam: float
    i0: int
    mode: str
    seed_gap: float
    margin: float
    a_even: np.ndarray
    a_odd: np.ndarray
    t_even: np.ndarray
    t_odd: np.ndarray
    xs: np.ndarray
    c_const: np.ndarray
    d_const: np.ndarray
    e_start: np.ndarray
    e_slope: np.ndarray

    def __post_init__(self) -> None:
        if not (self.beta > self.alpha > 0.0):
            raise ConstructionError(
                f"need beta > alpha > 0, got alpha={self.alpha}, beta={self.beta}")
        if not self.lam > 1.0:
            raise ConstructionError(f"need lam > 1, got {self.lam}")
        if abs((self.beta - self.alpha) - (self.lam - 1.0)) > 1e-12:
            raise ConstructionError("beta - alpha must equal lam - 1")
        t_all = np.ravel(np.column_stack([self.t_even, self.t_odd]))
        if not (np.all(np.diff(t_all) > 0.0) and t_all[-1] < 1.0):
            raise ConstructionError("t-sequence must increase strictly below 1")
        if not np.all(np.diff(self.xs) < 0.0):
            raise ConstructionError("positions must decrease strictly")

    @property
    def n_points(self) -> int:
        """Number of constructed jump positions."""
        return len(self.xs)

    def indices(self) -> np.ndarray:
        """Absolute indices ``i0 .. i0 + n_points - 1``."""
        return self.i0 + np.arange(self.n_points)


def _interval_params(p: float, t1: float, t2: float, a1: float, a2: float,
                     j: int) -> tuple[float, float, float, float]:
    """Stable interpolant parameters (e_start, e_slope, C, d) for one interval.

    The interpolant family is ``psi(a) = C/(xi + d)`` with
    ``psi(a) = sqrt(1 + a**(1+1/p))``; tracking ``e = 1 - 1/psi`` (linear in
    ``xi``) avoids the catastrophic cancellation of forming ``C, d`` first.
    """
    q = 1.0 + 1.0 / p
    y1 = a1 ** q
    y2 = a2 ** q
    ps1 = math.sqrt(1.0 + y1)
    ps2 = math.sqrt(1.0 + y2)
    e1 = y1 / (ps1 * (ps1 + 1.0))
    e2 = y2 / (ps2 * (ps2 + 1.0))
    slope = (e2 - e1) / (t2 - t1)
    if not slope < 0.0:
        raise ConstructionError(f"interval {j}: interpolant slope not negative")
    c_const = -1.0 / slope
    d_const = c_const * (1.0 - e1) - t1
    if not (c_const > 0.0 and d_const > 0.0):
        raise ConstructionError(f"interval {j}: constants (C, d) not positive")
    return e1, slope, c_const, d_const


def build_sequences(p: float, eps: float, i0: int = 10, n_points: int = 16,
                    seed_gap: float = 0.5, mode: str = "literal",
                    margin: float = 1e-6) -> CounterexampleSpec:
    """Generate the tuned sequences ``a_k``, ``t_k`` and positions ``x_i``.

    The odd-time recurrence ``1 - t_{2k+1} = k**(alpha-beta) (1 - t_{2k})``
    is common to both modes.  The even-time update differs:

    * ``"literal"``: ``t_{2k+2} = t_{2k+1} + k**(-lam)``.  The additive gaps
      sum past 1 quickly, so only short chains are feasible; the failing
      index is reported.
    * ``"greedy"``: the smallest admissible gap,
      ``t_{2k+2} = t_{2k+1} psi(a_{2k+1})/psi(a_{2k+2}) (1+margin)`` with
      ``psi(a) = sqrt(1 + a**(1+1/p))``, the solvability threshold of the
      interval interpolant (which also keeps the profile monotone).  Long
      chains need small ``eps``: the positional identity contracts the
      remaining headroom ``1 - t`` by ``k**-(beta-alpha)`` every index, so
      any gap policy has a finite feasible horizon that grows as ``eps``
      shrinks.

    Args:
        p: nondegeneracy exponent, at least 1.
        eps: variation-order excess, positive.
        i0: first absolute index, at least 2.
        n_points: number of jump positions to construct, at least 2.
        seed_gap: seeded value of ``1 - t_{2 i0}`` in (0, 1).
        mode: "literal" or "greedy".
        margin: greedy-mode safety factor, positive.

    Returns:
        The validated spec.

    Raises:
        InfeasibilityError: if the recurrence drives ``t`` to 1 or breaks
            monotonicity before ``n_points`` terms; ``failing_index`` is the
            absolute index that failed.
        ParameterError: on malformed arguments.
    """
    alpha, beta, lam = counterexample_params(p, eps)
    if i0 < 2:
        raise ParameterError(f"i0 must be at least 2, got {i0!r}")
    if n_points < 2:
        raise ParameterError(f"n_points must be at least 2, got {n_points!r}")
    if not 0.0 < seed_gap < 1.0:
        raise ParameterError(f"seed_gap must lie in (0, 1), got {seed_gap!r}")
    if mode not in ("literal", "greedy"):
        raise ParameterError(f"mode must be 'literal' or 'greedy', got {mode!r}")
    if margin <= 0.0:
        raise ParameterError(f"margin must be positive, got {margin!r}")

    n = n_points
    a_even = np.empty(n)
    a_odd = np.empty(n)
    t_even = np.empty(n)
    t_odd = np.empty(n)
    t_even[0] = 1.0 - seed_gap
    for j in range(n):
        k = i0 + j
        a_even[j] = float(k) ** (-beta)
        a_odd[j] = float(k) ** (-alpha)
        t_odd[j] = 1.0 - float(k) ** (alpha - beta) * (1.0 - t_even[j])
        if not t_even[j] < t_odd[j] < 1.0:
            raise InfeasibilityError(
                f"odd-time recurrence failed at index {k}: "
                f"t_even={t_even[j]:.17g}, t_odd={t_odd[j]:.17g}",
                failing_index=k)
        if j + 1 < n:
            if mode == "literal":
                t_next = t_odd[j] + float(k) ** (-lam)
            else:
                a_next = float(k + 1) ** (-beta)
                t_next = (t_odd[j] * float(_psi(p, a_odd[j]) / _psi(p, a_next))
                          * (1.0 + margin))
            if not t_odd[j] < t_next < 1.0:
                raise InfeasibilityError(
                    f"even-time recurrence failed at index {k + 1}: "
                    f"t_even={t_next:.17g} after t_odd={t_odd[j]:.17g}",
                    failing_index=k + 1)
            t_even[j + 1] = t_next

    xs = (1.0 - t_even) * a_even
    xs_alt = (1.0 - t_odd) * a_odd
    gap = np.abs(xs - xs_alt) / np.maximum(1.0, xs)
    if gap.max() > 1e-14:
        raise ConstructionError(
            f"position identity violated by {gap.max():.3g} at index "
            f"{i0 + int(gap.argmax())}")

    lhs_h = t_odd[:-1] * _h(p, a_odd[:-1])
    rhs_h = t_even[1:] * _h(p, a_even[1:])
    bad = np.nonzero(lhs_h >= rhs_h)[0]
    if bad.size:
        j = int(bad[0])
        raise InfeasibilityError(
            f"profile monotonicity failed across index {i0 + j + 1}: "
            f"t_odd*h={lhs_h[j]:.17g} >= t_even*h={rhs_h[j]:.17g}",
            failing_index=i0 + j + 1)

    e_start = np.empty(n - 1)
    e_slope = np.empty(n - 1)
    c_const = np.empty(n - 1)
    d_const = np.empty(n - 1)
    for j in range(n - 1):
        e_start[j], e_slope[j], c_const[j], d_const[j] = _interval_params(
            p, t_odd[j], t_even[j + 1], a_odd[j], a_even[j + 1], i0 + j)
    spec = CounterexampleSpec(
        p=p, eps=eps, alpha=alpha, beta=beta, lam=lam, i0=i0, mode=mode,
        seed_gap=seed_gap, margin=margin, a_even=a_even, a_odd=a_odd,
        t_even=t_even, t_odd=t_odd, xs=xs, c_const=c_const, d_const=d_const,
        e_start=e_start, e_slope=e_slope)
    _check_interval_residuals(spec)
    return spec


def _check_interval_residuals(spec: CounterexampleSpec) -> None:
    """Verify the interpolant boundary equations to 1e-10 (relative)."""
    q = 1.0 + 1.0 / spec.p
    for j in range(spec.n_points - 1):
        c_const, d_const = spec.c_const[j], spec.d_const[j]
        for xi, x in ((spec.t_odd[j], spec.xs[j]),
                      (spec.t_even[j + 1], spec.xs[j + 1])):
            lhs = (x / (1.0 - xi)) ** q
            rhs = (c_const / (xi + d_const)) ** 2 - 1.0
            if abs(lhs - rhs) > 1e-10 * max(1.0, abs(lhs)):
                raise ConstructionError(
                    f"interval {spec.i0 + j}: boundary residual "
                    f"{abs(lhs - rhs):.3g} at xi={xi!r}")


def xi_interval(spec: CounterexampleSpec, i: int) -> tuple[float, float]:
    """Interpolant constants ``(C, d)`` of the interval left of ``x_i``.

    Args:
        spec: the profile.
        i: absolute index; interval ``i`` spans ``(x_{i+1}, x_i)``.

    Returns:
        The pair ``(C, d)``, both positive, satisfying the boundary
        conditions to 1e-10.

    Raises:
        ParameterError: if ``i`` has no interval in the spec.
    """
    j = i - spec.i0
    if not 0 <= j < spec.n_points - 1:
        raise ParameterError(
            f"index {i} outside constructed intervals "
            f"[{spec.i0}, {spec.i0 + spec.n_points - 2}]")
    return float(spec.c_const[j]), float(spec.d_const[j])


def _interval_e(spec: CounterexampleSpec, j: int, xi) -> np.ndarray:
    return spec.e_start[j] + (np.asarray(xi, dtype=float) - spec.t_odd[j]) \
        * spec.e_slope[j]


def _interval_a(spec: CounterexampleSpec, j: int, xi) -> np.ndarray:
    e = _interval_e(spec, j, xi)
    y = e * (2.0 - e) / (1.0 - e) ** 2
    return y ** (spec.p / (spec.p + 1.0))


def _interval_x(spec: CounterexampleSpec, j: int, xi) -> np.ndarray:
    return (1.0 - np.asarray(xi, dtype=float)) * _interval_a(spec, j, xi)


def _interval_rho(spec: CounterexampleSpec, j: int, xi) -> np.ndarray:
    return -np.asarray(xi, dtype=float) * _h(spec.p, _interval_a(spec, j, xi))


def _interval_xi_of_x(spec: CounterexampleSpec, j: int, x: float) -> float:
    return bisect(lambda z: _interval_x(spec, j, z) - x,
                  spec.t_odd[j], spec.t_even[j + 1])


def _interval_xi_of_rho(spec: CounterexampleSpec, j: int, level: float) -> float:
    return bisect(lambda z: _interval_rho(spec, j, z) - level,
                  spec.t_odd[j], spec.t_even[j + 1])


def _exact_position_index(spec: CounterexampleSpec, x: float) -> int | None:
    """0-based index ``j`` with ``xs[j] == x`` exactly, else None."""
    j = int(np.searchsorted(-spec.xs, -x, side="left"))
    if j < spec.n_points and spec.xs[j] == x:
        return j
    return None


def _locate_interval(spec: CounterexampleSpec, x: float) -> int:
    """Index ``j`` with ``xs[j+1] < x < xs[j]`` (xs decreasing; x interior)."""
    if not spec.xs[-1] < x < spec.xs[0]:
        raise DomainError(
            f"x={x!r} is not interior to the constructed range "
            f"[{spec.xs[-1]!r}, {spec.xs[0]!r}]")
    j = int(np.searchsorted(-spec.xs, -x, side="left"))
    return j - 1


def rho(spec: CounterexampleSpec, x: float) -> float:
    """The interface-level profile ``-t(x) h(x / (1 - t(x)))``.

    At a jump position ``x_i`` the left limit is returned (the value from
    the side nearer the interface); use :func:`rho_sided` for both limits.

    Args:
        spec: the profile.
        x: position in ``[x_last, x_first]``.

    Returns:
        The level; nondecreasing in ``x``.

    Raises:
        DomainError: if ``x`` lies outside the constructed range.
    """
    if not spec.xs[-1] <= x <= spec.xs[0]:
        raise DomainError(
            f"x={x!r} outside the constructed range "
            f"[{spec.xs[-1]!r}, {spec.xs[0]!r}]")
    j = _exact_position_index(spec, x)
    if j is not None:
        return rho_sided(spec, spec.i0 + j, "minus")
    j = _locate_interval(spec, x)
    xi = _interval_xi_of_x(spec, j, x)
    return float(_interval_rho(spec, j, xi))


def rho_sided(spec: CounterexampleSpec, i: int, side: str) -> float:
    """One-sided limit of :func:`rho` at the jump position ``x_i``.

    Args:
        spec: the profile.
        i: absolute index.
        side: "plus" for ``-t_{2i} h(a_{2i})``, "minus" for
            ``-t_{2i+1} h(a_{2i+1})``.
    """
    j = i - spec.i0
    if not 0 <= j < spec.n_points:
        raise ParameterError(f"index {i} outside the constructed range")
    if side == "plus":
        return float(-spec.t_even[j] * _h(spec.p, spec.a_even[j]))
    if side == "minus":
        return float(-spec.t_odd[j] * _h(spec.p, spec.a_odd[j]))
    raise ParameterError(f"side must be 'plus' or 'minus', got {side!r}")


def u_exact_at_T(spec: CounterexampleSpec, x: float, side: str = "right") -> float:
    """Final-time profile value at ``x``.

    Args:
        spec: the profile.
        x: a jump position ``x_i`` (matched exactly) or an interior point.
        side: at a jump position, "right" gives ``(a_{2i}/(p+1))**(1/p)``
            and "left" gives ``(a_{2i+1}/(p+1))**(1/p)``; ignored at
            interior points.

    Returns:
        The value of the profile (its right-continuous representative at
        interior points).

    Raises:
        DomainError: if ``x`` lies outside the constructed range.
        ParameterError: on a bad ``side``.
    """
    if side not in ("left", "right"):
        raise ParameterError(f"side must be 'left' or 'right', got {side!r}")
    if not spec.xs[-1] <= x <= spec.xs[0]:
        raise DomainError(
            f"x={x!r} outside the constructed range "
            f"[{spec.xs[-1]!r}, {spec.xs[0]!r}]")
    p = spec.p
    j = _exact_position_index(spec, x)
    if j is not None:
        a = spec.a_even[j] if side == "right" else spec.a_odd[j]
        return float((a / (p + 1.0)) ** (1.0 / p))
    j = _locate_interval(spec, x)
    xi = _interval_xi_of_x(spec, j, x)
    return float((_interval_a(spec, j, xi) / (p + 1.0)) ** (1.0 / p))


def jump_magnitude(spec: CounterexampleSpec, i) -> np.ndarray:
    """Exact jump size at ``x_i``: ``(1+p)**(-1/p) (i**(-a/p) - i**(-b/p))``.

    Valid for any absolute index ``i >= i0`` (the jump values depend only on
    the ``a``-sequence, not on the constructed horizon).
    """
    i = np.asarray(i, dtype=float)
    p = spec.p
    return (1.0 + p) ** (-1.0 / p) * (i ** (-spec.alpha / p)
                                      - i ** (-spec.beta / p))


def jump_series(spec: CounterexampleSpec, s: float, n_max: int) -> np.ndarray:
    """Partial sums ``S_N = sum_{i=i0}^{N} |jump at x_i|**(1/s)``.

    Args:
        spec: the profile.
        s: variation order in ``(0, 1]``.
        n_max: last absolute index.

    Returns:
        Array of partial sums for ``N = i0 .. n_max`` (closed-form jump
        magnitudes, so ``n_max`` may exceed the constructed horizon).

    Raises:
        ParameterError: if ``s`` is out of range or ``n_max < i0``.
    """
    if not 0.0 < s <= 1.0:
        raise ParameterError(f"order s must lie in (0, 1], got {s!r}")
    if n_max < spec.i0:
        raise ParameterError(f"n_max={n_max!r} is below i0={spec.i0!r}")
    idx = np.arange(spec.i0, n_max + 1, dtype=float)
    return np.cumsum(jump_magnitude(spec, idx) ** (1.0 / s))


# -- backward construction ---------------------------------------------------

@dataclass(frozen=True)
class BackwardData:
    """A prescribed interface-output profile and everything derived from it.

    The profile is ``z = w_j`` on ``(pos_j, pos_{j+1})`` for levels
    ``w_0 < ... < w_k < 0`` and positions ``0 = pos_0 < ... < pos_{k+1} = R``.
    Interior crossings ``i = 1..k`` carry backward crossing times
    ``tm_i > tp_i`` (levels ``w_{i-1}``, ``w_i``), right states
    ``cm_i > cp_i``, transmitted left states ``dm_i > dp_i``, shock speeds
    ``s_i`` (right) and ``S_i`` (left), interface hit times ``q_i``, and
    initial shock feet ``b0_i``.
    """

    pair: FluxPair
    t_end: float
    positions: np.ndarray
    levels: np.ndarray
    k: int
    tm: np.ndarray
    tp: np.ndarray
    cm: np.ndarray
    cp: np.ndarray
    dm: np.ndarray
    dp: np.ndarray
    s_right: np.ndarray
    s_left: np.ndarray
    q: np.ndarray
    b0: np.ndarray
    tau_r: float
    vbar: float
    v_minus: float
    u_minus: float
    tau_star: float
    atilde: float
    wedge_coeff: float | None
    gap_bound: float | None
    ops: _Ops = field(repr=False)

    @property
    def r_end(self) -> float:
        """Right end ``R`` of the prescribed profile."""
        return float(self.positions[-1])


def _solve_crossing_time(ops: _Ops, x: float, w: float, t_end: float) -> float:
    """The time the interface output of level ``w`` reaches ``(x, t_end)``.

    Solves ``hplus(x / (t_end - tau)) * tau = -w`` on ``(0, t_end)``.
    """
    return bisect(lambda tau: float(ops.hplus(x / (t_end - tau))) * tau + w,
                  0.0, float(np.nextafter(t_end, 0.0)))


def _fan_slope(ops: _Ops, w: float, t: float) -> float:
    """Right-side slope ``xi`` with ``hplus(xi) * t = -w`` (fan emission)."""
    lo, hi = 0.0, 1.0
    for _ in range(200):
        if float(ops.hplus(hi)) * t + w >= 0.0:
            break
        hi *= 4.0
    else:
        raise ConstructionError(f"fan slope bracket failed for w={w}, t={t}")
    return bisect(lambda z: float(ops.hplus(z)) * t + w, lo, hi)


def build_backward(pair: FluxPair, positions, levels, t_end: float = 1.0,
                   gap_bound: float | None = None) -> BackwardData:
    """Derive all states, times, and shock data from a prescribed profile.

    Args:
        pair: left/right flux pair; the right flux must have its minimum
            value 0 and the left flux a negative minimum (the reference
            family does).
        positions: ``0 = pos_0 < ... < pos_{k+1} = R``.
        levels: ``w_0 < ... < w_k < 0``, one per interval.
        t_end: the prescription time ``T``.
        gap_bound: if given, every level gap must be smaller than this.

    Returns:
        The backward data.

    Raises:
        ConstructionError: if the inputs or any derived ordering invariant
            fail, or the wedge regime needs a non-quadratic left flux.
    """
    positions = np.asarray(positions, dtype=float)
    levels = np.asarray(levels, dtype=float)
    k = len(levels) - 1
    if len(positions) != k + 2:
        raise ConstructionError(
            f"need one more position than levels + 1, got {len(positions)} "
            f"positions for {len(levels)} levels")
    if positions[0] != 0.0:
        raise ConstructionError("first position must be 0")
    if not np.all(np.diff(positions) > 0.0):
        raise ConstructionError("positions must increase strictly")
    if not (np.all(np.diff(levels) > 0.0) and levels[-1] < 0.0):
        raise ConstructionError("levels must increase strictly and stay below 0")
    if gap_bound is not None and k >= 1:
        worst = float(np.diff(levels).max())
        if worst >= gap_bound:
            raise ConstructionError(
                f"level gap {worst:.3g} exceeds the declared bound {gap_bound:.3g}")
    if not t_end > 0.0:
        raise ConstructionError(f"t_end must be positive, got {t_end!r}")
    if abs(pair.right.min_value) > 1e-12:
        raise ConstructionError("right flux must have minimum value 0")
    if pair.left.min_value >= 0.0:
        raise ConstructionError("left flux must have a negative minimum")

    ops = _Ops(pair)
    tm = np.zeros(k + 1)
    tp = np.zeros(k + 1)
    cm = np.zeros(k + 1)
    cp = np.zeros(k + 1)
    dm = np.zeros(k + 1)
    dp = np.zeros(k + 1)
    s_right = np.zeros(k + 1)
    s_left = np.zeros(k + 1)
    q = np.zeros(k + 1)
    b0 = np.zeros(k + 1)
    for i in range(1, k + 1):
        x = positions[i]
        tm[i] = _solve_crossing_time(ops, x, levels[i - 1], t_end)
        tp[i] = _solve_crossing_time(ops, x, levels[i], t_end)
        cm[i] = float(ops.fp_inv(x / (t_end - tm[i])))
        cp[i] = float(ops.fp_inv(x / (t_end - tp[i])))
        dm[i] = float(ops.g_plus_inv(ops.f(cm[i])))
        dp[i] = float(ops.g_plus_inv(ops.f(cp[i])))
        s_right[i] = float((ops.f(cm[i]) - ops.f(cp[i])) / (cm[i] - cp[i]))
        s_left[i] = float((ops.g(dm[i]) - ops.g(dp[i])) / (dm[i] - dp[i]))
        q[i] = t_end - x / s_right[i]
        b0[i] = -s_left[i] * q[i]

    r_end = float(positions[-1])
    tau_r = _solve_crossing_time(ops, r_end, levels[k], t_end)
    vbar = float(ops.fp_inv(r_end / (t_end - tau_r)))
    v_minus = float(ops.g_plus_inv(ops.f(vbar)))
    u_minus = float(ops.gp_inv(levels[0] / t_end))
    h0 = float(ops.hplus(0.0))
    tau_star = -levels[0] / h0
    atilde = float(ops.g_minus_inv(ops.f(pair.right.theta)))
    wedge_coeff: float | None = None
    if tau_star < t_end:
        if pair.left.kind != "shifted_quadratic":
            raise ConstructionError(
                "wedge regime (tau_star < t_end) implemented for a quadratic "
                "left flux only")
        wedge_coeff = -(levels[0] + 2.0 * atilde * tau_star) / math.sqrt(tau_star)

    bd = BackwardData(
        pair=pair, t_end=t_end, positions=positions, levels=levels, k=k,
        tm=tm, tp=tp, cm=cm, cp=cp, dm=dm, dp=dp, s_right=s_right,
        s_left=s_left, q=q, b0=b0, tau_r=tau_r, vbar=vbar, v_minus=v_minus,
        u_minus=u_minus, tau_star=tau_star, atilde=atilde,
        wedge_coeff=wedge_coeff, gap_bound=gap_bound, ops=ops)
    _check_backward_orderings(bd)
    return bd


def _check_backward_orderings(bd: BackwardData) -> None:
    """Validate the derived time/state orderings; raise on any failure."""
    k = bd.k
    chain = [bd.t_end]
    for i in range(1, k + 1):
        chain += [bd.tm[i], bd.tp[i]]
    chain.append(bd.tau_r)
    if not np.all(np.diff(chain) < 0.0):
        raise ConstructionError("crossing times failed to decrease strictly")
    for i in range(1, k + 1):
        if not bd.tp[i] < bd.q[i] < bd.tm[i]:
            raise ConstructionError(
                f"shock interface time q_{i} escapes (tp_{i}, tm_{i})")
        if not (bd.cm[i] > bd.cp[i] and bd.dm[i] > bd.dp[i]):
            raise ConstructionError(f"state ordering failed at crossing {i}")
    brk = [bd.levels[0]]
    for i in range(1, k + 1):
        brk += [bd.b0[i], bd.levels[i]]
    if not (np.all(np.diff(brk) > 0.0) and brk[-1] < 0.0):
        raise ConstructionError("initial breakpoints failed to increase strictly")


@dataclass(frozen=True)
class PiecewiseConstantData:
    """A right-continuous step function with finite breakpoints."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        if len(self.values) != len(self.breakpoints) + 1:
            raise ConstructionError("need exactly one more value than breakpoints")
        if not np.all(np.diff(self.breakpoints) > 0.0):
            raise ConstructionError("breakpoints overlap or decrease")

    def __call__(self, x) -> np.ndarray:
        idx = np.searchsorted(self.breakpoints, np.asarray(x, dtype=float),
                              side="right")
        return self.values[idx]


def backward_initial_data(bd: BackwardData) -> PiecewiseConstantData:
    """The piecewise-constant initial data of the backward construction.

    Breakpoints are ``w_0, b0_1, w_1, ..., b0_k, w_k, 0`` (count ``2k + 2``);
    values run ``u_minus, dm_1, dp_1, ..., dm_k, dp_k, v_minus, vbar``.

    Raises:
        ConstructionError: if the breakpoints overlap (propagated).
    """
    brk = [bd.levels[0]]
    vals = [bd.u_minus]
    for i in range(1, bd.k + 1):
        brk += [bd.b0[i], bd.levels[i]]
        vals += [bd.dm[i], bd.dp[i]]
    brk.append(0.0)
    vals += [bd.v_minus, bd.vbar]
    return PiecewiseConstantData(breakpoints=np.asarray(brk),
                                 values=np.asarray(vals))


def _wedge_sigma(bd: BackwardData, t: float) -> float:
    """Left-moving wedge shock position for ``t > tau_star``."""
    return bd.wedge_coeff * math.sqrt(t) + bd.levels[0] + 2.0 * bd.atilde * t


def right_trace(bd: BackwardData, t: float) -> float:
    """The state ``u(0+, t)`` the interface emits at time ``t``."""
    ops = bd.ops
    if t <= bd.tau_r:
        return bd.vbar
    for i in range(bd.k, 0, -1):
        if t <= bd.tp[i]:
            return float(ops.fp_inv(_fan_slope(ops, bd.levels[i], t)))
        if t <= bd.q[i]:
            return float(bd.cp[i])
        if t <= bd.tm[i]:
            return float(bd.cm[i])
    if t <= bd.tau_star:
        return float(ops.fp_inv(_fan_slope(ops, bd.levels[0], t)))
    return float(bd.pair.right.theta)


def left_trace(bd: BackwardData, t: float) -> float:
    """The state ``u(0-, t)`` feeding the interface at time ``t``."""
    ops = bd.ops
    if t <= bd.tau_r:
        return bd.v_minus
    for i in range(bd.k, 0, -1):
        if t <= bd.tp[i]:
            return float(ops.gp_inv(-bd.levels[i] / t))
        if t <= bd.q[i]:
            return float(bd.dp[i])
        if t <= bd.tm[i]:
            return float(bd.dm[i])
    if t <= bd.tau_star:
        return float(ops.gp_inv(-bd.levels[0] / t))
    return float(bd.atilde)


def _eval_right(bd: BackwardData, x: float, t: float) -> float:
    """Exact solution on ``x >= 0`` by an outer-to-inner zone walk."""
    ops = bd.ops
    if x == 0.0:
        return right_trace(bd, t)
    if t <= bd.tau_r:
        return bd.vbar
    if x >= float(ops.fp(bd.vbar)) * (t - bd.tau_r):
        return bd.vbar
    for i in range(bd.k, 0, -1):
        t_lo = bd.tau_r if i == bd.k else bd.tm[i + 1]
        t_hi = bd.tp[i]
        if t > t_lo:
            inner = 0.0
            if t >= t_hi:
                inner = float(ops.fp(bd.cp[i])) * (t - bd.tp[i])
            if x >= inner:
                tt = _solve_crossing_time(ops, x, bd.levels[i], t)
                return float(ops.fp_inv(x / (t - tt)))
        if t > bd.tp[i]:
            a_i = bd.positions[i] + bd.s_right[i] * (t - bd.t_end) \
                if t >= bd.q[i] else 0.0
            if x >= max(0.0, a_i):
                return float(bd.cp[i])
        if t > bd.q[i]:
            inner = max(0.0, float(ops.fp(bd.cm[i])) * (t - bd.tm[i]))
            if x >= inner:
                return float(bd.cm[i])
    t_lo = bd.tau_r if bd.k == 0 else bd.tm[1]
    if t > t_lo:
        tt = _solve_crossing_time(ops, x, bd.levels[0], t)
        if tt <= min(bd.tau_star, bd.t_end) + 1e-12:
            return float(ops.fp_inv(x / (t - tt)))
    raise ConstructionError(
        f"right-side point (x={x!r}, t={t!r}) matched no region; "
        f"tau_r={bd.tau_r!r}, tau_star={bd.tau_star!r}, k={bd.k}")


def _eval_left(bd: BackwardData, x: float, t: float) -> float:
    """Exact solution on ``x < 0`` by a left-to-right zone walk."""
    ops = bd.ops
    r0 = bd.levels[0] + float(ops.gp(bd.u_minus)) * t
    if x <= r0:
        return bd.u_minus
    if bd.k >= 1 and t < bd.tm[1]:
        fan0_hi = bd.levels[0] + float(ops.gp(bd.dm[1])) * t
    elif bd.tau_star < t:
        fan0_hi = _wedge_sigma(bd, t)
    else:
        fan0_hi = 0.0
    if x < fan0_hi:
        return float(ops.gp_inv((x - bd.levels[0]) / t))
    if bd.tau_star < t and x >= _wedge_sigma(bd, t):
        return float(bd.atilde)
    for i in range(1, bd.k + 1):
        if t < bd.tm[i]:
            hi = bd.b0[i] + bd.s_left[i] * t if t < bd.q[i] else 0.0
            if x < hi:
                return float(bd.dm[i])
        if t < bd.q[i]:
            hi = bd.levels[i] + float(ops.gp(bd.dp[i])) * t \
                if t < bd.tp[i] else 0.0
            if x < hi:
                return float(bd.dp[i])
        if t < bd.tp[i]:
            if i < bd.k:
                fast_state = bd.dm[i + 1]
                alive = t < bd.tm[i + 1]
            else:
                fast_state = bd.v_minus
                alive = t < bd.tau_r
            hi = bd.levels[i] + float(ops.gp(fast_state)) * t if alive else 0.0
            if x < hi:
                return float(ops.gp_inv((x - bd.levels[i]) / t))
    if t < bd.tau_r:
        return bd.v_minus
    raise ConstructionError(
        f"left-side point (x={x!r}, t={t!r}) matched no region; "
        f"tau_r={bd.tau_r!r}, tau_star={bd.tau_star!r}, k={bd.k}")


def exact_solution_eval(bd: BackwardData, x: float, t: float) -> float:
    """Exact entropy solution of the backward construction at ``(x, t)``.

    Args:
        bd: the backward data.
        x: position.
        t: time in ``(0, t_end]``.

    Returns:
        The solution value (one-sided limits at discontinuities follow the
        zone walks' closed/open conventions).

    Raises:
        ParameterError: if ``t`` is outside ``(0, t_end]``.
        ConstructionError: if the point matches no region (geometry bug).
    """
    if not 0.0 < t <= bd.t_end:
        raise ParameterError(f"t must lie in (0, {bd.t_end}], got {t!r}")
    if x >= 0.0:
        return _eval_right(bd, float(x), float(t))
    return _eval_left(bd, float(x), float(t))


def sample_solution(bd: BackwardData, xs, t: float) -> np.ndarray:
    """Vectorized :func:`exact_solution_eval` over a position grid."""
    return np.asarray([exact_solution_eval(bd, float(x), t)
                       for x in np.asarray(xs, dtype=float)])


def rebased_initial_data(bd: BackwardData,
                         t0: float | None = None) -> Callable[[np.ndarray], np.ndarray]:
    """The solution at an intermediate time, for use as initial data.

    Evaluating the construction at ``t0`` and restarting from there yields
    initial data of finite total variation (the early-time profile is fans
    and constants) that still reaches the prescribed final profile after
    ``t_end - t0``.

    Args:
        bd: the backward data.
        t0: re-basing time in ``(0, t_end)``; defaults to ``0.9 tau_r``.

    Returns:
        A vectorized callable ``x -> u(x, t0)``.
    """
    if t0 is None:
        t0 = 0.9 * bd.tau_r
    if not 0.0 < t0 < bd.t_end:
        raise ParameterError(f"t0 must lie in (0, {bd.t_end}), got {t0!r}")
    return lambda xs: sample_solution(bd, xs, float(t0))


# -- bridge: oscillatory profile -> backward construction --------------------

def counterexample_backward_data(spec: CounterexampleSpec,
                                 density: float = 50.0,
                                 t_end: float = 1.0,
                                 r_factor: float = 1.10) -> BackwardData:
    """Sample the profile ``rho`` into levels and build the backward data.

    Every constructed jump position ``x_i`` becomes a crossing whose
    abutting levels are exactly ``rho(x_i -)`` and ``rho(x_i +)``, so the
    final-time values at the ``x_i`` are reproduced exactly.  Interior
    level gaps are kept at most ``1/density``.

    Args:
        spec: the oscillatory profile.
        density: reciprocal of the largest interior level gap.
        t_end: prescription time.
        r_factor: the profile is extended flat to ``r_factor * x_{i0}`` so
            the outermost jump is an interior crossing.

    Returns:
        The backward data; its positions contain every ``spec.xs`` entry
        exactly.

    Raises:
        ParameterError: on a bad ``density`` or ``r_factor``.
        ConstructionError: propagated from the construction.
    """
    if density <= 0.0:
        raise ParameterError(f"density must be positive, got {density!r}")
    if r_factor <= 1.0:
        raise ParameterError(f"r_factor must exceed 1, got {r_factor!r}")
    n = spec.n_points
    positions = [0.0, float(spec.xs[n - 1])]
    levels = [rho_sided(spec, spec.i0 + n - 1, "minus")]
    for j in range(n - 2, -1, -1):
        lo = rho_sided(spec, spec.i0 + j + 1, "plus")
        hi = rho_sided(spec, spec.i0 + j, "minus")
        if not hi > lo > levels[-1]:
            raise ConstructionError(
                f"profile levels failed to increase at interval {spec.i0 + j}")
        m = max(1, int(np.ceil((hi - lo) * density)))
        grid = np.linspace(lo, hi, m + 1)
        levels.append(lo)
        for r in range(1, m + 1):
            xi = _interval_xi_of_rho(spec, j, 0.5 * (grid[r - 1] + grid[r]))
            positions.append(float(_interval_x(spec, j, xi)))
            levels.append(float(grid[r]))
        positions.append(float(spec.xs[j]))
    levels.append(rho_sided(spec, spec.i0, "plus"))
    positions.append(r_factor * float(spec.xs[0]))
    pair = FluxPair(left=shifted_quadratic(-1.0),
                    right=power_law_flux(spec.p + 1.0))
    return build_backward(pair, positions, levels, t_end=t_end)


# -- serialization ------------------------------------------------------------

_SPEC_FIELDS = ("p", "eps", "i0", "n_points", "seed_gap", "mode", "margin")


def spec_to_fields(spec: CounterexampleSpec) -> dict[str, str]:
    """Build arguments of the spec as exact-round-trip strings."""
    return {
        "p": repr(spec.p),
        "eps": repr(spec.eps),
        "i0": repr(spec.i0),
        "n_points": repr(spec.n_points),
        "seed_gap": repr(spec.seed_gap),
        "mode": spec.mode,
        "margin": repr(spec.margin),
    }


def spec_from_fields(fields: dict[str, str]) -> CounterexampleSpec:
    """Rebuild a spec from :func:`spec_to_fields` output.

    Raises:
        ParameterError: on missing or malformed keys.
    """
    missing = [key for key in _SPEC_FIELDS if key not in fields]
    if missing:
        raise ParameterError(f"missing spec fields: {missing}")
    try:
        return build_sequences(
            p=float(fields["p"]), eps=float(fields["eps"]),
            i0=int(fields["i0"]), n_points=int(fields["n_points"]),
            seed_gap=float(fields["seed_gap"]), mode=fields["mode"],
            margin=float(fields["margin"]))
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"malformed spec fields: {exc}") from exc


def export_solution_csv(bd: BackwardData, xs, t: float, path: str) -> None:
    """Write a dense sampling of the exact solution as ``x,value`` rows."""
    vals = sample_solution(bd, xs, t)
    with open(path, "w") as fh:
        fh.write(f"# t={t:.17g}\n# k={bd.k}\n# t_end={bd.t_end:.17g}\n")
        fh.write("x,value\n")
        for x, v in zip(np.asarray(xs, dtype=float), vals):
            fh.write(f"{x:.17g},{v:.17g}\n")
