"""Strictly convex flux laws, their inverses, and interface scaling maps.

A model consists of two convex fluxes: ``g`` governing ``x < 0`` (the *left*
flux) and ``f`` governing ``x > 0`` (the *right* flux).  States crossing the
interface are linked by flux equality, so the one-sided inverse branches of
each flux and the two composition maps built from them (``f_+^{-1} . g`` and
``g_-^{-1} . f``) carry all the quantitative information: one composition is
merely Lipschitz while the other degenerates like a fractional power at the
critical state, and that exponent drives every regularity bound downstream.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (DomainError, HypothesisViolationError, ParameterError,
                     RangeError, UndefinedExponentError)
from .rootfind import bisect

_KINDS = ("power_law", "shifted_quadratic")
_STATIONARY_TOL = 1e-12


@dataclass(frozen=True)
class FluxSpec:
    """One convex flux law on a bounded working interval.

    Attributes:
        kind: ``"power_law"`` (``|u|**r``) or ``"shifted_quadratic"``
            (``u**2 + c``).
        param: exponent ``r`` or shift ``c`` depending on ``kind``.
        theta: minimizer of the flux (sonic state).
        nondeg_exponent: growth exponent of the derivative away from ``theta``
            (``|flux'(u) - flux'(v)| >= C |u - v|**nondeg_exponent`` near the
            minimizer).  Reported, never assumed by the generic code paths.
        domain_bound: half-width of the working interval ``[-B, B]``; inverse
            branches refuse to leave it.
    """

    kind: str
    param: float
    theta: float
    nondeg_exponent: float
    domain_bound: float

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown flux kind {self.kind!r}")
        if not self.domain_bound > 0.0:
            raise ParameterError("domain_bound must be positive")
        if not self.nondeg_exponent >= 1.0:
            raise ParameterError("nondeg_exponent must be >= 1")
        if abs(self.deriv(self.theta)) > _STATIONARY_TOL:
            raise ParameterError(
                f"theta={self.theta!r} is not a stationary point "
                f"(deriv={self.deriv(self.theta)!r})")
        self._check_midpoint_convexity()

    def _check_midpoint_convexity(self) -> None:
        u = np.linspace(-self.domain_bound, self.domain_bound, 129)
        mid = 0.5 * (u[:-1] + u[1:])
        lhs = self.eval(mid)
        rhs = 0.5 * (self.eval(u[:-1]) + self.eval(u[1:]))
        scale = 1.0 + np.abs(rhs)
        if np.any(lhs > rhs + 1e-12 * scale):
            raise ParameterError("flux fails the midpoint convexity check")

    # -- pointwise maps (vectorized over numpy arrays) --------------------

    def eval(self, u):
        """Flux value at ``u``."""
        u = np.asarray(u, dtype=float)
        if self.kind == "power_law":
            out = np.abs(u) ** self.param
        else:
            out = u * u + self.param
        return out if out.ndim else float(out)

    def deriv(self, u):
        """Flux derivative at ``u``."""
        u = np.asarray(u, dtype=float)
        if self.kind == "power_law":
            out = self.param * np.sign(u) * np.abs(u) ** (self.param - 1.0)
        else:
            out = 2.0 * u
        return out if out.ndim else float(out)

    def second_deriv(self, u):
        """Flux second derivative at ``u``."""
        u = np.asarray(u, dtype=float)
        if self.kind == "power_law":
            r = self.param
            out = r * (r - 1.0) * np.abs(u) ** (r - 2.0)
        else:
            out = np.full_like(u, 2.0)
        return out if out.ndim else float(out)

    @property
    def min_value(self) -> float:
        """Minimum of the flux, attained at ``theta``."""
        return float(self.eval(self.theta))


def power_law_flux(r: float, domain_bound: float = 10.0) -> FluxSpec:
    """Flux ``|u|**r`` with ``r >= 2``.

    Args:
        r: power; rejected below 2 (the derivative would not be Lipschitz
            at the minimizer, breaking the scheme's stability accounting).
        domain_bound: working half-width.

    Returns:
        The flux specification with minimizer 0 and nondegeneracy exponent
        ``r - 1``.

    Raises:
        ParameterError: if ``r < 2``.
    """
    if not r >= 2.0:
        raise ParameterError(f"power-law exponent must be >= 2, got {r!r}")
    return FluxSpec(kind="power_law", param=float(r), theta=0.0,
                    nondeg_exponent=float(r - 1.0),
                    domain_bound=float(domain_bound))


def shifted_quadratic(c: float, domain_bound: float = 10.0) -> FluxSpec:
    """Flux ``u**2 + c``.

    Args:
        c: vertical shift; the flux minimum.
        domain_bound: working half-width.

    Returns:
        The flux specification with minimizer 0 and nondegeneracy exponent 1.
    """
    return FluxSpec(kind="shifted_quadratic", param=float(c), theta=0.0,
                    nondeg_exponent=1.0, domain_bound=float(domain_bound))


@dataclass(frozen=True)
class FluxPair:
    """The two-flux model: ``left`` on ``x < 0`` and ``right`` on ``x > 0``."""

    left: FluxSpec
    right: FluxSpec


# -- inverse branches -------------------------------------------------------

def inv_plus(flux: FluxSpec, y: float) -> float:
    """Inverse of the increasing branch: ``u >= theta`` with ``flux(u) = y``.

    Args:
        flux: the flux law.
        y: target value.

    Returns:
        The unique ``u`` in ``[theta, domain_bound]`` with ``flux(u) = y``.

    Raises:
        DomainError: if ``y`` is below the flux minimum.
        RangeError: if ``y`` exceeds ``flux(domain_bound)``.
    """
    fmin = flux.min_value
    if y < fmin:
        raise DomainError(f"value {y!r} below the flux minimum {fmin!r}")
    top = float(flux.eval(flux.domain_bound))
    if y > top:
        raise RangeError(f"value {y!r} beyond flux({flux.domain_bound!r})={top!r}")
    if y == fmin:
        return flux.theta
    return bisect(lambda u: float(flux.eval(u)) - y, flux.theta, flux.domain_bound)


def inv_minus(flux: FluxSpec, y: float) -> float:
    """Inverse of the decreasing branch: ``u <= theta`` with ``flux(u) = y``.

    Args:
        flux: the flux law.
        y: target value.

    Returns:
        The unique ``u`` in ``[-domain_bound, theta]`` with ``flux(u) = y``.

    Raises:
        DomainError: if ``y`` is below the flux minimum.
        RangeError: if ``y`` exceeds ``flux(-domain_bound)``.
    """
    fmin = flux.min_value
    if y < fmin:
        raise DomainError(f"value {y!r} below the flux minimum {fmin!r}")
    top = float(flux.eval(-flux.domain_bound))
    if y > top:
        raise RangeError(f"value {y!r} beyond flux({-flux.domain_bound!r})={top!r}")
    if y == fmin:
        return flux.theta
    return bisect(lambda u: float(flux.eval(u)) - y, -flux.domain_bound, flux.theta)


def deriv_inv(flux: FluxSpec, xi: float) -> float:
    """Inverse of the (increasing) flux derivative.

    Args:
        flux: the flux law.
        xi: target slope.

    Returns:
        The unique ``u`` in ``[-domain_bound, domain_bound]`` with
        ``flux'(u) = xi``.

    Raises:
        RangeError: if ``xi`` lies outside ``[flux'(-B), flux'(B)]``.
    """
    b = flux.domain_bound
    lo, hi = float(flux.deriv(-b)), float(flux.deriv(b))
    if xi < lo or xi > hi:
        raise RangeError(f"slope {xi!r} outside [{lo!r}, {hi!r}]")
    if xi == 0.0:
        return flux.theta
    return bisect(lambda u: float(flux.deriv(u)) - xi, -b, b)


# -- interface scaling maps -------------------------------------------------

def singular_map_lr(pair: FluxPair, v: float) -> float:
    """Right state produced by a left state crossing the interface.

    Computes ``inv_plus(right, left(v))``: the state on ``x > 0`` carrying the
    same flux as the left state ``v``.

    Raises:
        DomainError: if ``left(v)`` is below the right flux minimum (the state
            cannot cross).
    """
    y = float(pair.left.eval(v))
    if y < pair.right.min_value:
        raise DomainError(
            f"left flux value {y!r} below the right minimum "
            f"{pair.right.min_value!r}: state cannot cross")
    return inv_plus(pair.right, y)


def singular_map_rl(pair: FluxPair, v: float) -> float:
    """Left state produced by a right state crossing the interface.

    Computes ``inv_minus(left, right(v))``: the state on ``x < 0`` carrying
    the same flux as the right state ``v``.

    Raises:
        DomainError: if ``right(v)`` is below the left flux minimum.
    """
    y = float(pair.right.eval(v))
    if y < pair.left.min_value:
        raise DomainError(
            f"right flux value {y!r} below the left minimum "
            f"{pair.left.min_value!r}: state cannot cross")
    return inv_minus(pair.left, y)


# -- exponents --------------------------------------------------------------

def gamma_nu(pair: FluxPair) -> tuple[float, float]:
    """Scaling exponents of the two interface maps.

    The flux with the larger minimum is the one whose increasing/decreasing
    branch is inverted at its own minimum by crossing states, so that branch
    contributes a fractional exponent ``1/(exponent + 1)``; the inverse of
    the other flux stays Lipschitz and contributes its derivative exponent.

    Returns:
        ``(gamma, nu)`` with ``gamma`` in ``(0, 1/2]`` and ``nu`` in ``(0, 1]``.

    Raises:
        HypothesisViolationError: if the two minima coincide (no map is
            singular and the exponent table does not apply).
    """
    mf = pair.right.min_value
    mg = pair.left.min_value
    p = pair.right.nondeg_exponent
    q = pair.left.nondeg_exponent
    if mf == mg:
        raise HypothesisViolationError(
            "flux minima coincide; the exponent table requires min f != min g")
    if mf < mg:
        return 1.0 / (q + 1.0), 1.0 / p
    return 1.0 / (p + 1.0), 1.0 / q


@dataclass(frozen=True)
class SmoothingExponents:
    """Bundle of regularity exponents for a flux pair.

    Attributes:
        s_star: fractional order generated from bounded data.
        s_one: order kept away from the interface for data of order ``s0``.
        s_general: order for merely bounded data when both maps degenerate.
        s_two: order propagated from data of order ``s0``.
    """

    s_star: float
    s_one: float
    s_general: float
    s_two: float


def smoothing_exponents(pair: FluxPair, s0: float | None = None) -> SmoothingExponents:
    """Regularity exponents implied by the interface maps.

    Args:
        pair: the flux pair.
        s0: fractional order of the initial data, if any.

    Returns:
        The exponent bundle; with ``s0=None`` the data-dependent entries fall
        back to the bounded-data values.
    """
    g, n = gamma_nu(pair)
    s_star = min(g, n)
    s_general = g * n
    if s0 is None:
        s_one = s_star
        s_two = s_general
    else:
        if not 0.0 < s0 <= 1.0:
            raise ParameterError(f"s0 must lie in (0, 1], got {s0!r}")
        s_one = min(g, max(n, s0))
        s_two = g * max(s0, n)
    return SmoothingExponents(s_star=s_star, s_one=s_one,
                              s_general=s_general, s_two=s_two)


@dataclass(frozen=True)
class BoundReport:
    """Sup bound for solutions with data in ``[-m, m]``.

    Attributes:
        value: the bound.
        lr_defined: whether any left state in ``[-m, m]`` can cross.
        rl_defined: whether any right state in ``[-m, m]`` can cross.
    """

    value: float
    lr_defined: bool
    rl_defined: bool


def max_principle_bound(pair: FluxPair, m: float, samples: int = 4096) -> BoundReport:
    """Invariant-region bound: data in ``[-m, m]`` stays in ``[-S, S]``.

    The bound is the max of ``m`` and the sup of both interface maps over
    ``[-m, m]`` (states created at the interface are images of crossing
    states).  Sampled on a uniform grid including the endpoints, where the
    sup of the monotone-composed maps is attained.

    Args:
        pair: the flux pair.
        m: sup bound of the data; must be positive.
        samples: number of grid points.

    Returns:
        The bound and flags telling which maps were defined anywhere.

    Raises:
        ParameterError: if ``m <= 0``.
    """
    if not m > 0.0:
        raise ParameterError(f"m must be positive, got {m!r}")
    vs = np.linspace(-m, m, samples)
    best = m
    lr_any = False
    rl_any = False
    for v in vs:
        try:
            best = max(best, abs(singular_map_lr(pair, float(v))))
            lr_any = True
        except DomainError:
            pass
        try:
            best = max(best, abs(singular_map_rl(pair, float(v))))
            rl_any = True
        except DomainError:
            pass
    return BoundReport(value=best, lr_defined=lr_any, rl_defined=rl_any)


def speed_bound(pair: FluxPair, m: float) -> float:
    """Largest characteristic speed for solutions with data in ``[-m, m]``.

    Uses the invariant-region bound ``S`` and the convexity of both fluxes
    (the derivative maxima sit at ``±S``).

    Args:
        pair: the flux pair.
        m: sup bound of the data.

    Returns:
        ``max(|f'(±S)|, |g'(±S)|)`` with ``S = max_principle_bound(...)``.
    """
    s = max_principle_bound(pair, m).value
    return max(abs(float(pair.right.deriv(-s))), abs(float(pair.right.deriv(s))),
               abs(float(pair.left.deriv(-s))), abs(float(pair.left.deriv(s))))


# -- scaling-exponent estimation --------------------------------------------

def holder_exponent_estimate(map_fn: Callable[[float], float], lo: float,
                             hi: float, n: int = 64) -> float:
    """Estimate the Hoelder exponent of a map on ``[lo, hi]``.

    Increment pairs are geometrically clustered toward both endpoints (choose
    the interval so its least regular point is an endpoint); the reported
    exponent is the smaller of the two endpoint log-log slopes.

    Args:
        map_fn: scalar map.
        lo: left end of the interval.
        hi: right end; must exceed ``lo``.
        n: number of geometric scales; at least 64.

    Returns:
        The estimated exponent (1.0 for Lipschitz maps of nonzero slope).

    Raises:
        ParameterError: if the interval is empty or ``n < 64``.
        UndefinedExponentError: if the map has no measurable increments
            (constant map).
    """
    if not hi > lo:
        raise ParameterError("interval must satisfy lo < hi")
    if n < 64:
        raise ParameterError(f"need at least 64 scales, got {n}")
    length = hi - lo
    ratios = np.logspace(np.log10(0.5), np.log10(2.0 ** -20), n)
    slopes = []
    for anchor, sgn in ((lo, 1.0), (hi, -1.0)):
        dxs = []
        dms = []
        for r in ratios:
            a = anchor + sgn * length * r
            b = anchor + sgn * length * (r / 2.0)
            dm = abs(map_fn(a) - map_fn(b))
            if dm > 0.0:
                dxs.append(length * r / 2.0)
                dms.append(dm)
        if len(dxs) >= 8:
            slope = np.polyfit(np.log(dxs), np.log(dms), 1)[0]
            slopes.append(float(slope))
    if not slopes:
        raise UndefinedExponentError(
            "map has no nonzero increments on the interval; exponent undefined")
    return min(slopes)


# -- serialization ----------------------------------------------------------

def flux_to_fields(flux: FluxSpec, prefix: str = "") -> dict[str, str]:
    """Flat exact-round-trip representation (``repr`` of every float)."""
    return {
        prefix + "kind": flux.kind,
        prefix + "param": repr(flux.param),
        prefix + "theta": repr(flux.theta),
        prefix + "nondeg_exponent": repr(flux.nondeg_exponent),
        prefix + "domain_bound": repr(flux.domain_bound),
    }


def flux_from_fields(fields: dict[str, str], prefix: str = "") -> FluxSpec:
    """Inverse of :func:`flux_to_fields`.

    Raises:
        ParameterError: if a required key is missing or malformed.
    """
    try:
        return FluxSpec(
            kind=fields[prefix + "kind"],
            param=float(fields[prefix + "param"]),
            theta=float(fields[prefix + "theta"]),
            nondeg_exponent=float(fields[prefix + "nondeg_exponent"]),
            domain_bound=float(fields[prefix + "domain_bound"]),
        )
    except KeyError as exc:
        raise ParameterError(f"missing flux field {exc}") from exc
    except ValueError as exc:
        raise ParameterError(f"malformed flux field: {exc}") from exc


def pair_to_fields(pair: FluxPair) -> dict[str, str]:
    """Flat representation of both fluxes (``left_*`` / ``right_*`` keys)."""
    out = flux_to_fields(pair.left, "left_")
    out.update(flux_to_fields(pair.right, "right_"))
    return out


def pair_from_fields(fields: dict[str, str]) -> FluxPair:
    """Inverse of :func:`pair_to_fields`."""
    return FluxPair(left=flux_from_fields(fields, "left_"),
                    right=flux_from_fields(fields, "right_"))
