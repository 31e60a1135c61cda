"""Monotone Godunov finite-volume scheme with a two-flux interface at x = 0.

The scheme advances cell averages with the classical Godunov flux inside each
half-line (flux ``g`` on the left, ``f`` on the right) and, on the edge at
``x = 0``, the interface flux ``max(g(max(a, theta_g)), f(min(b, theta_f)))``.
Both adjacent cells see that single value, so the discrete flux is continuous
across the interface at every step.  Boundaries are outflow (ghost cells copy
the edge values), so total mass changes only through the boundary fluxes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ParameterError, StabilityError
from .flux import FluxPair, FluxSpec, max_principle_bound, speed_bound

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(5)


@dataclass(frozen=True)
class Grid:
    """Uniform grid on ``[-M, M]`` with a cell edge exactly at ``x = 0``.

    Attributes:
        half_width: the half-width ``M``; positive.
        n_cells: even number of cells.
    """

    half_width: float
    n_cells: int

    def __post_init__(self) -> None:
        if not self.half_width > 0.0:
            raise ParameterError(f"half_width must be positive, got {self.half_width!r}")
        if self.n_cells <= 0 or self.n_cells % 2 != 0:
            raise ParameterError(f"n_cells must be a positive even count, got {self.n_cells!r}")

    @property
    def dx(self) -> float:
        """Cell width ``2M / n_cells``."""
        return 2.0 * self.half_width / self.n_cells

    def centers(self) -> np.ndarray:
        """Cell centers ``-M + (i + 1/2) dx``."""
        return -self.half_width + (np.arange(self.n_cells) + 0.5) * self.dx

    def edges(self) -> np.ndarray:
        """The ``n_cells + 1`` cell edges; ``edges()[n_cells // 2] == 0``."""
        e = -self.half_width + np.arange(self.n_cells + 1) * self.dx
        e[self.n_cells // 2] = 0.0
        return e


@dataclass(frozen=True)
class TraceSeries:
    """Interface traces recorded once per completed step.

    Attributes:
        times: step times, increasing.
        left_trace: cell average immediately left of ``x = 0`` at each time.
        right_trace: cell average immediately right of ``x = 0``.
        interface_flux: the single flux value both interface cells received.
    """

    times: np.ndarray
    left_trace: np.ndarray
    right_trace: np.ndarray
    interface_flux: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.times)
        if not (len(self.left_trace) == len(self.right_trace)
                == len(self.interface_flux) == n):
            raise ParameterError("trace arrays must share one length")


@dataclass(frozen=True)
class SpaceTimeSolution:
    """A finished run: snapshots, traces, and conservation diagnostics.

    Attributes:
        grid: the grid the run used.
        times: snapshot times (actual completed-step times), increasing.
        snapshots: array of shape ``(len(times), n_cells)`` of cell averages.
        traces: per-step interface traces.
        requested_times: the snapshot times the caller asked for.
        amplitude_bound: the invariant-region bound ``S`` for the run.
        mass_defect: worst relative gap between the tracked mass and the
            boundary-flux ledger over all steps.
        dt: the uniform step the run used.
    """

    grid: Grid
    times: np.ndarray
    snapshots: np.ndarray
    traces: TraceSeries
    requested_times: tuple[float, ...]
    amplitude_bound: float
    mass_defect: float
    dt: float

    @property
    def final_state(self) -> np.ndarray:
        """Cell averages at the last snapshot time."""
        return self.snapshots[-1]


def _godunov_flux_values(flux: FluxSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vectorized Godunov flux for one strictly convex flux function."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    f_min = flux.eval(np.clip(flux.theta, lo, hi))
    f_max = np.maximum(flux.eval(a), flux.eval(b))
    return np.where(a <= b, f_min, f_max)


def godunov_interior_flux(flux: FluxSpec, a: float, b: float) -> float:
    """Classical Godunov numerical flux for a single convex flux.

    Args:
        flux: the flux function.
        a: left state.
        b: right state.

    Returns:
        ``min`` of the flux over ``[a, b]`` if ``a <= b`` (attained at the
        critical point when it lies inside), otherwise ``max`` over ``[b, a]``
        (attained at an endpoint by convexity).
    """
    return float(_godunov_flux_values(flux, np.float64(a), np.float64(b)))


def interface_godunov_flux(pair: FluxPair, a: float, b: float) -> float:
    """Godunov flux across the ``x = 0`` edge.

    Args:
        pair: left/right flux pair.
        a: state in the last cell left of the interface.
        b: state in the first cell right of the interface.

    Returns:
        ``max(g(max(a, theta_g)), f(min(b, theta_f)))``, the single value both
        adjacent cells are updated with.
    """
    g, f = pair.left, pair.right
    return float(max(g.eval(max(a, g.theta)), f.eval(min(b, f.theta))))


def cfl_dt(pair: FluxPair, grid: Grid, cfl: float, m: float) -> float:
    """Largest stable step for data bounded by ``m``.

    Args:
        pair: left/right flux pair.
        grid: the grid.
        cfl: Courant number in ``(0, 1)``.
        m: amplitude bound of the initial data.

    Returns:
        ``cfl * dx / speed_bound`` where the speed bound is evaluated on the
        invariant region of amplitude-``m`` data.

    Raises:
        ParameterError: if ``cfl`` is outside ``(0, 1)`` or the wave speeds
            vanish (degenerate flux/data combination).
    """
    if not 0.0 < cfl < 1.0:
        raise ParameterError(f"cfl must lie in (0, 1), got {cfl!r}")
    speed = speed_bound(pair, m)
    if speed <= 0.0:
        raise ParameterError("wave speeds vanish; cannot pick a time step")
    return cfl * grid.dx / speed


def _edge_fluxes(state: np.ndarray, pair: FluxPair, half: int) -> np.ndarray:
    """All ``n + 1`` edge fluxes for the current state (outflow boundaries)."""
    n = len(state)
    flx = np.empty(n + 1)
    g, f = pair.left, pair.right
    flx[0] = g.eval(state[0])
    if half > 1:
        flx[1:half] = _godunov_flux_values(g, state[:half - 1], state[1:half])
    flx[half] = interface_godunov_flux(pair, state[half - 1], state[half])
    if n - half > 1:
        flx[half + 1:n] = _godunov_flux_values(f, state[half:n - 1], state[half + 1:n])
    flx[n] = f.eval(state[-1])
    return flx


def _max_speed(state: np.ndarray, pair: FluxPair, half: int) -> float:
    """Largest characteristic speed the current state can produce."""
    le = state[:half]
    ri = state[half:]
    return float(max(
        abs(pair.left.deriv(le.min())), abs(pair.left.deriv(le.max())),
        abs(pair.right.deriv(ri.min())), abs(pair.right.deriv(ri.max())),
    ))


def step(state: np.ndarray, pair: FluxPair, grid: Grid, dt: float) -> np.ndarray:
    """One conservative update ``u_i -= (dt/dx) (F_{i+1/2} - F_{i-1/2})``.

    Args:
        state: current cell averages, length ``grid.n_cells``.
        pair: left/right flux pair.
        grid: the grid.
        dt: time step; must satisfy the CFL bound for the current state.

    Returns:
        The new cell averages (a fresh array).

    Raises:
        StabilityError: if ``dt`` exceeds the CFL bound.
        ParameterError: if the state length does not match the grid.
    """
    state = np.asarray(state, dtype=float)
    if len(state) != grid.n_cells:
        raise ParameterError(f"state has {len(state)} cells, grid wants {grid.n_cells}")
    half = grid.n_cells // 2
    speed = _max_speed(state, pair, half)
    if dt * speed > grid.dx * (1.0 + 1e-9):
        raise StabilityError(
            f"CFL violation: dt*speed = {dt * speed:.6g} exceeds dx = {grid.dx:.6g}")
    flx = _edge_fluxes(state, pair, half)
    return state - (dt / grid.dx) * np.diff(flx)


def initial_cell_averages(u0: Callable[[np.ndarray], np.ndarray],
                          grid: Grid) -> np.ndarray:
    """Cell averages of ``u0`` by a 5-point Gauss rule per cell."""
    centers = grid.centers()
    h = grid.dx / 2.0
    acc = np.zeros(grid.n_cells)
    for node, weight in zip(_GAUSS_NODES, _GAUSS_WEIGHTS):
        acc += weight * np.asarray(u0(centers + h * node), dtype=float)
    return acc / 2.0


def piecewise_constant(breakpoints: Sequence[float], values: Sequence[float],
                       grid: Grid | None = None) -> Callable[[np.ndarray], np.ndarray]:
    """Right-continuous step function with ``len(values) = len(breakpoints) + 1``.

    Args:
        breakpoints: strictly increasing jump positions.
        values: the constant value on each of the ``len(breakpoints) + 1``
            pieces, left to right.
        grid: if given, each breakpoint is snapped to the nearest cell edge so
            that cell averages resolve the jumps exactly.

    Returns:
        A vectorized callable.

    Raises:
        ParameterError: on length mismatch or non-increasing breakpoints.
    """
    brk = np.asarray(breakpoints, dtype=float)
    vals = np.asarray(values, dtype=float)
    if len(vals) != len(brk) + 1:
        raise ParameterError("need exactly one more value than breakpoints")
    if len(brk) > 1 and not np.all(np.diff(brk) > 0):
        raise ParameterError("breakpoints must be strictly increasing")
    if grid is not None and len(brk) > 0:
        edges = grid.edges()
        snapped = edges[np.argmin(np.abs(brk[:, None] - edges[None, :]), axis=1)]
        brk = snapped

    def u0(x: np.ndarray) -> np.ndarray:
        return vals[np.searchsorted(brk, np.asarray(x, dtype=float), side="right")]

    return u0


def solve(pair: FluxPair, u0: Callable[[np.ndarray], np.ndarray], grid: Grid,
          t_end: float, cfl: float = 0.45,
          snapshot_times: Sequence[float] | None = None) -> SpaceTimeSolution:
    """Run the scheme from ``t = 0`` to ``t_end`` with uniform steps.

    Args:
        pair: left/right flux pair.
        u0: initial data as a vectorized callable.
        grid: the grid.
        t_end: final time; positive.
        cfl: Courant number in ``(0, 1)``.
        snapshot_times: times to record; each maps to the nearest completed
            step.  ``None`` records only the final state.

    Returns:
        The finished solution with per-step traces and a mass ledger.

    Raises:
        ParameterError: on bad ``t_end`` or ``cfl``.
        StabilityError: propagated from :func:`step`.
    """
    if not t_end > 0.0:
        raise ParameterError(f"t_end must be positive, got {t_end!r}")
    u = initial_cell_averages(u0, grid)
    m = float(np.abs(u).max())
    s_bound = max_principle_bound(pair, max(m, 1e-12)).value
    dt_max = cfl_dt(pair, grid, cfl, max(m, 1e-12))
    n_steps = max(1, int(np.ceil(t_end / dt_max - 1e-12)))
    dt = t_end / n_steps
    half = grid.n_cells // 2
    dx = grid.dx

    requested = tuple(float(t) for t in snapshot_times) if snapshot_times is not None \
        else (float(t_end),)
    for t in requested:
        if not 0.0 <= t <= t_end + 1e-12:
            raise ParameterError(f"snapshot time {t!r} outside [0, {t_end}]")
    snap_steps = {min(n_steps, max(0, int(round(t / dt)))) for t in requested}

    times = []
    snapshots = []
    trace_t = np.empty(n_steps + 1)
    trace_l = np.empty(n_steps + 1)
    trace_r = np.empty(n_steps + 1)
    trace_f = np.empty(n_steps + 1)

    mass = float(u.sum()) * dx
    ledger = mass
    worst_defect = 0.0
    scale = max(1.0, abs(mass))

    if 0 in snap_steps:
        times.append(0.0)
        snapshots.append(u.copy())
    for j in range(n_steps + 1):
        trace_t[j] = j * dt
        trace_l[j] = u[half - 1]
        trace_r[j] = u[half]
        flx = _edge_fluxes(u, pair, half)
        trace_f[j] = flx[half]
        if j == n_steps:
            break
        speed = _max_speed(u, pair, half)
        if dt * speed > dx * (1.0 + 1e-9):
            raise StabilityError(
                f"CFL violation at step {j}: dt*speed = {dt * speed:.6g} > dx = {dx:.6g}")
        u = u - (dt / dx) * np.diff(flx)
        ledger += dt * (flx[0] - flx[-1])
        mass = float(u.sum()) * dx
        worst_defect = max(worst_defect, abs(mass - ledger) / scale)
        if j + 1 in snap_steps:
            times.append((j + 1) * dt)
            snapshots.append(u.copy())
    if not snapshots:
        times.append(n_steps * dt)
        snapshots.append(u.copy())

    bound_violation = float(np.abs(np.asarray(snapshots)).max()) - (s_bound + 1e-9)
    if bound_violation > 0.0:
        raise StabilityError(
            f"snapshot exceeds the invariant region by {bound_violation:.3g}")

    return SpaceTimeSolution(
        grid=grid,
        times=np.asarray(times),
        snapshots=np.asarray(snapshots),
        traces=TraceSeries(times=trace_t, left_trace=trace_l,
                           right_trace=trace_r, interface_flux=trace_f),
        requested_times=requested,
        amplitude_bound=s_bound,
        mass_defect=worst_defect,
        dt=dt,
    )


def l1_error(snapshot: np.ndarray, reference: Callable[[np.ndarray], np.ndarray],
             grid: Grid) -> float:
    """L1 distance between cell averages and a reference profile.

    Args:
        snapshot: cell averages, length ``grid.n_cells``.
        reference: the reference profile as a vectorized callable; it is
            cell-averaged with a 5-point Gauss rule before comparison.
        grid: the grid.

    Returns:
        ``sum(dx * |snapshot_i - ref_avg_i|)``.
    """
    ref = initial_cell_averages(reference, grid)
    return float(np.abs(np.asarray(snapshot, dtype=float) - ref).sum() * grid.dx)


# -- serialization ----------------------------------------------------------

def _metadata_block(metadata: dict[str, object] | None) -> str:
    if not metadata:
        return ""
    return "".join(f"# {key}={value}\n" for key, value in metadata.items())


def write_snapshot_csv(path: str, grid: Grid, snapshot: np.ndarray,
                       metadata: dict[str, object] | None = None) -> None:
    """Write one snapshot as ``x_center,value`` rows with a comment header."""
    with open(path, "w") as fh:
        fh.write(_metadata_block(metadata))
        fh.write("x_center,value\n")
        for x, v in zip(grid.centers(), snapshot):
            fh.write(f"{x:.17g},{v:.17g}\n")


def write_traces_csv(path: str, traces: TraceSeries,
                     metadata: dict[str, object] | None = None) -> None:
    """Write traces as ``t,u_left,u_right,flux`` rows with a comment header."""
    with open(path, "w") as fh:
        fh.write(_metadata_block(metadata))
        fh.write("t,u_left,u_right,flux\n")
        for row in zip(traces.times, traces.left_trace, traces.right_trace,
                       traces.interface_flux):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
