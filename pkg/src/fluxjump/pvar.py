"""Exact fractional total variation of sampled signals.

For an order ``s`` in ``(0, 1]`` the fractional variation of a signal is the
supremum of ``sum |u(x_{i+1}) - u(x_i)|**(1/s)`` over all finite subdivisions.
Since ``1/s >= 1``, optimal subdivisions only ever use local extrema, so an
exact evaluation needs just an extrema reduction followed by quadratic
dynamic programming; an exponential reference oracle is kept alongside for
cross-checking on small inputs.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, SizeError

_BRUTEFORCE_MAX = 20


@dataclass(frozen=True)
class SampledSignal:
    """A finite signal sampled at strictly increasing positions.

    Attributes:
        xs: sample positions, strictly increasing.
        values: sample values, finite, same length as ``xs``.
    """

    xs: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        xs = np.asarray(self.xs, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "values", values)
        if xs.ndim != 1 or values.ndim != 1 or len(xs) != len(values):
            raise ParameterError("xs and values must be 1-d arrays of equal length")
        if len(xs) < 1:
            raise ParameterError("a signal needs at least one sample")
        if not np.all(np.isfinite(xs)) or not np.all(np.isfinite(values)):
            raise ParameterError("samples must be finite")
        if len(xs) > 1 and not np.all(np.diff(xs) > 0):
            raise ParameterError("positions must be strictly increasing")

    def __len__(self) -> int:
        return len(self.xs)


@dataclass(frozen=True)
class VariationReport:
    """Result of an exact fractional-variation computation.

    Attributes:
        s: the fractional order in ``(0, 1]``.
        value: the variation; always nonnegative.
        subdivision: sample indices of an optimal subdivision, strictly
            increasing; among optimal ones, a shortest and then
            lexicographically smallest within the reduced index set.
        osc: oscillation (max - min) of the signal.
    """

    s: float
    value: float
    subdivision: tuple[int, ...]
    osc: float

    def __post_init__(self) -> None:
        if not 0.0 < self.s <= 1.0:
            raise ParameterError(f"order s must lie in (0, 1], got {self.s!r}")
        if self.value < 0.0:
            raise ParameterError("variation cannot be negative")
        if any(b <= a for a, b in zip(self.subdivision, self.subdivision[1:])):
            raise ParameterError("subdivision indices must be strictly increasing")


def _check_order(s: float) -> None:
    if not 0.0 < s <= 1.0:
        raise ParameterError(f"order s must lie in (0, 1], got {s!r}")


def _reduce_indices(values: np.ndarray) -> np.ndarray:
    """Indices of both endpoints plus strict interior extrema.

    Runs of equal values are represented by their first sample, except the
    final run, which the trailing endpoint represents.
    """
    v = values
    n = len(v)
    if n <= 2:
        return np.arange(n)
    run_idx = [0]
    for i in range(1, n):
        if v[i] != v[run_idx[-1]]:
            run_idx.append(i)
    if len(run_idx) == 1:
        return np.array([0, n - 1])
    kept = [0]
    for j in range(1, len(run_idx) - 1):
        a, b, c = v[run_idx[j - 1]], v[run_idx[j]], v[run_idx[j + 1]]
        if (b - a) * (c - b) < 0.0:
            kept.append(run_idx[j])
    kept.append(n - 1)
    return np.array(kept)


def extrema_reduce(signal: SampledSignal) -> SampledSignal:
    """Drop samples that no optimal subdivision ever needs.

    Keeps the endpoints and the strict local extrema (one representative per
    extremal plateau, its first sample).  Every fractional variation of the
    reduced signal equals that of the original.

    Args:
        signal: the input signal.

    Returns:
        The reduced signal.
    """
    kept = _reduce_indices(signal.values)
    return SampledSignal(signal.xs[kept], signal.values[kept])


def variation_dp(values: np.ndarray, s: float) -> tuple[float, tuple[int, ...]]:
    """Quadratic reference kernel: optimal subdivision by dynamic programming.

    Computes ``V(i) = max_{j<i} V(j) + |u_i - u_j|**(1/s)`` and returns
    ``max_i V(i)`` with an optimal chain.  Runs directly on the given values
    without any reduction, so it doubles as an independent check that
    :func:`extrema_reduce` preserves the variation.

    Args:
        values: sample values.
        s: fractional order in ``(0, 1]``.

    Returns:
        ``(value, chain)`` where ``chain`` are indices into ``values`` of an
        optimal subdivision (shortest, then lexicographically smallest).
    """
    _check_order(s)
    v = np.asarray(values, dtype=float)
    n = len(v)
    if n == 1:
        return 0.0, (0,)
    q = 1.0 / s
    best = np.zeros(n)
    length = np.ones(n, dtype=int)
    pred = np.full(n, -1, dtype=int)

    def chain_of(i: int) -> tuple[int, ...]:
        out = []
        while i >= 0:
            out.append(i)
            i = pred[i]
        return tuple(reversed(out))

    for i in range(1, n):
        gains = best[:i] + np.abs(v[i] - v[:i]) ** q
        top = gains.max()
        cand = np.flatnonzero(gains == top)
        bi, bl = -1, None
        for j in cand:
            lj = length[j] + 1
            if bl is None or lj < bl:
                bi, bl = int(j), lj
            elif lj == bl and chain_of(int(j)) < chain_of(bi):
                bi = int(j)
        if top > 0.0:
            best[i], length[i], pred[i] = top, length[bi] + 1, bi
        # a zero gain keeps the single-point chain (shorter).
    i_best = 0
    for i in range(1, n):
        if best[i] > best[i_best]:
            i_best = i
        elif best[i] == best[i_best] and (
                length[i] < length[i_best]
                or (length[i] == length[i_best] and chain_of(i) < chain_of(i_best))):
            i_best = i
    return float(best[i_best]), chain_of(i_best)


def tv_s_exact(signal: SampledSignal, s: float) -> VariationReport:
    """Exact fractional variation with an optimal subdivision.

    Reduces the signal to extrema first; for ``s = 1`` the variation is the
    plain sum of the reduced increments (linear time), otherwise quadratic
    dynamic programming finds the optimum.

    Args:
        signal: the input signal.
        s: fractional order in ``(0, 1]``.

    Returns:
        The report, with subdivision indices into the original signal.

    Raises:
        ParameterError: if ``s`` lies outside ``(0, 1]``.
    """
    _check_order(s)
    kept = _reduce_indices(signal.values)
    v = signal.values[kept]
    osc = float(signal.values.max() - signal.values.min())
    if osc == 0.0:
        return VariationReport(s=s, value=0.0, subdivision=(0,), osc=0.0)
    if s == 1.0:
        # Reduced increments alternate, so the full reduced chain is the
        # unique shortest optimum.
        value = float(np.abs(np.diff(v)).sum())
        chain = tuple(int(i) for i in kept)
        return VariationReport(s=s, value=value, subdivision=chain, osc=osc)
    value, chain = variation_dp(v, s)
    return VariationReport(s=s, value=value,
                           subdivision=tuple(int(kept[i]) for i in chain), osc=osc)


def tv_s_bruteforce(signal: SampledSignal, s: float) -> float:
    """Exhaustive reference: maximize over every endpoint-containing subsequence.

    Args:
        signal: the input signal; at most 20 samples.
        s: fractional order in ``(0, 1]``.

    Returns:
        The supremum value.

    Raises:
        SizeError: if the signal has more than 20 samples.
        ParameterError: if ``s`` lies outside ``(0, 1]``.
    """
    _check_order(s)
    n = len(signal)
    if n > _BRUTEFORCE_MAX:
        raise SizeError(f"bruteforce path accepts at most {_BRUTEFORCE_MAX} samples,"
                        f" got {n}")
    v = signal.values
    if n == 1:
        return 0.0
    q = 1.0 / s
    best = 0.0
    interior = range(1, n - 1)
    for r in range(0, n - 1):
        for mid in itertools.combinations(interior, r):
            chain = (0,) + mid + (n - 1,)
            val = float(sum(abs(v[b] - v[a]) ** q for a, b in zip(chain, chain[1:])))
            if val > best:
                best = val
    return best


@dataclass(frozen=True)
class EmbeddingReport:
    """Comparison of two variation orders on one signal.

    Attributes:
        s: smaller order.
        t: larger order.
        lhs: variation at order ``s``.
        rhs: ``osc**(1/s - 1/t)`` times the variation at order ``t``.
        holds: whether ``lhs <= rhs`` up to 1e-12.
    """

    s: float
    t: float
    lhs: float
    rhs: float
    holds: bool


def embedding_check(signal: SampledSignal, s: float, t: float) -> EmbeddingReport:
    """Check the interpolation bound between two variation orders.

    Every increment satisfies ``|d|**(1/s) <= osc**(1/s - 1/t) |d|**(1/t)``,
    so the variations inherit the bound ``TV^s <= osc**(1/s - 1/t) TV^t``.

    Args:
        signal: the input signal.
        s: smaller order; requires ``0 < s < t <= 1``.
        t: larger order.

    Returns:
        The comparison report.

    Raises:
        ParameterError: if the orders are not ``0 < s < t <= 1``.
    """
    if not (0.0 < s < t <= 1.0):
        raise ParameterError(f"need 0 < s < t <= 1, got s={s!r}, t={t!r}")
    lhs_rep = tv_s_exact(signal, s)
    rhs_rep = tv_s_exact(signal, t)
    osc = lhs_rep.osc
    rhs = (osc ** (1.0 / s - 1.0 / t)) * rhs_rep.value if osc > 0.0 else 0.0
    return EmbeddingReport(s=s, t=t, lhs=lhs_rep.value, rhs=rhs,
                           holds=lhs_rep.value <= rhs + 1e-12)


def tv_s_window(signal: SampledSignal, a: float, b: float, s: float) -> float:
    """Fractional variation restricted to samples with ``a <= x <= b``.

    Args:
        signal: the input signal.
        a: window start; must satisfy ``a < b``.
        b: window end.
        s: fractional order in ``(0, 1]``.

    Returns:
        The variation of the restriction; 0 for an empty or single-sample
        window.

    Raises:
        ParameterError: if ``a >= b`` or ``s`` is out of range.
    """
    _check_order(s)
    if not a < b:
        raise ParameterError(f"window must satisfy a < b, got [{a!r}, {b!r}]")
    mask = (signal.xs >= a) & (signal.xs <= b)
    idx = np.flatnonzero(mask)
    if len(idx) == 0:
        return 0.0
    sub = SampledSignal(signal.xs[idx], signal.values[idx])
    return tv_s_exact(sub, s).value


# -- serialization ----------------------------------------------------------

def signal_to_csv(signal: SampledSignal, path: str) -> None:
    """Write the signal as ``x,value`` rows with 17 significant digits."""
    with open(path, "w") as fh:
        fh.write("x,value\n")
        for x, v in zip(signal.xs, signal.values):
            fh.write(f"{x:.17g},{v:.17g}\n")


def signal_from_csv(path: str) -> SampledSignal:
    """Read a signal written by :func:`signal_to_csv`.

    Raises:
        ParameterError: if the file is empty or malformed.
    """
    xs = []
    vs = []
    with open(path) as fh:
        for ln, line in enumerate(fh):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if ln == 0 and line.lower().replace(" ", "") == "x,value":
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ParameterError(f"{path}:{ln + 1}: expected 'x,value'")
            try:
                xs.append(float(parts[0]))
                vs.append(float(parts[1]))
            except ValueError as exc:
                raise ParameterError(f"{path}:{ln + 1}: {exc}") from exc
    if not xs:
        raise ParameterError(f"{path}: no samples")
    return SampledSignal(np.asarray(xs), np.asarray(vs))
