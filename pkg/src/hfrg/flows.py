"""Numeric analysis of the discrete coupling flow.

The exact one-scale map is iterated, searched for fixed points, and
linearized in floats here.  All symbolic work stays inside the map
itself (exact numerators, denominator, and their derivatives), so this
layer only deals in ordinary dense vectors and matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .grassmann import SingularNormalization
from .rg import evaluate_beta

CONVERGE_TOL = 1e-14
DIVERGE_CUTOFF = 1e6
MARGINAL_BAND = 1e-9
DEDUPE_TOL = 1e-8
NEWTON_MAX_ITERS = 100
NEWTON_MAX_HALVINGS = 20

_NUMERIC_ERRORS = (SingularNormalization, ZeroDivisionError, OverflowError)


def _inf_norm(v):
    return max(abs(x) for x in v)


@dataclass(frozen=True)
class Trajectory:
    """Scale-by-scale orbit of the map, newest point last.

    ``points`` holds (scale index, coupling tuple) pairs starting at
    index 0 and decreasing by one per applied step; ``termination`` is
    one of "max steps", "converged", or "diverged".
    """

    points: tuple
    termination: str

    @property
    def final(self):
        return self.points[-1][1]

    @property
    def n_steps(self):
        return len(self.points) - 1


@dataclass(frozen=True)
class FixedPointReport:
    """A located equilibrium with its linearization summary.

    ``eigenvalue_moduli`` is sorted largest first; ``classification``
    is "stable" (all moduli < 1), "unstable" (some modulus > 1), or
    "marginal-mixed" (some modulus within the marginal band of 1).
    """

    location: tuple
    residual_norm: float
    eigenvalue_moduli: tuple
    classification: str


class FixedPointResults(list):
    """Deduplicated reports in discovery order; seeds whose Newton run
    was abandoned (singular linearization, stall, or iteration cap)
    are kept on the side."""

    def __init__(self, reports=(), abandoned=()):
        super().__init__(reports)
        self.abandoned_seeds = tuple(abandoned)


def iterate_flow(beta, start, max_steps, converge_tol=CONVERGE_TOL,
                 diverge_cutoff=DIVERGE_CUTOFF):
    """Apply the map repeatedly from ``start``.

    Stops early once the step shrinks below ``converge_tol`` in the
    max norm (converged) or the iterate leaves the ball of radius
    ``diverge_cutoff`` (diverged); a vanishing normalization or a
    non-finite value also terminates as diverged rather than raising.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    cur = tuple(float(x) for x in start)
    points = [(0, cur)]
    termination = "max steps"
    for _ in range(max_steps):
        try:
            nxt = tuple(evaluate_beta(beta, cur))
        except _NUMERIC_ERRORS:
            termination = "diverged"
            break
        if not all(math.isfinite(x) for x in nxt):
            termination = "diverged"
            break
        points.append((points[-1][0] - 1, nxt))
        if _inf_norm(nxt) > diverge_cutoff:
            termination = "diverged"
            break
        if _inf_norm([a - b for a, b in zip(nxt, cur)]) < converge_tol:
            termination = "converged"
            cur = nxt
            break
        cur = nxt
    return Trajectory(tuple(points), termination)


def stability(beta, point, marginal_band=MARGINAL_BAND):
    """Classify an equilibrium by the eigenvalue moduli of the exact
    Jacobian evaluated at ``point``."""
    loc = tuple(float(x) for x in point)
    image = evaluate_beta(beta, loc)
    residual = _inf_norm([a - b for a, b in zip(image, loc)])
    jac = np.array(beta.jacobian(loc), dtype=float)
    moduli = tuple(sorted((float(abs(z)) for z in np.linalg.eigvals(jac)),
                          reverse=True))
    if any(abs(m - 1.0) <= marginal_band for m in moduli):
        classification = "marginal-mixed"
    elif all(m < 1.0 for m in moduli):
        classification = "stable"
    else:
        classification = "unstable"
    return FixedPointReport(loc, residual, moduli, classification)


def _residual_vector(beta, x):
    return [a - b for a, b in zip(evaluate_beta(beta, x), x)]


def _newton(beta, seed, tol):
    """Damped Newton on beta(x) - x; None when the seed is abandoned.

    Iteration continues while the residual strictly decreases, not
    just until it first dips below ``tol``: at a marginal equilibrium
    the linearization of beta(x) - x is singular at the root, so the
    tolerance is met a wide puddle away from the actual point and only
    the extra polishing steps contract onto it.
    """
    x = [float(v) for v in seed]
    n = len(x)
    try:
        f = _residual_vector(beta, x)
    except _NUMERIC_ERRORS:
        return None
    if not all(math.isfinite(v) for v in f):
        return None
    fnorm = _inf_norm(f)
    for _ in range(NEWTON_MAX_ITERS):
        if fnorm == 0.0:
            break
        try:
            jac = np.array(beta.jacobian(x), dtype=float)
        except _NUMERIC_ERRORS:
            return None
        try:
            step = np.linalg.solve(jac - np.eye(n), np.array(f))
        except np.linalg.LinAlgError:
            # singular linearization: abandon unless already converged
            break
        if not np.all(np.isfinite(step)):
            return None
        scale = 1.0
        improved = False
        for _ in range(NEWTON_MAX_HALVINGS + 1):
            cand = [xi - scale * si for xi, si in zip(x, step)]
            try:
                fc = _residual_vector(beta, cand)
            except _NUMERIC_ERRORS:
                scale /= 2.0
                continue
            if all(math.isfinite(v) for v in fc) and _inf_norm(fc) < fnorm:
                x, f, fnorm = cand, fc, _inf_norm(fc)
                improved = True
                break
            scale /= 2.0
        if not improved:
            break
    return tuple(x) if fnorm <= tol else None


def find_fixed_points(beta, seeds, tol=1e-12, marginal_band=MARGINAL_BAND):
    """Newton-solve beta(x) = x from each seed with the exact Jacobian.

    Converged locations closer than the deduplication tolerance to an
    earlier find are dropped; abandoned seeds are recorded on the
    returned list.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    reports = []
    abandoned = []
    for seed in seeds:
        location = _newton(beta, seed, tol)
        if location is None:
            abandoned.append(tuple(float(v) for v in seed))
            continue
        if any(_inf_norm([a - b for a, b in zip(location, r.location)])
               <= DEDUPE_TOL for r in reports):
            continue
        reports.append(stability(beta, location, marginal_band))
    return FixedPointResults(reports, abandoned)


def classify_power_counting(replication, gamma, field_count):
    """Scaling exponent of a coupling with ``field_count`` fields and
    its class: positive exponent grows under iteration (relevant),
    zero is marginal, negative shrinks (irrelevant)."""
    if field_count < 2 or field_count % 2:
        raise ValueError("field_count must be an even integer >= 2")
    k = replication.bit_length() - 1
    if replication <= 0 or (1 << k) != replication:
        raise ValueError("replication must be a power of two")
    exponent = Fraction(k) - field_count * Fraction(gamma)
    if exponent > 0:
        kind = "relevant"
    elif exponent < 0:
        kind = "irrelevant"
    else:
        kind = "marginal"
    return exponent, kind


def _grid_row(beta, axis_i, axis_j, base, li, lj):
    x = list(base)
    x[axis_i] = li
    x[axis_j] = lj
    try:
        image = evaluate_beta(beta, x)
        di = image[axis_i] - li
        dj = image[axis_j] - lj
    except _NUMERIC_ERRORS:
        return (li, lj, 0.0, 0.0, float("nan"))
    if not (math.isfinite(di) and math.isfinite(dj)):
        return (li, lj, 0.0, 0.0, float("nan"))
    mag = math.hypot(di, dj)
    if mag == 0.0:
        return (li, lj, 0.0, 0.0, float("-inf"))
    return (li, lj, di / mag, dj / mag, math.log10(mag))


def vector_field_grid(beta, axis_i, axis_j, ranges, resolution,
                      fixed_values=None, threads=1):
    """Sample the one-step displacement in a coupling plane.

    Rows are (l_i, l_j, unit direction of the in-plane displacement,
    log10 of its magnitude) in row-major order: the first axis varies
    slowest.  Off-plane couplings are pinned to ``fixed_values``
    (zeros by default).  A zero displacement yields direction (0, 0)
    with magnitude -inf; an undefined point (vanishing normalization)
    yields direction (0, 0) with magnitude nan.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    n = beta.n
    if not (0 <= axis_i < n and 0 <= axis_j < n) or axis_i == axis_j:
        raise ValueError("axes must be distinct coupling indices")
    base = [0.0] * n if fixed_values is None else [float(v)
                                                   for v in fixed_values]
    if len(base) != n:
        raise ValueError(f"expected {n} fixed values, got {len(base)}")
    (i_lo, i_hi), (j_lo, j_hi) = ranges

    def tick(lo, hi, k):
        return lo + (hi - lo) * k / (resolution - 1)

    cells = [(tick(i_lo, i_hi, a), tick(j_lo, j_hi, b))
             for a in range(resolution) for b in range(resolution)]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(
                lambda c: _grid_row(beta, axis_i, axis_j, base, *c), cells))
    return [_grid_row(beta, axis_i, axis_j, base, li, lj)
            for li, lj in cells]
