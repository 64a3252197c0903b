"""Weighted best polynomial approximation on [-1, 1].

`weighted_remez` estimates E_m(f)_u = inf_P ||(f - P) u||_inf by a
discretized multi-point exchange on a fine Chebyshev grid: it maintains m+2
reference points, solves the linear alternation system for the polynomial
(in the Chebyshev basis) and the levelled error h, then replaces the
references with the extrema of the weighted residual. The levelled |h| is a
lower bound for the minimax error and the residual maximum an upper bound,
so the pair brackets the answer at every iteration.

Given a callable, the converged grid solution is polished off-grid: the
references are re-located by parabolic/golden search on the continuous
weighted residual and the alternation system is re-solved, which levels the
equioscillation to solver precision. With precomputed samples only, the
final extrema are instead sharpened through the three neighbouring samples
(a parabola vertex), accurate to O(spacing^3) without new evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from .errors import EvaluationError, SingularSystemError
from .expr import ExprAst
from .weighted import (
    DEFAULT_GRID,
    GridConfig,
    JacobiWeight,
    derivative_fn,
    weight_eval,
    weighted_sup_norm,
)


@dataclass(frozen=True)
class ChebPoly:
    """Polynomial in the Chebyshev basis T_0..T_m, evaluated by Clenshaw."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise ValueError("a polynomial needs at least one coefficient")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return npcheb.chebval(x, self.coeffs)


@dataclass(frozen=True)
class RemezOptions:
    grid_points: int = 8193
    tol: float = 1e-10
    max_iter: int = 60
    endpoint_margin: float = 1e-12
    polish_max_iter: int = 10


DEFAULT_REMEZ = RemezOptions()


@dataclass(frozen=True)
class ApproxReport:
    """Result of one minimax solve.

    error is the refined residual maximum (upper estimate of E_m);
    leveled_error is |h| from the final alternation solve (lower estimate).
    extrema is the final reference set, strictly increasing with alternating
    weighted residual signs.
    """

    m: int
    error: float
    leveled_error: float
    poly: ChebPoly
    extrema: tuple[float, ...]
    iterations: int
    converged: bool


def remez_grid(w: JacobiWeight, opts: RemezOptions = DEFAULT_REMEZ) -> np.ndarray:
    """Ascending Chebyshev-spaced sampling grid, endpoints pulled inward
    where the weight vanishes (so singular-but-integrable f stays finite)."""
    n = opts.grid_points
    xs = -np.cos(math.pi * np.arange(n) / (n - 1))
    xs[0], xs[-1] = -1.0, 1.0
    if w.delta > 0:
        xs[0] = -1.0 + opts.endpoint_margin
    if w.gamma > 0:
        xs[-1] = 1.0 - opts.endpoint_margin
    return xs


def _alternation_solve(
    x_ref: np.ndarray, fu_ref: np.ndarray, u_ref: np.ndarray, m: int
) -> tuple[np.ndarray, float]:
    """Solve (f(x_i) - P(x_i)) u(x_i) = (-1)^i h for P's coefficients and h."""
    k = len(x_ref)
    A = np.empty((k, m + 2))
    A[:, : m + 1] = npcheb.chebvander(x_ref, m) * u_ref[:, None]
    A[:, m + 1] = (-1.0) ** np.arange(k)
    try:
        sol = np.linalg.solve(A, fu_ref)
    except np.linalg.LinAlgError:
        raise SingularSystemError(x_ref.tolist()) from None
    return sol[: m + 1], float(sol[m + 1])


def _extrema_candidates(e: np.ndarray) -> list[int]:
    """One index per maximal run of constant residual sign (zeros ignored)."""
    candidates: list[int] = []
    run_sign = 0
    best_idx = -1
    best_val = -1.0
    for i, v in enumerate(e):
        s = 1 if v > 0 else (-1 if v < 0 else 0)
        if s == 0:
            continue
        if s != run_sign:
            if run_sign != 0:
                candidates.append(best_idx)
            run_sign = s
            best_idx = i
            best_val = abs(v)
        elif abs(v) > best_val:
            best_idx = i
            best_val = abs(v)
    if run_sign != 0:
        candidates.append(best_idx)
    return candidates


def _trim_candidates(cand: list[int], e: np.ndarray, target: int) -> list[int]:
    """Reduce an alternating candidate list to `target` entries.

    Drops the weaker endpoint when an odd number of extras remains, otherwise
    the adjacent pair whose larger residual is smallest; alternation survives
    both moves and the globally largest residual is never dropped.
    """
    cand = list(cand)
    while len(cand) > target:
        if (len(cand) - target) % 2 == 1:
            if abs(e[cand[0]]) <= abs(e[cand[-1]]):
                cand.pop(0)
            else:
                cand.pop()
        else:
            pair_scores = [
                max(abs(e[cand[i]]), abs(e[cand[i + 1]]))
                for i in range(len(cand) - 1)
            ]
            i = int(np.argmin(pair_scores))
            del cand[i : i + 2]
    return cand


def _parabola_peak(x: np.ndarray, y: np.ndarray, i: int) -> tuple[float, float]:
    """Vertex of the parabola through samples i-1, i, i+1 of |y| (clamped)."""
    if i == 0 or i == len(x) - 1:
        return float(x[i]), float(abs(y[i]))
    x0, x1, x2 = float(x[i - 1]), float(x[i]), float(x[i + 1])
    y0, y1, y2 = abs(float(y[i - 1])), abs(float(y[i])), abs(float(y[i + 1]))
    num = (x1 - x0) ** 2 * (y1 - y2) - (x1 - x2) ** 2 * (y1 - y0)
    den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0)
    if den == 0.0:
        return x1, y1
    xv = x1 - 0.5 * num / den
    if not x0 < xv < x2:
        return x1, y1
    # value at the vertex from the same quadratic model
    d01 = (y1 - y0) / (x1 - x0)
    d12 = (y2 - y1) / (x2 - x1)
    curv = (d12 - d01) / (x2 - x0)
    yv = y1 + d01 * (xv - x1) + curv * (xv - x0) * (xv - x1)
    return xv, max(yv, y1)


def _refine_signed_max(
    g: Callable[[float], float], a: float, b: float, c: float, rel_tol: float
) -> tuple[float, float]:
    """Maximize g on [a, c] from the bracket point b by parabola/golden steps."""
    inv_gold = (math.sqrt(5.0) - 1.0) / 2.0
    fa, fb, fc = g(a), g(b), g(c)
    if a == b or b == c:
        mid = 0.5 * (a + c)
        fm = g(mid)
        if fm >= fb:
            b, fb = mid, fm
    for _ in range(60):
        prev = fb
        num = (b - a) ** 2 * (fb - fc) - (b - c) ** 2 * (fb - fa)
        den = (b - a) * (fb - fc) - (b - c) * (fb - fa)
        x = None
        if den != 0.0:
            cand = b - 0.5 * num / den
            if a < cand < c and abs(cand - b) > 1e-17:
                x = cand
        if x is None:
            x = b + (1 - inv_gold) * ((c - b) if (c - b) > (b - a) else (a - b))
            if not a < x < c or x == b:
                break
        fx = g(x)
        if fx > fb:
            if x < b:
                c, fc = b, fb
            else:
                a, fa = b, fb
            b, fb = x, fx
        else:
            if x < b:
                a, fa = x, fx
            else:
                c, fc = x, fx
        if abs(fb - prev) <= rel_tol * max(abs(fb), 1e-300) and (c - a) < 1e-6:
            break
    return b, fb


def remez_from_values(
    xs: np.ndarray,
    fvals: np.ndarray,
    m: int,
    w: JacobiWeight,
    opts: RemezOptions = DEFAULT_REMEZ,
    *,
    refine_with: Callable | None = None,
) -> ApproxReport:
    """Run the exchange on precomputed samples fvals = f(xs).

    When `refine_with` supplies the underlying callable, the converged
    solution is polished off-grid (see module docstring).
    """
    if m < 0:
        raise ValueError(f"degree must be nonnegative, got {m}")
    xs = np.asarray(xs, dtype=float)
    fvals = np.asarray(fvals, dtype=float)
    if xs.shape != fvals.shape:
        raise ValueError("xs and fvals must have equal length")
    if len(xs) < m + 2:
        raise ValueError(f"grid of {len(xs)} points cannot host {m + 2} references")
    if not np.all(np.isfinite(fvals)):
        bad = int(np.argmin(np.isfinite(fvals)))
        raise EvaluationError("non-finite function sample", float(xs[bad]))
    uvals = weight_eval(w, xs)
    fu = fvals * uvals
    scale = max(1.0, float(np.max(np.abs(fu))))
    noise = 16.0 * np.finfo(float).eps * scale

    n = len(xs)
    ref_idx = np.round(np.arange(m + 2) * (n - 1) / (m + 1)).astype(int)
    # shift the interior points off the mirror-symmetric layout: a symmetric
    # reference set on an even function solves to h = 0 and stalls the exchange
    ref_idx[1:-1] = np.minimum(ref_idx[1:-1] + 1, n - 2)
    if len(np.unique(ref_idx)) < m + 2:
        raise ValueError("grid too coarse for the requested degree")

    best: tuple | None = None
    converged = False
    degenerate = False
    iterations = 0
    for iterations in range(1, max(1, opts.max_iter) + 1):
        coeffs, h = _alternation_solve(xs[ref_idx], fu[ref_idx], uvals[ref_idx], m)
        e = fu - npcheb.chebval(xs, coeffs) * uvals
        e_up = float(np.max(np.abs(e)))
        if best is None or e_up < best[0]:
            best = (e_up, coeffs, abs(h), ref_idx.copy(), e)
        if e_up <= 1e-13 * scale:  # f is (numerically) already in P_m
            best = (e_up, coeffs, abs(h), ref_idx.copy(), e)
            converged = True
            degenerate = True
            break
        if e_up - abs(h) <= max(opts.tol * e_up, noise):
            best = (e_up, coeffs, abs(h), ref_idx.copy(), e)
            converged = True
            break
        cand = _extrema_candidates(e)
        if len(cand) < m + 2:
            break  # degenerate residual; keep best-so-far
        new_idx = np.array(_trim_candidates(cand, e, m + 2))
        if np.array_equal(new_idx, ref_idx):
            break  # exchange fixed point: the bracket cannot tighten further
        ref_idx = new_idx

    e_up, coeffs, h_abs, ref_idx, e = best
    ref_x = xs[ref_idx].astype(float)

    if refine_with is not None and not degenerate:
        polished = _polish(
            refine_with, w, m, ref_x, float(xs[0]), float(xs[-1]), opts, noise
        )
        if polished is not None:
            coeffs, h_abs, ref_x, values, lev_ok = polished
            e_up = max(float(np.max(values)), h_abs)
            converged = converged or lev_ok
    else:
        # sharpen the grid extrema through neighbouring samples
        refined = [_parabola_peak(xs, e, int(i)) for i in ref_idx]
        ref_x = np.array([p[0] for p in refined])
        e_up = max(e_up, max(p[1] for p in refined))

    return ApproxReport(
        m=m,
        error=e_up,
        leveled_error=h_abs,
        poly=ChebPoly(tuple(float(c) for c in coeffs)),
        extrema=tuple(float(x) for x in ref_x),
        iterations=iterations,
        converged=converged,
    )


def _polish(
    f: Callable,
    w: JacobiWeight,
    m: int,
    ref_x: np.ndarray,
    lo: float,
    hi: float,
    opts: RemezOptions,
    noise: float,
):
    """Off-grid exchange: relocate references on the continuous residual and
    re-solve until the equioscillation levels. Returns None if the system
    degenerates (caller keeps the grid solution)."""
    refs = ref_x.copy()
    coeffs = None
    h = 0.0
    values = None
    for _ in range(max(1, opts.polish_max_iter)):
        u_ref = weight_eval(w, refs)
        f_ref = np.array([float(f(float(x))) for x in refs])
        try:
            coeffs, h = _alternation_solve(refs, f_ref * u_ref, u_ref, m)
        except SingularSystemError:
            return None
        sign_h = 1.0 if h >= 0 else -1.0

        def residual(x: float) -> float:
            return (float(f(x)) - float(npcheb.chebval(x, coeffs))) * float(
                weight_eval(w, x)
            )

        new_refs = np.empty_like(refs)
        values = np.empty_like(refs)
        k = len(refs)
        for i in range(k):
            a = lo if i == 0 else 0.5 * (refs[i - 1] + refs[i])
            c = hi if i == k - 1 else 0.5 * (refs[i] + refs[i + 1])
            sigma = sign_h * (1.0 if i % 2 == 0 else -1.0)
            x_i, v_i = _refine_signed_max(
                lambda x: sigma * residual(x), a, float(refs[i]), c, opts.tol
            )
            new_refs[i] = x_i
            values[i] = v_i
        if np.any(np.diff(new_refs) <= 0) or np.any(values <= 0):
            return None  # lost alternation; keep the grid solution
        refs = new_refs
        spread = float(np.max(values) - np.min(values))
        if spread <= max(opts.tol * float(np.max(values)), noise):
            return coeffs, abs(h), refs, values, True
    return coeffs, abs(h), refs, values, False


def _sample(f: Callable, xs: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(f(xs), dtype=float)
        if vals.shape != xs.shape:
            raise TypeError
        return vals
    except (TypeError, ValueError):
        return np.array([float(f(float(x))) for x in xs])


def weighted_remez(
    f: Callable,
    m: int,
    w: JacobiWeight,
    opts: RemezOptions = DEFAULT_REMEZ,
) -> ApproxReport:
    """Weighted minimax approximation of a callable f on [-1, 1]."""
    xs = remez_grid(w, opts)
    return remez_from_values(xs, _sample(f, xs), m, w, opts, refine_with=f)


def cheb_interpolant(f: Callable, m: int) -> ChebPoly:
    """Interpolant at the m+1 Chebyshev points of the first kind."""
    if m < 0:
        raise ValueError(f"degree must be nonnegative, got {m}")
    k = np.arange(m + 1)
    theta = math.pi * (k + 0.5) / (m + 1)
    nodes = np.cos(theta)
    fvals = _sample(f, nodes)
    if not np.all(np.isfinite(fvals)):
        bad = int(np.argmin(np.isfinite(fvals)))
        raise EvaluationError("non-finite node value", float(nodes[bad]))
    coeffs = np.empty(m + 1)
    for j in range(m + 1):
        coeffs[j] = (2.0 / (m + 1)) * np.sum(fvals * np.cos(j * theta))
    coeffs[0] /= 2.0
    return ChebPoly(tuple(float(c) for c in coeffs))


def favard_rhs(f: ExprAst, r: int, m: int, w: JacobiWeight,
               grid: GridConfig = DEFAULT_GRID) -> float:
    """||f^(r) phi^r u||_inf / m^r, the smoothness side of the Favard bound
    (without its unspecified absolute constant)."""
    if r < 1:
        raise ValueError(f"order must be positive, got {r}")
    if m < r:
        raise ValueError(f"need m >= r, got m={m}, r={r}")
    seminorm = weighted_sup_norm(derivative_fn(f, r), w, r, grid)
    return seminorm.value / float(m) ** r
