"""Curve functions, transversal families, and C2 rescaling maps.

A family of C2 graphs is *transversal* when the pointwise value+slope gap
between any two members controls their full C2 distance:

    min_x (|f(x)-g(x)| + |f'(x)-g'(x)|)  >=  (1/T) * ||f-g||_C2,

with transversality constant T >= 1.  Everything in this module measures
norms and infima on a uniform grid (default 2049 points), so all constants
are grid-resolution estimates: grid minima over-estimate true infima and
grid maxima under-estimate true suprema, which makes the estimated T a
*lower* bound of the true constant.

Two concrete family kinds get a fast pairwise path: affine curves and
translates of a fixed quadratic.  For those, the difference of any two
members is an affine function of x, so pairwise grid quantities reduce to
a handful of candidate grid points per pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

DEFAULT_GRID_N = 2049

DUPLICATE_TOL = 1e-12


class EvaluationError(ValueError):
    """A curve evaluator returned a non-finite value."""


class IdenticalCurvesError(ValueError):
    """Two curves at C2 distance below the duplicate tolerance."""


class DomainError(ValueError):
    """Input outside the admissible domain of an operation."""


# --------------------------------------------------------------------------
# Curves
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CurveFunction:
    """An evaluable C2 function on a compact interval.

    ``eval0``, ``eval1``, ``eval2`` evaluate f, f', f'' and must accept
    scalars and numpy arrays.  ``linear_coeffs`` is set for curves whose
    pairwise differences within a family are affine in x: if curve i carries
    (alpha_i, beta_i), then (f_i - f_j)(x) = (alpha_i-alpha_j) x +
    (beta_i-beta_j) and f_i' - f_j' is the constant alpha_i - alpha_j.
    """

    x_lo: float
    x_hi: float
    eval0: Callable
    eval1: Callable
    eval2: Callable
    params: tuple = ()
    family_tag: str = "custom"
    linear_coeffs: tuple | None = None

    @property
    def interval(self) -> tuple[float, float]:
        return (self.x_lo, self.x_hi)

    def midpoint(self) -> float:
        return 0.5 * (self.x_lo + self.x_hi)


def affine_curve(a: float, b: float, interval: tuple[float, float] = (-2.0, 2.0)) -> CurveFunction:
    """The line x -> a*x + b."""
    return CurveFunction(
        x_lo=float(interval[0]),
        x_hi=float(interval[1]),
        eval0=lambda x, a=a, b=b: a * x + b,
        eval1=lambda x, a=a: a * np.ones_like(np.asarray(x, dtype=float)),
        eval2=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        params=(float(a), float(b)),
        family_tag="affine",
        linear_coeffs=(float(a), float(b)),
    )


def quadratic_translate_curve(
    a: float,
    b: float,
    interval: tuple[float, float] = (-2.0, 2.0),
    lead: float = 1.0,
) -> CurveFunction:
    """Translate x -> lead*(x-a)^2 + b of the fixed parabola lead*x^2.

    Differences of two such curves are affine, so the fast pairwise path
    applies: alpha = -2*lead*a, beta = lead*a^2 + b.
    """
    q = float(lead)
    return CurveFunction(
        x_lo=float(interval[0]),
        x_hi=float(interval[1]),
        eval0=lambda x, a=a, b=b, q=q: q * (x - a) ** 2 + b,
        eval1=lambda x, a=a, q=q: 2.0 * q * (x - a),
        eval2=lambda x, q=q: 2.0 * q * np.ones_like(np.asarray(x, dtype=float)),
        params=(float(a), float(b), q),
        family_tag="convex-translate",
        linear_coeffs=(-2.0 * q * float(a), q * float(a) ** 2 + float(b)),
    )


# --------------------------------------------------------------------------
# Convex seeds (Example-style translate families)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvexSeed:
    """A convex C3 seed g on [-6, 6] with its two shape constants.

    frak_G is the C3 norm of g on [-6, 6]; frak_g = min g'' there.  Both are
    grid estimates unless supplied in closed form.
    """

    g0: Callable
    g1: Callable
    g2: Callable
    g3: Callable
    frak_G: float
    frak_g: float
    name: str = "seed"

    def __post_init__(self):
        if not (self.frak_g > 0):
            raise DomainError(f"seed {self.name}: min g'' = {self.frak_g} is not positive")
        if self.frak_G < self.frak_g:
            raise DomainError(f"seed {self.name}: C3 norm {self.frak_G} < min g'' {self.frak_g}")


def seed_from_evaluators(g0, g1, g2, g3, name: str = "seed", grid_n: int = DEFAULT_GRID_N) -> ConvexSeed:
    """Build a ConvexSeed, measuring frak_G and frak_g on a grid over [-6, 6]."""
    xs = np.linspace(-6.0, 6.0, grid_n)
    v0, v1, v2, v3 = (np.asarray(g(xs), dtype=float) for g in (g0, g1, g2, g3))
    for name_k, v in zip("g g' g'' g'''".split(), (v0, v1, v2, v3)):
        if not np.all(np.isfinite(v)):
            bad = xs[~np.isfinite(v)][0]
            raise EvaluationError(f"{name}: {name_k} non-finite at x={bad}")
    frak_G = float(np.max(np.abs(v0) + np.abs(v1) + np.abs(v2) + np.abs(v3)))
    frak_g = float(np.min(v2))
    return ConvexSeed(g0, g1, g2, g3, frak_G=frak_G, frak_g=frak_g, name=name)


def quadratic_seed(lead: float = 1.0) -> ConvexSeed:
    """Seed g(x) = lead*x^2 with exact constants."""
    q = float(lead)
    return ConvexSeed(
        g0=lambda x, q=q: q * np.asarray(x, dtype=float) ** 2,
        g1=lambda x, q=q: 2.0 * q * np.asarray(x, dtype=float),
        g2=lambda x, q=q: 2.0 * q * np.ones_like(np.asarray(x, dtype=float)),
        g3=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        frak_G=q * (36.0 + 12.0 + 2.0),
        frak_g=2.0 * q,
        name=f"quadratic({q})",
    )


def exp_seed() -> ConvexSeed:
    """Seed g(x) = e^x; min g'' on [-6,6] is e^-6."""
    e6 = math.exp(6.0)
    return ConvexSeed(
        g0=np.exp, g1=np.exp, g2=np.exp, g3=np.exp,
        frak_G=4.0 * e6, frak_g=math.exp(-6.0), name="exp",
    )


# --------------------------------------------------------------------------
# Grid norms and pairwise quantities
# --------------------------------------------------------------------------

def _grid(x_lo: float, x_hi: float, grid_n: int) -> np.ndarray:
    if grid_n < 2:
        raise DomainError(f"grid_n must be >= 2, got {grid_n}")
    return np.linspace(x_lo, x_hi, grid_n)


def _eval_checked(fn, xs: np.ndarray, what: str) -> np.ndarray:
    vals = np.asarray(fn(xs), dtype=float)
    if vals.shape != xs.shape:
        vals = np.broadcast_to(vals, xs.shape)
    if not np.all(np.isfinite(vals)):
        bad = xs[~np.isfinite(np.asarray(vals))][0]
        raise EvaluationError(f"{what} returned a non-finite value at x={bad}")
    return vals


def c2_norm(f: CurveFunction, grid_n: int = DEFAULT_GRID_N) -> float:
    """Grid estimate of ||f||_C2 = max_x (|f| + |f'| + |f''|).

    A lower bound of the true norm; exact for affine f at any grid_n >= 2
    because the maximand is then convex.
    """
    xs = _grid(f.x_lo, f.x_hi, grid_n)
    v0 = _eval_checked(f.eval0, xs, "f")
    v1 = _eval_checked(f.eval1, xs, "f'")
    v2 = _eval_checked(f.eval2, xs, "f''")
    return float(np.max(np.abs(v0) + np.abs(v1) + np.abs(v2)))


def c2_dist(f: CurveFunction, g: CurveFunction, grid_n: int = DEFAULT_GRID_N) -> float:
    """Grid estimate of ||f - g||_C2 on the shared interval."""
    _require_shared_interval(f, g)
    xs = _grid(f.x_lo, f.x_hi, grid_n)
    d0 = _eval_checked(f.eval0, xs, "f") - _eval_checked(g.eval0, xs, "g")
    d1 = _eval_checked(f.eval1, xs, "f'") - _eval_checked(g.eval1, xs, "g'")
    d2 = _eval_checked(f.eval2, xs, "f''") - _eval_checked(g.eval2, xs, "g''")
    return float(np.max(np.abs(d0) + np.abs(d1) + np.abs(d2)))


def _require_shared_interval(f: CurveFunction, g: CurveFunction) -> None:
    if (f.x_lo, f.x_hi) != (g.x_lo, g.x_hi):
        raise DomainError(f"curves live on different intervals {f.interval} vs {g.interval}")


def transversality_defect(f: CurveFunction, g: CurveFunction, grid_n: int = DEFAULT_GRID_N) -> float:
    """min_grid(|f-g| + |f'-g'|) / ||f-g||_C2,grid.

    A family is T-transversal (at grid resolution) iff every pairwise defect
    is >= 1/T.  Raises IdenticalCurvesError when ||f-g|| vanishes.
    """
    _require_shared_interval(f, g)
    xs = _grid(f.x_lo, f.x_hi, grid_n)
    d0 = np.abs(_eval_checked(f.eval0, xs, "f") - _eval_checked(g.eval0, xs, "g"))
    d1 = np.abs(_eval_checked(f.eval1, xs, "f'") - _eval_checked(g.eval1, xs, "g'"))
    d2 = np.abs(_eval_checked(f.eval2, xs, "f''") - _eval_checked(g.eval2, xs, "g''"))
    denom = float(np.max(d0 + d1 + d2))
    if denom <= DUPLICATE_TOL:
        raise IdenticalCurvesError("curves are identical (C2 distance below 1e-12)")
    return float(np.min(d0 + d1)) / denom


def _affine_pair_min_max(alpha: np.ndarray, beta: np.ndarray, xs: np.ndarray):
    """Vectorised grid min/max of |alpha*x + beta| over grid xs, per pair.

    The minimand is V-shaped, so the grid minimum sits at the grid points
    bracketing the root -beta/alpha (clipped to the grid); the maximum sits
    at an endpoint.
    """
    n = xs.shape[0]
    lo, hi = xs[0], xs[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        xstar = np.where(alpha != 0.0, -beta / np.where(alpha == 0.0, 1.0, alpha), lo)
    step = (hi - lo) / (n - 1)
    i_real = (xstar - lo) / step
    i0 = np.clip(np.floor(i_real).astype(np.int64) - 1, 0, n - 1)
    cand = np.stack([np.clip(i0 + k, 0, n - 1) for k in range(4)], axis=-1)
    vals = np.abs(alpha[..., None] * xs[cand] + beta[..., None])
    vmin = vals.min(axis=-1)
    ends = np.abs(np.stack([alpha * lo + beta, alpha * hi + beta], axis=-1))
    vmin = np.minimum(vmin, ends.min(axis=-1))
    vmax = ends.max(axis=-1)
    return vmin, vmax


# --------------------------------------------------------------------------
# Transversal families
# --------------------------------------------------------------------------

class TransversalFamily:
    """A finite collection of CurveFunctions over one shared interval.

    ``t_const`` (estimated transversality constant) and ``c2_bound`` are
    computed lazily and cached; ``declared_t_const`` lets structured
    generators install an analytically certified bound so that huge families
    skip the O(n^2) pairwise pass.  All state is immutable after
    construction apart from those caches.
    """

    #: families larger than this skip the full O(n^2) duplicate scan
    FULL_PAIR_LIMIT = 4096

    def __init__(
        self,
        curves: Sequence[CurveFunction],
        grid_n: int = DEFAULT_GRID_N,
        declared_t_const: float | None = None,
        check_duplicates: bool = True,
    ):
        curves = list(curves)
        if not curves:
            raise DomainError("a family needs at least one curve")
        iv = curves[0].interval
        for c in curves[1:]:
            if c.interval != iv:
                raise DomainError(f"all curves must share one interval; got {iv} and {c.interval}")
        self.curves = curves
        self.x_lo, self.x_hi = iv
        self.grid_n = int(grid_n)
        self.declared_t_const = declared_t_const
        self._t_const: float | None = None
        self._c2_bound: float | None = None
        self._images: np.ndarray | None = None
        self._grid_cache: np.ndarray | None = None
        self._min_pair: float | None = None
        if check_duplicates:
            self._reject_duplicates()

    # -- basics ------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.curves)

    def __iter__(self):
        return iter(self.curves)

    @property
    def interval(self) -> tuple[float, float]:
        return (self.x_lo, self.x_hi)

    def grid(self) -> np.ndarray:
        if self._grid_cache is None:
            self._grid_cache = _grid(self.x_lo, self.x_hi, self.grid_n)
        return self._grid_cache

    def midpoint_x(self) -> float:
        """The grid's middle element; equals the interval midpoint for odd grid_n."""
        g = self.grid()
        return float(g[(len(g) - 1) // 2])

    def subfamily(self, indices) -> "TransversalFamily":
        idx = list(indices)
        sub = TransversalFamily(
            [self.curves[i] for i in idx],
            grid_n=self.grid_n,
            declared_t_const=self.declared_t_const,
            check_duplicates=False,
        )
        return sub

    def linear_coeff_arrays(self) -> tuple[np.ndarray, np.ndarray] | None:
        """(alpha, beta) arrays when every member carries linear_coeffs."""
        if any(c.linear_coeffs is None for c in self.curves):
            return None
        al = np.array([c.linear_coeffs[0] for c in self.curves])
        be = np.array([c.linear_coeffs[1] for c in self.curves])
        return al, be

    # -- duplicate rejection -------------------------------------------------

    def _reject_duplicates(self) -> None:
        n = len(self.curves)
        coeffs = self.linear_coeff_arrays()
        if coeffs is not None:
            al, be = coeffs
            order = np.lexsort((be, al))
            # any exact or near-duplicate collapses in (alpha, beta); for
            # affine differences ||f-g|| >= max(|dalpha|, |dbeta|)
            da = np.abs(np.diff(al[order]))
            db = np.abs(np.diff(be[order]))
            close = (da < DUPLICATE_TOL) & (db < DUPLICATE_TOL)
            if np.any(close):
                j = int(np.argmax(close))
                i1, i2 = int(order[j]), int(order[j + 1])
                raise IdenticalCurvesError(f"duplicate curves at indices {i1} and {i2}")
            return
        if n > self.FULL_PAIR_LIMIT:
            return
        for ii, jj, _, dist in self.pairwise_defect_and_dist():
            dup = dist < DUPLICATE_TOL
            if np.any(dup):
                k = int(np.argmax(dup))
                raise IdenticalCurvesError(
                    f"duplicate curves at indices {int(ii[k])} and {int(jj[k])}"
                )

    # -- pairwise machinery ---------------------------------------------------

    def _pair_index_chunks(self, chunk: int = 1 << 20):
        n = len(self.curves)
        ii, jj = np.triu_indices(n, k=1)
        for start in range(0, len(ii), chunk):
            yield ii[start:start + chunk], jj[start:start + chunk]

    def pairwise_defect_and_dist(self):
        """Yield (i, j, defect, dist) arrays over all pairs, chunked."""
        coeffs = self.linear_coeff_arrays()
        xs = self.grid()
        if coeffs is not None:
            al, be = coeffs
            for ii, jj in self._pair_index_chunks():
                a = al[ii] - al[jj]
                b = be[ii] - be[jj]
                vmin, vmax = _affine_pair_min_max(a, b, xs)
                dist = vmax + np.abs(a)
                num = vmin + np.abs(a)
                with np.errstate(divide="ignore", invalid="ignore"):
                    defect = np.where(dist > 0, num / np.where(dist == 0, 1.0, dist), np.inf)
                yield ii, jj, defect, dist
        else:
            v0 = np.stack([_eval_checked(c.eval0, xs, "f") for c in self.curves])
            v1 = np.stack([_eval_checked(c.eval1, xs, "f'") for c in self.curves])
            v2 = np.stack([_eval_checked(c.eval2, xs, "f''") for c in self.curves])
            for ii, jj in self._pair_index_chunks(chunk=max(1, (1 << 22) // len(xs))):
                d0 = np.abs(v0[ii] - v0[jj])
                d1 = np.abs(v1[ii] - v1[jj])
                d2 = np.abs(v2[ii] - v2[jj])
                dist = (d0 + d1 + d2).max(axis=1)
                num = (d0 + d1).min(axis=1)
                with np.errstate(divide="ignore", invalid="ignore"):
                    defect = np.where(dist > 0, num / np.where(dist == 0, 1.0, dist), np.inf)
                yield ii, jj, defect, dist

    def pairwise_c2_distances(self) -> np.ndarray:
        """Full condensed distance vector (order of triu_indices)."""
        out = []
        for _, _, _, dist in self.pairwise_defect_and_dist():
            out.append(dist)
        return np.concatenate(out) if out else np.zeros(0)

    def min_pair_distance(self) -> float:
        if self._min_pair is None:
            worst = math.inf
            for _, _, _, dist in self.pairwise_defect_and_dist():
                worst = min(worst, float(dist.min()))
            self._min_pair = worst
        return self._min_pair

    @property
    def t_const(self) -> float:
        if self._t_const is None:
            self._t_const = estimate_transversality_constant(self)
        return self._t_const

    def t_bound(self) -> float:
        """Declared constant when present, else the estimated one."""
        if self.declared_t_const is not None:
            return self.declared_t_const
        return self.t_const

    @property
    def c2_bound(self) -> float:
        if self._c2_bound is None:
            self._c2_bound = max(c2_norm(c, self.grid_n) for c in self.curves)
        return self._c2_bound

    def embedding_images(self) -> np.ndarray:
        """A(f) = (f(x0), f'(x0)) for every member, x0 the grid midpoint."""
        if self._images is None:
            x0 = self.midpoint_x()
            xarr = np.array([x0])
            img = np.empty((len(self.curves), 2))
            for i, c in enumerate(self.curves):
                img[i, 0] = float(np.asarray(c.eval0(xarr), dtype=float).reshape(-1)[0])
                img[i, 1] = float(np.asarray(c.eval1(xarr), dtype=float).reshape(-1)[0])
            if not np.all(np.isfinite(img)):
                raise EvaluationError("non-finite curve value at the interval midpoint")
            self._images = img
        return self._images


def estimate_transversality_constant(family: TransversalFamily) -> float:
    """max(1, 1 / min pairwise defect), the grid estimate of T.

    O(n^2 * grid_n) in general, O(n^2) for affine-difference families.
    Raises IdenticalCurvesError naming the pair if two members coincide.
    """
    if len(family) < 2:
        return 1.0
    worst = math.inf
    for ii, jj, defect, dist in family.pairwise_defect_and_dist():
        dead = dist <= DUPLICATE_TOL
        if np.any(dead):
            k = int(np.argmax(dead))
            raise IdenticalCurvesError(
                f"duplicate curves at indices {int(ii[k])} and {int(jj[k])}"
            )
        worst = min(worst, float(defect.min()))
    if worst <= 0:
        raise DomainError("zero transversality defect; family is not transversal at grid resolution")
    return max(1.0, 1.0 / worst)


# --------------------------------------------------------------------------
# Convex translate families (Example-style)
# --------------------------------------------------------------------------

def convex_translate_family(
    seed: ConvexSeed,
    centers: Sequence[tuple[float, float]],
    x0: float = 0.0,
    grid_n: int = DEFAULT_GRID_N,
) -> TransversalFamily:
    """Translates g_z(x) = g(x - a) + b over [x0-5, x0+5], z = (a, b).

    Centers must satisfy a in [x0-1, x0+1] so that x - a stays in [-6, 6]
    on the working interval.  The construction verifies, at grid
    resolution, that ||g_z1 - g_z2||_C2 is comparable to |z1 - z2| and
    records the two comparability constants on the returned family as
    ``form28_lower`` / ``form28_upper`` (min/max of ratio norm/|z1-z2|).
    """
    centers = [(float(a), float(b)) for a, b in centers]
    for a, b in centers:
        if not (x0 - 1.0 <= a <= x0 + 1.0):
            raise DomainError(f"center a={a} outside [{x0 - 1}, {x0 + 1}]")
    interval = (x0 - 5.0, x0 + 5.0)

    def make(a, b):
        return CurveFunction(
            x_lo=interval[0],
            x_hi=interval[1],
            eval0=lambda x, a=a, b=b: np.asarray(seed.g0(np.asarray(x, dtype=float) - a), dtype=float) + b,
            eval1=lambda x, a=a: np.asarray(seed.g1(np.asarray(x, dtype=float) - a), dtype=float),
            eval2=lambda x, a=a: np.asarray(seed.g2(np.asarray(x, dtype=float) - a), dtype=float),
            params=(a, b),
            family_tag="convex-translate",
        )

    curves = [make(a, b) for a, b in centers]
    fam = TransversalFamily(curves, grid_n=grid_n)

    # convexity floor on the working interval
    xs = fam.grid()
    for c in curves:
        v2 = _eval_checked(c.eval2, xs, "g''")
        if np.min(v2) < seed.frak_g * (1.0 - 1e-9):
            raise DomainError(
                f"translate at {c.params}: g'' dips below the seed floor {seed.frak_g}"
            )

    lower = math.inf
    upper = 0.0
    pts = np.array(centers)
    if len(centers) >= 2:
        for ii, jj, _, dist in fam.pairwise_defect_and_dist():
            zgap = np.hypot(pts[ii, 0] - pts[jj, 0], pts[ii, 1] - pts[jj, 1])
            ratio = dist / zgap
            lower = min(lower, float(ratio.min()))
            upper = max(upper, float(ratio.max()))
    fam.form28_lower = lower
    fam.form28_upper = upper
    return fam


# --------------------------------------------------------------------------
# Rescaling maps
# --------------------------------------------------------------------------

def _compose_ball(c: CurveFunction, f0: CurveFunction, r0: float) -> CurveFunction:
    lc = None
    if c.linear_coeffs is not None and f0.linear_coeffs is not None:
        lc = ((c.linear_coeffs[0] - f0.linear_coeffs[0]) / r0,
              (c.linear_coeffs[1] - f0.linear_coeffs[1]) / r0)
    return CurveFunction(
        x_lo=c.x_lo, x_hi=c.x_hi,
        eval0=lambda x, c=c, f0=f0, r0=r0: (np.asarray(c.eval0(x), dtype=float) - np.asarray(f0.eval0(x), dtype=float)) / r0,
        eval1=lambda x, c=c, f0=f0, r0=r0: (np.asarray(c.eval1(x), dtype=float) - np.asarray(f0.eval1(x), dtype=float)) / r0,
        eval2=lambda x, c=c, f0=f0, r0=r0: (np.asarray(c.eval2(x), dtype=float) - np.asarray(f0.eval2(x), dtype=float)) / r0,
        params=c.params,
        family_tag="custom",
        linear_coeffs=lc,
    )


def rescale_ball(
    family: TransversalFamily,
    f0: CurveFunction,
    r0: float,
    check: bool | None = None,
) -> TransversalFamily:
    """The ball rescaling f -> (f - f0)/r0 on the same interval.

    Preserves the transversality constant exactly in theory; when ``check``
    is on (default: families of <= 512 curves) the estimated constants of
    input and output are compared and must agree to 1%.
    """
    if not (r0 > 0):
        raise DomainError(f"r0 must be positive, got {r0}")
    out = TransversalFamily(
        [_compose_ball(c, f0, r0) for c in family],
        grid_n=family.grid_n,
        declared_t_const=family.declared_t_const,
        check_duplicates=False,
    )
    if check is None:
        check = len(family) <= 512
    if check and len(family) >= 2:
        t_in = family.t_const
        t_out = out.t_const
        if abs(t_out - t_in) > 0.01 * t_in:
            raise DomainError(
                f"ball rescaling changed the estimated transversality constant: {t_in} -> {t_out}"
            )
    return out


def rescale_window(
    family: TransversalFamily,
    x0: float,
    y0: float,
    r: float,
    window: tuple[float, float],
    check: bool | None = None,
) -> TransversalFamily:
    """The window rescaling f -> (f(r x + x0) - y0)/r on the interval J.

    Requires J inside (I - x0)/r and r in (0, 1].  The output's estimated
    constant is asserted to satisfy T_out <= |J| * T_in + 1 (plus grid
    tolerance) when checking is on.
    """
    if not (0 < r <= 1):
        raise DomainError(f"r must lie in (0, 1], got {r}")
    lo, hi = float(window[0]), float(window[1])
    if lo >= hi:
        raise DomainError(f"empty window {window}")
    src_lo = (family.x_lo - x0) / r
    src_hi = (family.x_hi - x0) / r
    tol = 1e-9 * max(1.0, abs(src_lo), abs(src_hi))
    if lo < src_lo - tol or hi > src_hi + tol:
        raise DomainError(f"window {window} not contained in (I - x0)/r = ({src_lo}, {src_hi})")

    def make(c: CurveFunction) -> CurveFunction:
        lc = None
        if c.linear_coeffs is not None:
            al, be = c.linear_coeffs
            lc = (al, (al * x0 + be) / r)
        return CurveFunction(
            x_lo=lo, x_hi=hi,
            eval0=lambda x, c=c: (np.asarray(c.eval0(r * np.asarray(x, dtype=float) + x0), dtype=float) - y0) / r,
            eval1=lambda x, c=c: np.asarray(c.eval1(r * np.asarray(x, dtype=float) + x0), dtype=float),
            eval2=lambda x, c=c: r * np.asarray(c.eval2(r * np.asarray(x, dtype=float) + x0), dtype=float),
            params=c.params,
            family_tag="custom",
            linear_coeffs=lc,
        )

    out = TransversalFamily(
        [make(c) for c in family],
        grid_n=family.grid_n,
        check_duplicates=False,
    )
    if check is None:
        check = len(family) <= 512
    if check and len(family) >= 2:
        t_in = family.t_const
        t_out = out.t_const
        budget = (hi - lo) * t_in + 1.0
        if t_out > budget * (1.0 + 1e-6):
            raise DomainError(
                f"window rescaling broke the constant budget: T_out={t_out} > |J|*T_in+1={budget}"
            )
    return out


# --------------------------------------------------------------------------
# Intersection structure of thin neighbourhoods
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ComponentReport:
    """Connected components of {x : |f(x)-g(x)| < 2r} at grid resolution."""

    intervals: tuple[tuple[float, float], ...]
    lengths: tuple[float, ...]
    under_resolved: bool

    def __len__(self) -> int:
        return len(self.intervals)


def intersection_components(
    f: CurveFunction,
    g: CurveFunction,
    r: float,
    grid_n: int = DEFAULT_GRID_N,
) -> ComponentReport:
    """Components of the x-projection of the overlap of two r-neighbourhoods.

    Scans {x in interior(I) : |f(x)-g(x)| < 2r} on the grid; each maximal
    run of grid points becomes one interval (reported by its first/last grid
    point, an inner approximation accurate to one grid step per side).  Runs
    spanning fewer than two grid steps raise the under_resolved flag.
    """
    if not (r > 0):
        raise DomainError(f"r must be positive, got {r}")
    _require_shared_interval(f, g)
    if c2_dist(f, g, grid_n) <= DUPLICATE_TOL:
        raise IdenticalCurvesError("curves are identical")
    xs = _grid(f.x_lo, f.x_hi, grid_n)[1:-1]
    gap = np.abs(
        _eval_checked(f.eval0, xs, "f") - _eval_checked(g.eval0, xs, "g")
    )
    mask = gap < 2.0 * r
    if not np.any(mask):
        return ComponentReport((), (), False)
    padded = np.concatenate([[False], mask, [False]])
    starts = np.flatnonzero(padded[1:] & ~padded[:-1])
    ends = np.flatnonzero(~padded[1:] & padded[:-1]) - 1
    intervals = tuple((float(xs[s]), float(xs[e])) for s, e in zip(starts, ends))
    lengths = tuple(b - a for a, b in intervals)
    h = xs[1] - xs[0] if len(xs) > 1 else 0.0
    under = bool(any((e - s) < 2 for s, e in zip(starts, ends))) and h > 0
    return ComponentReport(intervals, lengths, under)
