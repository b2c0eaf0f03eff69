"""Fractal measures on convex curves: Fourier transforms, L^p norms, energies.

Convention: sigma-hat(xi) = sum_j w_j exp(-2 pi i <x_j, xi>).  L^p norms
over a ball B(R) are Riemann sums on the square grid h Z^2 intersected
with the closed ball.  On that grid the transform factorises per atom into
an outer product of two geometric sequences, so the whole grid evaluation
is one complex matrix product; this is an exact rearrangement of the
direct sum, not an approximation.

The Riesz energy uses a distance cutoff at delta instead of a mollifier:
I_t(mu) = sum_{i,j} w_i w_j max(|x_i - x_j|, delta)^-t, diagonal included.
The cutoff stand-in is exact to evaluate and is labelled as such in
reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dyadic import AtomicMeasure, frostman_constant, side_of
from .family import DomainError


def gamma(s: float, t: float) -> float:
    """The three-way exponent min{s+t, (3s+t)/2, s+1}."""
    return min(s + t, (3.0 * s + t) / 2.0, s + 1.0)


# --------------------------------------------------------------------------
# Curve measures
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CurveMeasure:
    """An atomic measure supported on the graph {(x, g(x)) : x in [-1, 1]}."""

    measure: AtomicMeasure
    s: float
    frostman_c: float
    delta_exp: int

    @property
    def points(self) -> np.ndarray:
        return self.measure.points

    @property
    def weights(self) -> np.ndarray:
        return self.measure.weights

    @property
    def total_mass(self) -> float:
        return self.measure.total_mass

    def __len__(self) -> int:
        return len(self.measure)


def lift_measure(
    g0,
    base_points: np.ndarray,
    base_weights: np.ndarray,
    s: float,
    delta_exp: int,
) -> CurveMeasure:
    """Lift a weighted base set on [-1, 1] to the graph of g.

    Atoms become (x, g(x)) with the base weights; the planar Frostman
    constant at exponent s is re-measured down to scale 2^-delta_exp and
    recorded.  Total mass above 1 is an error.
    """
    xs = np.asarray(base_points, dtype=float).reshape(-1)
    ws = np.asarray(base_weights, dtype=float).reshape(-1)
    if np.any(xs < -1.0) or np.any(xs > 1.0):
        raise DomainError("base points must lie in [-1, 1]")
    ys = np.asarray(g0(xs), dtype=float)
    mu = AtomicMeasure(np.stack([xs, ys], axis=1), ws)
    rep = frostman_constant(mu, s, delta_exp, max_centers=256)
    return CurveMeasure(measure=mu, s=s, frostman_c=rep.best_constant, delta_exp=delta_exp)


def uniform_grid_lift(g0, delta_exp: int, s: float = 1.0) -> CurveMeasure:
    """Equal weights on the delta-grid of [-1, 1], lifted to the graph of g."""
    dl = side_of(delta_exp)
    n = int(round(2.0 / dl)) + 1
    xs = -1.0 + dl * np.arange(n)
    ws = np.full(n, 1.0 / n)
    return lift_measure(g0, xs, ws, s, delta_exp)


# --------------------------------------------------------------------------
# Fourier transform
# --------------------------------------------------------------------------

def fourier_transform(sigma, xi) -> complex | np.ndarray:
    """sigma-hat at one frequency or an (n, 2) array of frequencies.

    Direct summation; |sigma-hat(xi)| <= total mass for every xi.
    """
    pts, ws = _atoms_of(sigma)
    xi_arr = np.asarray(xi, dtype=float)
    single = xi_arr.ndim == 1
    if single:
        xi_arr = xi_arr[None, :]
    phase = xi_arr @ pts.T  # (n, atoms)
    vals = np.exp(-2j * np.pi * phase) @ ws
    return complex(vals[0]) if single else vals


def _atoms_of(sigma) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(sigma, CurveMeasure):
        return sigma.points, sigma.weights
    if isinstance(sigma, AtomicMeasure):
        return sigma.points, sigma.weights
    raise DomainError(f"unsupported measure type {type(sigma)!r}")


MAX_GRID_STEP = 0.125


def _grid_transform_sq(sigma, R: float, h: float) -> tuple[np.ndarray, np.ndarray]:
    """|sigma-hat|^2 on the grid h*[-n..n]^2, plus the k^2 row template.

    Factorised evaluation: with u_j[k] = exp(-2 pi i h x_j k) and
    v_j[k] = exp(-2 pi i h y_j k), the grid transform is
    (w * U)^T V -- one complex GEMM.
    """
    pts, ws = _atoms_of(sigma)
    n = int(math.floor(R / h + 1e-9))
    krange = np.arange(-n, n + 1, dtype=float)
    U = np.exp(-2j * np.pi * h * np.outer(pts[:, 0], krange))
    V = np.exp(-2j * np.pi * h * np.outer(pts[:, 1], krange))
    Z = (U * ws[:, None]).T @ V
    return (Z.real ** 2 + Z.imag ** 2), krange


def lp_norm_ball(sigma, p: float, R: float, h: float = MAX_GRID_STEP) -> float:
    """Riemann sum of |sigma-hat|^p over the grid points of the closed ball B(R).

    Grid step h must satisfy h <= 1/8 (support diameter <= 2 sqrt 2 keeps
    the transform's oscillation scale well above that).
    """
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if R < 1:
        raise DomainError(f"R must be >= 1, got {R}")
    if h > MAX_GRID_STEP + 1e-15:
        raise DomainError(f"grid step h={h} too large; need h <= {MAX_GRID_STEP}")
    mag2, krange = _grid_transform_sq(sigma, R, h)
    k2 = krange[:, None] ** 2 + krange[None, :] ** 2
    mask = k2 * h * h <= R * R * (1 + 1e-12)
    return float(np.sum(mag2[mask] ** (p / 2.0)) * h * h)


# --------------------------------------------------------------------------
# Riesz energy
# --------------------------------------------------------------------------

def riesz_energy(mu, t: float, delta: float) -> float:
    """sum_{i,j} w_i w_j max(|x_i - x_j|, delta)^-t, diagonal included."""
    if not (delta > 0):
        raise DomainError(f"delta must be positive, got {delta}")
    pts, ws = _atoms_of(mu) if not isinstance(mu, tuple) else mu
    n = len(pts)
    total = 0.0
    chunk = max(1, (1 << 22) // max(1, n))
    for start in range(0, n, chunk):
        block = pts[start:start + chunk]
        d = np.sqrt(np.sum((block[:, None, :] - pts[None, :, :]) ** 2, axis=-1))
        d = np.maximum(d, delta)
        total += float(np.einsum("i,ij,j->", ws[start:start + chunk], d ** (-t), ws))
    return total


# --------------------------------------------------------------------------
# Decay slopes
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayReport:
    p: float
    h: float
    R_list: tuple[float, ...]
    integrals: tuple[float, ...]
    slope: float

    def rows(self):
        """CSV rows R,p,integral,slope_cum (cumulative LS slope up to each R)."""
        logs_r = np.log2(np.asarray(self.R_list))
        logs_i = np.log2(np.asarray(self.integrals))
        out = []
        for i in range(len(self.R_list)):
            if i >= 1:
                sl = float(np.polyfit(logs_r[: i + 1], logs_i[: i + 1], 1)[0])
            else:
                sl = float("nan")
            out.append((self.R_list[i], self.p, self.integrals[i], sl))
        return out


def decay_slope(sigma, p: float, R_list, h: float = MAX_GRID_STEP) -> DecayReport:
    """Least-squares slope of log2 lp_norm_ball against log2 R.

    Needs at least three dyadic radii.  The grid transform is evaluated
    once at max(R_list) and the smaller balls reuse its sub-grid, so the
    integrals are mutually consistent.
    """
    R_list = tuple(float(R) for R in R_list)
    if len(R_list) < 3:
        raise DomainError("need at least three R values")
    for R in R_list:
        e = math.log2(R)
        if abs(e - round(e)) > 1e-9:
            raise DomainError(f"R values must be dyadic, got {R}")
    if sorted(R_list) != list(R_list):
        raise DomainError("R values must be increasing")
    R_max = R_list[-1]
    if R_list[0] < 1:
        raise DomainError("R values must be >= 1")
    if h > MAX_GRID_STEP + 1e-15:
        raise DomainError(f"grid step h={h} too large; need h <= {MAX_GRID_STEP}")
    mag2, krange = _grid_transform_sq(sigma, R_max, h)
    k2 = (krange[:, None] ** 2 + krange[None, :] ** 2) * h * h
    magp = mag2 ** (p / 2.0)
    integrals = []
    for R in R_list:
        mask = k2 <= R * R * (1 + 1e-12)
        integrals.append(float(np.sum(magp[mask]) * h * h))
    slope = float(np.polyfit(np.log2(np.asarray(R_list)), np.log2(np.asarray(integrals)), 1)[0])
    return DecayReport(p=p, h=h, R_list=R_list, integrals=tuple(integrals), slope=slope)


def decay_table_csv(report: DecayReport, path) -> None:
    with open(path, "w") as fh:
        fh.write("R,p,integral,slope_cum\n")
        for R, p, integral, sl in report.rows():
            fh.write(
                f"{format(R, '.17g')},{format(p, '.17g')},"
                f"{format(integral, '.17g')},{format(sl, '.17g')}\n"
            )
