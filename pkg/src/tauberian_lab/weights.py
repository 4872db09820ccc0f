"""Grid-discretized weights on [0,1)^n and their constants.

A GridWeight stores cell masses (integrals of the weight over grid cells),
not point samples, so w(Q) is exact for grid cubes and refining the grid
never loses mass.  All cube suprema run over grid-aligned cubes inside the
domain; every constant here is therefore a lower approximation of its
continuous counterpart, nondecreasing under grid refinement.

Supported grids: 1-D and 2-D, resolution N cells per axis.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import BudgetExceeded, DegenerateFit
from .gridops import trailing_max

FW_CAP = {1: 512, 2: 32}


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridCube:
    """Axis-aligned cube of whole grid cells: [corner/N, (corner+side)/N]^n."""

    corner: tuple[int, ...]
    side: int

    def __post_init__(self):
        if self.side < 1:
            raise ValueError("cube side must be >= 1 cell")
        if any(c < 0 for c in self.corner):
            raise ValueError("cube corner must be nonnegative")

    @property
    def dim(self) -> int:
        return len(self.corner)


class GridWeight:
    """Nonnegative cell masses on an N^n grid over [0,1)^n with prefix sums."""

    def __init__(self, values: np.ndarray, meta: dict | None = None):
        values = np.asarray(values, dtype=float)
        if values.ndim not in (1, 2):
            raise ValueError("only 1-D and 2-D grids are supported")
        if values.ndim == 2 and values.shape[0] != values.shape[1]:
            raise ValueError("2-D grid must be square")
        if np.any(values < 0):
            raise ValueError("cell masses must be nonnegative")
        if not values.sum() > 0:
            raise ValueError("total mass must be positive")
        self.values = values
        self.dim = values.ndim
        self.resolution = values.shape[0]
        self.meta = dict(meta or {})
        if self.dim == 1:
            p = np.zeros(self.resolution + 1)
            np.cumsum(values, out=p[1:])
            self.prefix = p
        else:
            p = np.zeros((self.resolution + 1, self.resolution + 1))
            p[1:, 1:] = values.cumsum(axis=0).cumsum(axis=1)
            self.prefix = p

    # -- basic queries -------------------------------------------------------

    @property
    def cell_volume(self) -> float:
        return (1.0 / self.resolution) ** self.dim

    @property
    def density(self) -> np.ndarray:
        return self.values / self.cell_volume

    @property
    def total_mass(self) -> float:
        return float(self.values.sum())

    def _check_cube(self, q: GridCube) -> None:
        if q.dim != self.dim:
            raise ValueError("cube dimension does not match grid")
        if any(c + q.side > self.resolution for c in q.corner):
            raise ValueError("cube exceeds the grid")

    def cube_mass(self, q: GridCube) -> float:
        self._check_cube(q)
        p, s = self.prefix, q.side
        if self.dim == 1:
            (i,) = q.corner
            return float(p[i + s] - p[i])
        i, j = q.corner
        return float(p[i + s, j + s] - p[i, j + s] - p[i + s, j] + p[i, j])

    def cube_volume(self, q: GridCube) -> float:
        return (q.side / self.resolution) ** self.dim

    def cube_average(self, q: GridCube) -> float:
        return self.cube_mass(q) / self.cube_volume(q)

    def window_sums(self, s: int) -> np.ndarray:
        """Masses of all side-s grid cubes, indexed by corner."""
        p = self.prefix
        if self.dim == 1:
            return p[s:] - p[:-s]
        return p[s:, s:] - p[:-s, s:] - p[s:, :-s] + p[:-s, :-s]

    def cubes(self):
        """All grid cubes, as (corner tuple, side) pairs; O(N^2) or O(N^3)."""
        n = self.resolution
        for s in range(1, n + 1):
            if self.dim == 1:
                for i in range(n - s + 1):
                    yield GridCube((i,), s)
            else:
                for i in range(n - s + 1):
                    for j in range(n - s + 1):
                        yield GridCube((i, j), s)


# ---------------------------------------------------------------------------
# Weight generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightFamilySpec:
    """Recipe for a test-corpus weight; deterministic for fixed fields."""

    family: str
    dim: int
    resolution: int
    a: float = 0.0
    x0: tuple[float, ...] | float = 0.0
    levels: tuple[float, ...] = (1.0, float(np.e) ** 2)
    seed: int = 0
    smoothness: float = 4.0

    def label(self) -> str:
        if self.family == "power":
            return f"power(a={self.a:g})_{self.dim}d_N{self.resolution}"
        if self.family == "log-smooth-random":
            return f"logsmooth(seed={self.seed})_{self.dim}d_N{self.resolution}"
        return f"{self.family}_{self.dim}d_N{self.resolution}"


def _power_masses_1d(n: int, a: float, x0: float) -> np.ndarray:
    # exact cell integrals of |x-x0|^a via the signed antiderivative
    def anti(t: float) -> float:
        d = t - x0
        return math.copysign(abs(d) ** (a + 1), d) / (a + 1)

    edges = np.arange(n + 1) / n
    vals = np.array([anti(t) for t in edges])
    return np.diff(vals)


def generate_weight(spec: WeightFamilySpec) -> GridWeight:
    n, d = spec.resolution, spec.dim
    if d not in (1, 2):
        raise ValueError("dim must be 1 or 2")
    if n < 1:
        raise ValueError("resolution must be >= 1")
    meta = {"family": spec.family, "seed": spec.seed, "label": spec.label()}
    cellvol = (1.0 / n) ** d

    if spec.family == "constant":
        values = np.full((n,) * d, cellvol)
    elif spec.family == "power":
        if spec.a <= -d:
            raise ValueError("integrability violation: power exponent must exceed -dim")
        x0 = spec.x0 if isinstance(spec.x0, tuple) else (float(spec.x0),) * d
        if d == 1:
            values = _power_masses_1d(n, spec.a, x0[0])
        else:
            # no elementary closed form off-axis: midpoint density times area
            mids = (np.arange(n) + 0.5) / n
            dx = mids[:, None] - x0[0]
            dy = mids[None, :] - x0[1]
            r2 = dx * dx + dy * dy
            values = r2 ** (spec.a / 2.0) * cellvol
    elif spec.family == "checkerboard":
        levels = np.asarray(spec.levels, dtype=float)
        if np.any(levels <= 0):
            raise ValueError("checkerboard levels must be positive")
        idx = np.arange(n)
        if d == 1:
            dens = levels[idx % len(levels)]
        else:
            dens = levels[(idx[:, None] + idx[None, :]) % len(levels)]
        values = dens * cellvol
    elif spec.family == "log-smooth-random":
        rng = np.random.default_rng(spec.seed)
        field_vals = rng.standard_normal((n,) * d)
        width = max(1, int(round(spec.smoothness)))
        kernel = np.exp(-0.5 * (np.arange(-3 * width, 3 * width + 1) / width) ** 2)
        kernel /= kernel.sum()

        def smooth_axis(arr, axis):
            pad = len(kernel) // 2
            padded = np.take(arr, np.clip(np.arange(-pad, arr.shape[axis] + pad),
                                          0, arr.shape[axis] - 1), axis=axis)
            return np.apply_along_axis(
                lambda v: np.convolve(v, kernel, mode="valid"), axis, padded)

        for ax in range(d):
            field_vals = smooth_axis(field_vals, ax)
        dens = np.exp(field_vals)
        values = dens * cellvol
        values /= values.sum()
    else:
        raise ValueError(f"unknown weight family {spec.family!r}")
    return GridWeight(values, meta)


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------


def _require_positive_cells(w: GridWeight, what: str) -> None:
    if np.any(w.values <= 0):
        raise ValueError(f"{what} undefined: weight has zero-mass cells")


def ap_constant(w: GridWeight, p: float) -> float:
    """Muckenhoupt A_p gauge: sup over grid cubes of avg(w) * avg(w^{-1/(p-1)})^(p-1)."""
    if p <= 1:
        raise ValueError("p must exceed 1")
    _require_positive_cells(w, "dual weight")
    dens = w.density
    sigma = GridWeight(dens ** (-1.0 / (p - 1)) * w.cell_volume)
    n = w.resolution
    best = 0.0
    for s in range(1, n + 1):
        vol = (s / n) ** w.dim
        avg_w = w.window_sums(s) / vol
        avg_sigma = sigma.window_sums(s) / vol
        cand = float(np.max(avg_w * avg_sigma ** (p - 1)))
        best = max(best, cand)
    return best


def _fw_value_1d(w: GridWeight, i: int, s: int) -> float:
    """(1/w(Q)) * integral over Q of the maximal function of w restricted to Q.

    The uncentered grid maximal operator over domain cubes attains its
    supremum on subintervals of Q (shrink any interval to its part in Q),
    so only R inside Q are enumerated.
    """
    n = w.resolution
    p = w.prefix
    t = np.arange(1, s + 1)[:, None].astype(float)
    j = np.arange(s)[None, :]
    end = (i + j + t.astype(int)).clip(max=i + s)
    avg = (p[end] - p[i + j]) * (n / t)
    avg[j + t > s] = -np.inf
    suff = np.maximum.accumulate(avg[::-1], axis=0)[::-1]
    cc = np.arange(s)[None, :]
    jj = np.arange(s)[:, None]
    rows = (cc - jj).clip(min=0)
    vals = np.where(cc >= jj, suff[rows, jj], -np.inf)
    integral = vals.max(axis=0).sum() / n
    mass = p[i + s] - p[i]
    return float(integral / mass)


def _fw_value_2d(w: GridWeight, i1: int, i2: int, s: int) -> float:
    n = w.resolution
    best = np.full((s, s), -np.inf)
    for t in range(1, s + 1):
        sums = w.window_sums(t)
        local = sums[i1 : i1 + s - t + 1, i2 : i2 + s - t + 1] * (n / t) ** 2
        m = trailing_max(local, t, s, axis=0)
        m = trailing_max(m, t, s, axis=1)
        np.maximum(best, m, out=best)
    q = GridCube((i1, i2), s)
    return float(best.sum() / n**2 / w.cube_mass(q))


def fujii_wilson(w: GridWeight) -> float:
    """Fujii-Wilson A_infinity gauge over grid cubes inside the domain."""
    n = w.resolution
    if n > FW_CAP[w.dim]:
        raise BudgetExceeded(
            f"fujii_wilson capped at N={FW_CAP[w.dim]} for dim {w.dim}, got {n}")
    dens = w.density
    # upper bound per cube (max density * |Q| / w(Q)) drives a pruned sweep
    jobs = []
    for s in range(1, n + 1):
        sums = w.window_sums(s)
        vol = (s / n) ** w.dim
        if w.dim == 1:
            dmax = sliding_window_view(dens, s).max(axis=-1)
        else:
            dmax = sliding_window_view(dens, (s, s)).max(axis=(-2, -1))
        with np.errstate(divide="ignore", invalid="ignore"):
            upper = np.where(sums > 0, dmax * vol / sums, 0.0)
        for idx in np.ndindex(upper.shape):
            if sums[idx] > 0:
                jobs.append((float(upper[idx]), idx, s))
    jobs.sort(key=lambda r: -r[0])
    best = 0.0
    for upper, idx, s in jobs:
        if upper <= best:
            break
        if w.dim == 1:
            val = _fw_value_1d(w, idx[0], s)
        else:
            val = _fw_value_2d(w, idx[0], idx[1], s)
        best = max(best, val)
    return best


def fujii_wilson_naive(w: GridWeight) -> float:
    """Reference O(N^4)-ish evaluation used as an oracle in tests."""
    n = w.resolution
    best = 0.0
    cubes = list(w.cubes())
    for q in cubes:
        mass = w.cube_mass(q)
        if mass <= 0:
            continue
        integ = 0.0
        for cell in np.ndindex(*(q.side,) * w.dim):
            c = tuple(q.corner[d] + cell[d] for d in range(w.dim))
            m = 0.0
            for r in cubes:
                if r.side > q.side:
                    continue
                inside = all(
                    q.corner[d] <= r.corner[d]
                    and r.corner[d] + r.side <= q.corner[d] + q.side
                    for d in range(w.dim))
                covers = all(
                    r.corner[d] <= c[d] < r.corner[d] + r.side for d in range(w.dim))
                if inside and covers:
                    m = max(m, w.cube_mass(r) / w.cube_volume(r))
            integ += m * w.cell_volume
        best = max(best, integ / mass)
    return best


def hruscev_constant(w: GridWeight) -> float:
    """Endpoint A_infinity gauge: sup of avg(w) * exp(avg of log(1/w))."""
    _require_positive_cells(w, "log of weight")
    n = w.resolution
    # prefix of the (possibly negative) cell integrals of log(1/w)
    logm = -np.log(w.density) * w.cell_volume
    if w.dim == 1:
        lp = np.zeros(n + 1)
        np.cumsum(logm, out=lp[1:])
    else:
        lp = np.zeros((n + 1, n + 1))
        lp[1:, 1:] = logm.cumsum(axis=0).cumsum(axis=1)
    best = 0.0
    for s in range(1, n + 1):
        vol = (s / n) ** w.dim
        if w.dim == 1:
            lsum = lp[s:] - lp[:-s]
        else:
            lsum = lp[s:, s:] - lp[:-s, s:] - lp[s:, :-s] + lp[:-s, :-s]
        val = (w.window_sums(s) / vol) * np.exp(lsum / vol)
        best = max(best, float(val.max()))
    return best


def doubling_constant(w: GridWeight) -> float:
    """sup of w(2Q)/w(Q) over cubes whose concentric double is grid-aligned
    and inside the domain; even sides only so that 2Q is exact."""
    n = w.resolution
    if n < 4:
        raise ValueError("domain too small: doubling needs N >= 4")
    best = 0.0
    found = False
    for s in range(2, n // 2 + 1, 2):
        h = s // 2
        inner = w.window_sums(s)
        outer = w.window_sums(2 * s)
        if w.dim == 1:
            lo = h
            hi = n - s - h
            if hi < lo:
                continue
            num = outer[lo - h : hi - h + 1]
            den = inner[lo : hi + 1]
        else:
            lo = h
            hi = n - s - h
            if hi < lo:
                continue
            num = outer[lo - h : hi - h + 1, lo - h : hi - h + 1]
            den = inner[lo : hi + 1, lo : hi + 1]
        mask = den > 0
        if not mask.any():
            continue
        found = True
        best = max(best, float((num[mask] / den[mask]).max()))
    if not found:
        raise ValueError("no admissible cube with positive mass")
    return best


def growth_profile(w: GridWeight, t_values: Sequence[float]) -> dict[float, float]:
    """phi(t) = sup over cubes Q of (mass of the floor(t*cells) heaviest cells) / w(Q)."""
    ts = list(t_values)
    if any(t <= 0 or t > 1 for t in ts):
        raise ValueError("t values must lie in (0, 1]")
    if ts != sorted(ts):
        raise ValueError("t values must be ascending")
    n = w.resolution
    out = {t: 0.0 for t in ts}
    for s in range(1, n + 1):
        cells = s**w.dim
        if w.dim == 1:
            windows = sliding_window_view(w.values, s)
        else:
            windows = sliding_window_view(w.values, (s, s)).reshape(-1, cells)
        srt = np.sort(windows, axis=-1)[:, ::-1]
        csum = srt.cumsum(axis=-1)
        mass = csum[:, -1]
        ok = mass > 0
        if not ok.any():
            continue
        for t in ts:
            k = int(math.floor(t * cells))
            if k < 1:
                continue
            ratio = csum[ok, k - 1] / mass[ok]
            out[t] = max(out[t], float(ratio.max()))
    return out


class GrowthFit(NamedTuple):
    c1: float
    c2: float
    ainfty_bound: float


def fit_growth_exponent(profile: dict[float, float]) -> GrowthFit:
    """Least squares of log phi = log c1 + (1/c2) log t over the supplied points."""
    pts = [(t, v) for t, v in sorted(profile.items()) if v > 0]
    if sum(1 for t, _ in pts if t < 0.5) < 3:
        raise ValueError("need at least 3 profile points with t < 1/2")
    vals = {v for _, v in pts}
    if len(vals) == 1:
        raise DegenerateFit("profile is flat; growth exponent undetermined")
    x = np.log([t for t, _ in pts])
    y = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(x, y, 1)
    if slope <= 0:
        raise DegenerateFit("profile fit has nonpositive slope")
    c1 = float(np.exp(intercept))
    c2 = float(1.0 / slope)
    return GrowthFit(c1, c2, c2 * (1 + math.log(c1)))


def reverse_holder_holds(w: GridWeight, eps: float, constant: float = 2.0) -> bool:
    """(avg_Q w^(1+eps))^(1/(1+eps)) <= constant * avg_Q w on every grid cube;
    powers taken on cell densities."""
    _require_positive_cells(w, "reverse Holder powers")
    pw = GridWeight(w.density ** (1 + eps) * w.cell_volume)
    n = w.resolution
    for s in range(1, n + 1):
        vol = (s / n) ** w.dim
        lhs = (pw.window_sums(s) / vol) ** (1 / (1 + eps))
        rhs = constant * (w.window_sums(s) / vol)
        if np.any(lhs > rhs):
            return False
    return True


def reverse_holder_exponent(w: GridWeight, constant: float = 2.0) -> float:
    """Largest eps in {2^-k, k=0..20} passing reverse_holder_holds."""
    for k in range(0, 21):
        eps = 2.0**-k
        if reverse_holder_holds(w, eps, constant):
            return eps
    warnings.warn("no dyadic reverse Holder exponent passed; returning 0")
    return 0.0


def _gamma_pairs(n: int, dim: int):
    """Deterministic nested (Q2, Q1) pairs: a halving ladder of sides with
    corner / end / centered placements, plus (full domain, small cube) pairs
    at every position.  Doubling N maps this family into itself."""
    ladder = []
    s = n
    while s >= 1:
        ladder.append(s)
        s //= 2
    pairs = []

    def corners(side):
        step = max(1, side // 2)
        cs = sorted(set(list(range(0, n - side + 1, step)) + [n - side]))
        return cs

    for i2, s2 in enumerate(ladder):
        for s1 in ladder[i2 + 1 :]:
            for c2 in _corner_tuples(corners(s2), dim):
                placements = {
                    tuple(c for c in c2),
                    tuple(c + s2 - s1 for c in c2),
                    tuple(c + (s2 - s1) // 2 for c in c2),
                }
                for c1 in placements:
                    pairs.append((GridCube(c2, s2), GridCube(c1, s1)))
    full = GridCube((0,) * dim, n)
    for s1 in ladder[1:]:
        for c1 in _corner_tuples(list(range(0, n - s1 + 1)), dim):
            pairs.append((full, GridCube(c1, s1)))
    return pairs


def _corner_tuples(cs, dim):
    if dim == 1:
        return [(c,) for c in cs]
    return [(a, b) for a in cs for b in cs]


def sidelength_growth_exponent(w: GridWeight) -> float:
    """Empirical exponent gamma with w(Q1)/w(Q2) >~ (r1/r2)^gamma over sampled
    nested pairs; the max of log(w(Q2)/w(Q1)) / log(r2/r1)."""
    if w.resolution < 8:
        raise ValueError("resolution must be >= 8")
    best = None
    for q2, q1 in _gamma_pairs(w.resolution, w.dim):
        m1 = w.cube_mass(q1)
        if m1 <= 0:
            continue
        m2 = w.cube_mass(q2)
        val = math.log(m2 / m1) / math.log(q2.side / q1.side)
        best = val if best is None else max(best, val)
    if best is None:
        raise ValueError("degenerate weight: all sampled inner cubes have zero mass")
    return best


@dataclass
class WeightConstants:
    """All computed gauges for one weight, with the grid parameters used."""

    ap: dict[float, float]
    fujii_wilson: float
    hruscev: float
    doubling: float
    rh_epsilon: float
    gamma: float
    growth_exponent: GrowthFit
    meta: dict = field(default_factory=dict)


DEFAULT_PROFILE_T = (1 / 64, 1 / 32, 1 / 16, 1 / 8, 1 / 4, 1 / 2)


def compute_weight_constants(
    w: GridWeight,
    p_values: Sequence[float] = (2.0, 4.0, 8.0),
    t_values: Sequence[float] = DEFAULT_PROFILE_T,
    rh_constant: float = 2.0,
) -> WeightConstants:
    profile = growth_profile(w, t_values)
    return WeightConstants(
        ap={p: ap_constant(w, p) for p in p_values},
        fujii_wilson=fujii_wilson(w),
        hruscev=hruscev_constant(w),
        doubling=doubling_constant(w),
        rh_epsilon=reverse_holder_exponent(w, rh_constant),
        gamma=sidelength_growth_exponent(w),
        growth_exponent=fit_growth_exponent(profile),
        meta=dict(w.meta),
    )
