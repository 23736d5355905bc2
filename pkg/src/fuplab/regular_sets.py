"""Cantor-like regular sets on finite grids: construction and verification.

A :class:`GridSet` is a finite union of closed axis-aligned grid cubes of a
common side (the resolution), the desk-scale stand-in for the closed fractal
sets whose regularity and porosity the rest of the package consumes.  The
module provides digit-expansion Cantor constructions with their natural
self-similar measures, exhaustive delta-regularity sweeps, porosity scans,
and the affine/thickening/subcube operations the set calculus needs.

Conventions:

* a cube with index ``i`` (per axis) occupies ``[lo + i*h, lo + (i+1)*h]``;
* "meets" uses closed overlap, while the *empty-child* test of the porosity
  scan uses open overlap (a child is empty when no occupied cell intersects
  its interior) — with closed semantics the canonical mid-third Cantor set
  would touch the removed middle at its endpoints and never be porous;
* measures are uniform densities over occupied cells, so box masses are exact
  multilinear expressions evaluated via prefix sums.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "CantorSpec",
    "GridSet",
    "CubeMeasure",
    "RegularityReport",
    "PorosityReport",
    "build_cantor",
    "natural_measure",
    "check_regularity",
    "check_porosity",
    "scale_shift",
    "thicken",
    "find_empty_subcube",
    "gridset_to_json",
    "gridset_from_json",
    "merged_intervals",
]

_TOL = 1e-9


def _per_axis(value, d: int, name: str) -> tuple:
    """Normalize scalar-or-per-axis input to a d-tuple."""
    if isinstance(value, (list, tuple)) and len(value) == d and (
        d > 1 and isinstance(value[0], (list, tuple, int))
        and (name != "alphabet" or isinstance(value[0], (list, tuple)))
    ):
        return tuple(value)
    if name == "alphabet":
        return tuple(tuple(value) for _ in range(d))
    return tuple(value for _ in range(d))


@dataclass(frozen=True)
class CantorSpec:
    """Digit-expansion Cantor construction parameters.

    ``base`` and ``alphabet`` may be given per axis (a d-tuple / tuple of
    digit tuples) or once for all axes.  ``extent`` is one (lo, hi) pair per
    axis; all axes must yield the same cube side (hi-lo)/base^depth.
    """

    base: object
    alphabet: object
    depth: int
    dimension: int = 1
    extent: object = ((0.0, 1.0),)

    def axes(self) -> list[tuple[int, tuple[int, ...], tuple[float, float]]]:
        d = self.dimension
        bases = _per_axis(self.base, d, "base")
        alphabets = _per_axis(self.alphabet, d, "alphabet")
        ext = self.extent
        if isinstance(ext[0], (int, float)):
            ext = (tuple(ext),) * d
        elif len(ext) == 1:
            ext = (tuple(ext[0]),) * d
        out = []
        for ax in range(d):
            M = int(bases[ax])
            A = tuple(sorted(set(int(a) for a in alphabets[ax])))
            lo, hi = float(ext[ax][0]), float(ext[ax][1])
            out.append((M, A, (lo, hi)))
        return out

    def validate(self) -> None:
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        for M, A, (lo, hi) in self.axes():
            if M < 2:
                raise ValueError("base must be >= 2")
            if len(A) == 0:
                raise ValueError("alphabet must be nonempty")
            if any(a < 0 or a >= M for a in A):
                raise ValueError("alphabet digits must lie in {0..base-1}")
            if hi <= lo:
                raise ValueError("extent must have positive length")

    def delta_default(self) -> float:
        """Dimension exponent of the self-similar measure: sum of log|A|/log M."""
        return sum(math.log(len(A)) / math.log(M) for M, A, _ in self.axes())


@dataclass(frozen=True)
class GridSet:
    """Finite union of closed grid cubes of side ``resolution``."""

    dimension: int
    resolution: float
    extent: tuple  # ((lo, hi), ...) per axis
    cubes: tuple  # sorted tuple of integer index tuples

    def __post_init__(self):
        n_axis = self.axis_cells()
        for idx in self.cubes:
            for ax in range(self.dimension):
                if not (0 <= idx[ax] < n_axis[ax] + _TOL):
                    raise ValueError(f"cube index {idx} outside bounding box")

    def axis_cells(self) -> tuple[int, ...]:
        return tuple(
            int(round((hi - lo) / self.resolution))
            for (lo, hi) in self.extent
        )

    def is_empty(self) -> bool:
        return len(self.cubes) == 0

    def index_array(self) -> np.ndarray:
        if not self.cubes:
            return np.zeros((0, self.dimension), dtype=np.int64)
        return np.asarray(self.cubes, dtype=np.int64)

    def cube_centers(self) -> np.ndarray:
        """(n, d) array of cube centers in ambient coordinates."""
        idx = self.index_array().astype(float)
        lows = np.array([lo for (lo, _) in self.extent])
        return lows + (idx + 0.5) * self.resolution

    def occupancy(self) -> np.ndarray:
        """Dense boolean cell-occupancy array over the bounding box."""
        shape = self.axis_cells()
        occ = np.zeros(shape, dtype=bool)
        if self.cubes:
            occ[tuple(self.index_array().T)] = True
        return occ

    def contains_points(self, points: np.ndarray) -> np.ndarray:
        """Membership of ambient points by half-open cell assignment.

        A point in cell ``[lo+i*h, lo+(i+1)*h)`` belongs to the set iff the
        cell is occupied; points outside the bounding box are outside.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.dimension == 1 and pts.shape[-1] != 1:
            pts = pts.reshape(-1, 1)
        h = self.resolution
        occ = self.occupancy()
        n_axis = self.axis_cells()
        inside = np.ones(pts.shape[0], dtype=bool)
        idx = np.zeros((pts.shape[0], self.dimension), dtype=np.int64)
        for ax in range(self.dimension):
            lo = self.extent[ax][0]
            j = np.floor((pts[:, ax] - lo) / h + _TOL).astype(np.int64)
            inside &= (j >= 0) & (j < n_axis[ax])
            idx[:, ax] = np.clip(j, 0, n_axis[ax] - 1)
        out = np.zeros(pts.shape[0], dtype=bool)
        if occ.size:
            out[inside] = occ[tuple(idx[inside].T)]
        return out


def merged_intervals(gset: GridSet) -> np.ndarray:
    """(m, 2) merged closed intervals of a 1-D GridSet."""
    if gset.dimension != 1:
        raise ValueError("merged_intervals needs a 1-D set")
    if not gset.cubes:
        return np.zeros((0, 2))
    idx = np.sort(gset.index_array()[:, 0])
    h, lo = gset.resolution, gset.extent[0][0]
    runs = []
    start = prev = idx[0]
    for i in idx[1:]:
        if i == prev + 1:
            prev = i
            continue
        runs.append((start, prev))
        start = prev = i
    runs.append((start, prev))
    return np.array([[lo + a * h, lo + (b + 1) * h] for a, b in runs])


def build_cantor(spec: CantorSpec, max_cubes: int = 1_000_000) -> GridSet:
    """Depth-k Cantor iterate: cubes indexed by digit words over the alphabet."""
    spec.validate()
    axes = spec.axes()
    k = spec.depth
    counts = [len(A) ** k for _, A, _ in axes]
    total = int(np.prod(counts, dtype=np.int64))
    if total > max_cubes:
        raise ValueError(f"cube count {total} exceeds the limit {max_cubes}")
    sides = [(hi - lo) / (M ** k) for M, _, (lo, hi) in axes]
    h = sides[0]
    if any(abs(s - h) > _TOL * max(abs(h), 1.0) for s in sides):
        raise ValueError("per-axis cube sides differ; use matching extents/bases")

    def axis_indices(M: int, A: tuple[int, ...]) -> np.ndarray:
        idx = np.array([0], dtype=np.int64)
        arr = np.array(A, dtype=np.int64)
        for _ in range(k):
            idx = (idx[:, None] * M + arr[None, :]).ravel()
        return np.sort(idx)

    per_axis = [axis_indices(M, A) for M, A, _ in axes]
    if spec.dimension == 1:
        cubes = tuple((int(i),) for i in per_axis[0])
    else:
        cubes = tuple(
            (int(i), int(j))
            for i in per_axis[0]
            for j in per_axis[1]
        )
    extent = tuple((lo, hi) for _, _, (lo, hi) in axes)
    return GridSet(dimension=spec.dimension, resolution=h, extent=extent,
                   cubes=cubes)


@dataclass(frozen=True)
class CubeMeasure:
    """Uniform self-similar measure on a GridSet (mass per occupied cube)."""

    grid: GridSet
    masses: tuple  # aligned with grid.cubes

    def total_mass(self) -> float:
        return float(np.sum(self.masses))

    def _prefix(self) -> np.ndarray:
        """Cumulative-mass array at cell boundaries (for exact box queries)."""
        shape = self.grid.axis_cells()
        dens = np.zeros(shape, dtype=float)
        if self.grid.cubes:
            dens[tuple(self.grid.index_array().T)] = self.masses
        # prefix[i] = mass of the first i cells along each axis
        pref = dens
        for ax in range(self.grid.dimension):
            pref = np.cumsum(pref, axis=ax)
        pad = np.zeros(tuple(s + 1 for s in shape))
        pad[(slice(1, None),) * self.grid.dimension] = pref
        return pad

    def box_mass(self, lo: Sequence[float], hi: Sequence[float]) -> float:
        """Exact measure of the closed box [lo, hi] (density interpretation)."""
        return float(_BoxQuery(self).mass(np.atleast_2d(lo), np.atleast_2d(hi))[0])


class _BoxQuery:
    """Vectorized exact box-mass queries against a CubeMeasure."""

    def __init__(self, measure: CubeMeasure):
        g = measure.grid
        self.d = g.dimension
        self.h = g.resolution
        self.lows = np.array([lo for (lo, _) in g.extent])
        self.ncell = np.array(g.axis_cells())
        self.prefix = measure._prefix()

    def _cum(self, x: np.ndarray) -> np.ndarray:
        """Multilinear interpolation of the prefix integral at points x (n, d)."""
        # fractional cell coordinates, clipped to the box
        t = (x - self.lows[None, :]) / self.h
        t = np.clip(t, 0.0, self.ncell[None, :].astype(float))
        i0 = np.minimum(np.floor(t).astype(np.int64), self.ncell[None, :] - 1)
        frac = t - i0
        out = np.zeros(x.shape[0])
        for corner in itertools.product((0, 1), repeat=self.d):
            w = np.ones(x.shape[0])
            idx = []
            for ax, c in enumerate(corner):
                w = w * (frac[:, ax] if c else (1.0 - frac[:, ax]))
                idx.append(i0[:, ax] + c)
            out += w * self.prefix[tuple(idx)]
        return out

    def mass(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Measure of boxes given by (n, d) corner arrays."""
        lo = np.atleast_2d(lo).astype(float)
        hi = np.atleast_2d(hi).astype(float)
        if self.d == 1:
            return self._cum(hi) - self._cum(lo)
        # inclusion-exclusion over box corners (d = 2)
        a = self._cum(hi)
        b = self._cum(np.stack([lo[:, 0], hi[:, 1]], axis=1))
        c = self._cum(np.stack([hi[:, 0], lo[:, 1]], axis=1))
        d = self._cum(lo)
        return a - b - c + d


def natural_measure(spec: CantorSpec) -> CubeMeasure:
    """Self-similar measure: equal mass on each depth-k cube, total 1."""
    grid = build_cantor(spec)
    n = len(grid.cubes)
    return CubeMeasure(grid=grid, masses=tuple([1.0 / n] * n))


@dataclass(frozen=True)
class RegularityReport:
    delta: float
    constant_upper: float
    constant_lower: float
    scales_tested: tuple
    passed: bool
    requested_cr: float
    windows_tested: int
    resolution: float


def check_regularity(
    gset: GridSet,
    measure: CubeMeasure,
    delta: float,
    alpha0: float,
    alpha1: float,
    sample_budget: int = 1_000_000,
    requested_cr: float = math.inf,
) -> RegularityReport:
    """Empirically tightest regularity constants over a deterministic sweep.

    Upper bound: all grid-aligned cubes with dyadic side lengths in
    [alpha0, alpha1].  Lower bound: cubes of the same sides centered at every
    occupied-cell center (mass outside the extent counts as zero).  Beyond
    ``sample_budget`` windows, positions are subsampled with a deterministic
    stride.
    """
    if gset.is_empty():
        raise ValueError("empty set has no regularity")
    if not (alpha0 <= alpha1):
        raise ValueError("need alpha0 <= alpha1")
    h = gset.resolution
    if alpha0 < h * (1 - 1e-9):
        raise ValueError("alpha0 below grid resolution")
    d = gset.dimension
    query = _BoxQuery(measure)
    lows = np.array([lo for (lo, _) in gset.extent])
    lens = np.array([hi - lo for (lo, hi) in gset.extent])

    scales = []
    s = alpha1
    while s >= alpha0 * (1 - 1e-12):
        scales.append(s)
        s /= 2.0
    if not scales:
        scales = [alpha1]
    # always test the finest requested scale itself: the tightest constants of
    # strictly self-similar measures sit exactly at the construction scales
    if scales[-1] > alpha0 * (1 + 1e-9):
        scales.append(alpha0)

    centers = gset.cube_centers()
    if centers.ndim == 1:
        centers = centers[:, None]

    # budget bookkeeping: upper windows + lower windows across all scales
    def axis_positions(side: float) -> list[np.ndarray]:
        out = []
        for ax in range(d):
            n_start = int(math.floor((lens[ax] - side) / h + 1e-9)) + 1
            n_start = max(n_start, 1)
            out.append(lows[ax] + h * np.arange(n_start))
        return out

    total_upper = sum(
        int(np.prod([len(p) for p in axis_positions(s)])) for s in scales
    )
    total_lower = len(scales) * len(centers)
    budget_stride = max(1, int(math.ceil((total_upper + total_lower) / max(sample_budget, 1))))
    stride_axis = max(1, int(round(budget_stride ** (1.0 / d))))

    windows = 0
    c_upper = 0.0
    c_lower = 0.0
    for s in scales:
        r_delta = s ** delta
        pos = axis_positions(s)
        if stride_axis > 1:
            pos = [p[::stride_axis] for p in pos]
        if d == 1:
            los = pos[0][:, None]
        else:
            g0, g1 = np.meshgrid(pos[0], pos[1], indexing="ij")
            los = np.stack([g0.ravel(), g1.ravel()], axis=1)
        his = los + s
        masses = query.mass(los, his)
        windows += los.shape[0]
        c_upper = max(c_upper, float(np.max(masses)) / r_delta)

        clos = centers - s / 2.0
        chis = centers + s / 2.0
        cmasses = query.mass(clos, chis)
        windows += centers.shape[0]
        mmin = float(np.min(cmasses))
        c_lower = max(c_lower, math.inf if mmin <= 0 else r_delta / mmin)

    passed = max(c_upper, c_lower) <= requested_cr
    return RegularityReport(
        delta=delta,
        constant_upper=c_upper,
        constant_lower=c_lower,
        scales_tested=(alpha0, alpha1),
        passed=passed,
        requested_cr=requested_cr,
        windows_tested=windows,
        resolution=h,
    )


@dataclass(frozen=True)
class PorosityReport:
    L: int
    depths_checked: tuple
    failures: tuple  # (depth, parent-index-tuple) pairs
    cubes_checked: int

    def porous(self) -> bool:
        return len(self.failures) == 0


def _open_overlap_any(occ_prefix: np.ndarray, gset: GridSet,
                      lo: np.ndarray, hi: np.ndarray) -> bool:
    """True iff some occupied cell overlaps the OPEN box (lo, hi)."""
    h = gset.resolution
    lows = np.array([l for (l, _) in gset.extent])
    n_axis = gset.axis_cells()
    a = []
    b = []
    for ax in range(gset.dimension):
        tol = h * 1e-7
        i_lo = int(math.floor((lo[ax] - lows[ax] + tol) / h))
        i_hi = int(math.ceil((hi[ax] - lows[ax] - tol) / h))
        i_lo = max(i_lo, 0)
        i_hi = min(i_hi, n_axis[ax])
        if i_hi <= i_lo:
            return False
        a.append(i_lo)
        b.append(i_hi)
    if gset.dimension == 1:
        count = occ_prefix[b[0]] - occ_prefix[a[0]]
    else:
        count = (occ_prefix[b[0], b[1]] - occ_prefix[a[0], b[1]]
                 - occ_prefix[b[0], a[1]] + occ_prefix[a[0], a[1]])
    return bool(count > 0)


def _occ_prefix(gset: GridSet) -> np.ndarray:
    occ = gset.occupancy().astype(np.int64)
    pref = occ
    for ax in range(gset.dimension):
        pref = np.cumsum(pref, axis=ax)
    pad = np.zeros(tuple(s + 1 for s in occ.shape), dtype=np.int64)
    pad[(slice(1, None),) * gset.dimension] = pref
    return pad


def check_porosity(gset: GridSet, L: int, depths: Sequence[int]) -> PorosityReport:
    """Exhaustive porosity scan: partition cubes of side L^-n meeting the set
    must contain an (open-interior) empty child of side L^-(n+1)."""
    if L < 3:
        raise ValueError("porosity scale L must be >= 3")
    lows = np.array([lo for (lo, _) in gset.extent])
    lens = np.array([hi - lo for (lo, hi) in gset.extent])
    h = gset.resolution
    occp = _occ_prefix(gset)
    failures = []
    checked = 0
    for n in depths:
        side = float(L) ** (-n)
        child = side / L
        if child < h * (1 - 1e-9):
            raise ValueError(
                f"depth {n}: child side {child} below grid resolution {h}")
        counts = lens / side
        if np.any(np.abs(counts - np.round(counts)) > 1e-6):
            raise ValueError(
                f"depth {n}: extent is not partitionable into side-{side} cubes")
        counts = np.round(counts).astype(int)

        # parents meeting the set: scan occupied cells
        parents = set()
        idx = gset.index_array()
        cell_lo = lows[None, :] + idx * h
        cell_hi = cell_lo + h
        for clo, chi in zip(cell_lo, cell_hi):
            rng = []
            for ax in range(gset.dimension):
                p_lo = int(math.floor((clo[ax] - lows[ax]) / side - 1e-9))
                p_hi = int(math.floor((chi[ax] - lows[ax]) / side + 1e-9))
                p_lo = max(p_lo, 0)
                p_hi = min(p_hi, counts[ax] - 1)
                rng.append(range(p_lo, p_hi + 1))
            for tup in itertools.product(*rng):
                parents.add(tup)

        for p in sorted(parents):
            checked += 1
            p_lo = lows + np.array(p) * side
            empty_found = False
            for childidx in itertools.product(range(L), repeat=gset.dimension):
                clo = p_lo + np.array(childidx) * child
                chi = clo + child
                if not _open_overlap_any(occp, gset, clo, chi):
                    empty_found = True
                    break
            if not empty_found:
                failures.append((n, p))
    return PorosityReport(L=L, depths_checked=tuple(depths),
                          failures=tuple(failures), cubes_checked=checked)


def scale_shift(gset: GridSet, lam: float, y) -> GridSet:
    """Affine image y + lam * set; cube indices are preserved exactly."""
    if lam <= 0:
        raise ValueError("scale factor must be positive")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.size == 1 and gset.dimension > 1:
        y = np.repeat(y, gset.dimension)
    extent = tuple(
        (y[ax] + lam * lo, y[ax] + lam * hi)
        for ax, (lo, hi) in enumerate(gset.extent)
    )
    return GridSet(dimension=gset.dimension, resolution=lam * gset.resolution,
                   extent=extent, cubes=gset.cubes)


def thicken(gset: GridSet, radius: float) -> GridSet:
    """Minkowski sum with [-radius, radius]^d, rasterized outward (superset)."""
    h = gset.resolution
    radius = max(radius, h)
    r_cells = int(math.ceil(radius / h - 1e-9))
    idx = gset.index_array()
    offsets = np.array(
        list(itertools.product(range(-r_cells, r_cells + 1),
                               repeat=gset.dimension)),
        dtype=np.int64,
    )
    dilated = (idx[:, None, :] + offsets[None, :, :]).reshape(-1, gset.dimension)
    dilated += r_cells  # shift into the enlarged bounding box
    dilated = np.unique(dilated, axis=0)
    extent = tuple(
        (lo - r_cells * h, hi + r_cells * h) for (lo, hi) in gset.extent
    )
    cubes = tuple(tuple(int(v) for v in row) for row in dilated)
    return GridSet(dimension=gset.dimension, resolution=h, extent=extent,
                   cubes=cubes)


def find_empty_subcube(gset: GridSet, cube_lo, cube_side: float,
                       L: int) -> Optional[tuple]:
    """First (lexicographic) child in the L^d partition of the given cube whose
    open interior misses the set, or None.

    The cube is an explicit box (lower corner + side); raises when the
    children are unresolvable at the grid resolution.
    """
    if L < 2:
        raise ValueError("L must be >= 2")
    cube_lo = np.atleast_1d(np.asarray(cube_lo, dtype=float))
    child = cube_side / L
    if child < gset.resolution * (1 - 1e-9):
        raise ValueError("cube not aligned to grid: children are smaller than "
                         "the grid resolution")
    occp = _occ_prefix(gset)
    for childidx in itertools.product(range(L), repeat=gset.dimension):
        clo = cube_lo + np.array(childidx) * child
        chi = clo + child
        if not _open_overlap_any(occp, gset, clo, chi):
            return tuple(childidx)
    return None


def gridset_to_json(gset: GridSet) -> str:
    return json.dumps(
        {
            "dimension": gset.dimension,
            "resolution": gset.resolution,
            "extent": [list(e) for e in gset.extent],
            "cubes": [list(c) for c in gset.cubes],
        },
        sort_keys=True,
    )


def gridset_from_json(text: str) -> GridSet:
    obj = json.loads(text)
    return GridSet(
        dimension=int(obj["dimension"]),
        resolution=float(obj["resolution"]),
        extent=tuple(tuple(float(v) for v in e) for e in obj["extent"]),
        cubes=tuple(tuple(int(v) for v in c) for c in obj["cubes"]),
    )
