"""Zero location for analytic scalar functions in a rectangle.

The pipeline is: count zeros by the winding number of f around the boundary
(argument principle), quadrisect until each cell isolates one zero, polish
with damped Newton, and, where two zeros nearly coalesce, resolve the pair
through a local quadratic model instead of fighting the flat |f| valley
between them.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .charfn import CharFn, markovian_polynomial
from .core import MODE_MARKOVIAN, MODE_SR, ChainParams
from .errors import (
    BoundaryDegeneracyError,
    ContinuationBreakdownError,
    ContractViolationError,
    RefinementFailureError,
)

ZERO_MODE = "zero-mode"
MARKOVIAN_LIKE = "markovian-like"
NON_MARKOVIAN = "exclusively-non-markovian"

_EPS = 2.220446049250313e-16


@dataclass(frozen=True)
class SearchWindow:
    """Axis-aligned rectangle in the complex detuning plane.

    Decay poles live in the lower half plane (Gamma = 2i Delta with
    Re Gamma >= 0), so physical searches use im_max <= 0.
    """

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ContractViolationError(f"degenerate window {self}")

    @property
    def width(self) -> float:
        return self.re_max - self.re_min

    @property
    def height(self) -> float:
        return self.im_max - self.im_min

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (
            self.re_min - pad <= z.real <= self.re_max + pad
            and self.im_min - pad <= z.imag <= self.im_max + pad
        )


def default_window(n_qubits: int) -> SearchWindow:
    """Search window sized to capture the Markovian-like pole and the first
    exclusively non-Markovian one at any separation of interest (the
    superradiant point sits near |Delta| = 1.14 N)."""
    n = float(n_qubits)
    return SearchWindow(-1.5 * n, 1.5 * n, -2.5 * n, 0.0)


@dataclass(frozen=True)
class Pole:
    """A zero of the characteristic function and its decay rate."""

    delta: complex
    residual: float
    classification: str

    def __post_init__(self):
        if self.delta.imag > 5e-10:
            raise ContractViolationError(
                f"pole at {self.delta} has Re Gamma < -1e-9; not a decay solution"
            )

    @property
    def gamma(self) -> complex:
        """Complex collective decay rate, 2i Delta."""
        return 2j * self.delta


# ---------------------------------------------------------------------------
# argument-principle counting


def _walk_phase(fn, z0, f0, z1, f1, floor, depth=0):
    """Accumulated phase change of fn along [z0, z1], bisecting until each
    piece rotates by less than ~0.9 rad."""
    if abs(f0) < floor or abs(f1) < floor:
        raise _BoundaryZero(z0 if abs(f0) < abs(f1) else z1)
    dphi = cmath.phase(f1 / f0)
    if abs(dphi) <= 0.9 and depth >= 1:
        return dphi
    if depth >= 36:
        raise _BoundaryZero(z0)
    zm = 0.5 * (z0 + z1)
    fm = fn(zm)
    return _walk_phase(fn, z0, f0, zm, fm, floor, depth + 1) + _walk_phase(
        fn, zm, fm, z1, f1, floor, depth + 1
    )


class _BoundaryZero(Exception):
    def __init__(self, where):
        self.where = where


def _winding(fn, window: SearchWindow) -> int:
    corners = [
        complex(window.re_min, window.im_min),
        complex(window.re_max, window.im_min),
        complex(window.re_max, window.im_max),
        complex(window.re_min, window.im_max),
    ]
    # magnitude scale from coarse boundary samples sets the near-zero floor
    probes = []
    for k in range(4):
        a, b = corners[k], corners[(k + 1) % 4]
        for t in (0.0, 0.21, 0.5, 0.77):
            probes.append(abs(fn(a + t * (b - a))))
    finite = sorted(v for v in probes if math.isfinite(v) and v > 0.0)
    if not finite:
        raise _BoundaryZero(corners[0])
    floor = 1e-13 * finite[len(finite) // 2]
    total = 0.0
    for k in range(4):
        a, b = corners[k], corners[(k + 1) % 4]
        samples = [a + (i / 16.0) * (b - a) for i in range(17)]
        values = [fn(z) for z in samples]
        for i in range(16):
            total += _walk_phase(fn, samples[i], values[i], samples[i + 1], values[i + 1], floor)
    count = total / (2.0 * math.pi)
    nearest = round(count)
    if abs(count - nearest) > 0.15 or nearest < 0:
        raise _BoundaryZero(corners[0])
    return nearest


def count_zeros(fn, window: SearchWindow) -> int:
    """Number of zeros of fn inside the window, multiplicity counted.

    Computed as the boundary winding number with adaptive phase-continuity
    refinement.  A zero hugging the boundary triggers up to five jittered
    (slightly expanded) retries before a BoundaryDegeneracyError.
    """
    win = window
    for attempt in range(6):
        try:
            return _winding(fn, win)
        except _BoundaryZero as bz:
            if attempt == 5:
                raise BoundaryDegeneracyError(
                    f"zero persists on the counting boundary near {bz.where} after 5 jitters"
                ) from None
            pad = window.diameter() * 3e-7 * (attempt + 1)
            win = SearchWindow(
                win.re_min - 1.31 * pad,
                win.re_max + 0.77 * pad,
                win.im_min - 1.09 * pad,
                win.im_max + 0.89 * pad,
            )
    raise AssertionError("unreachable")


def _split(window: SearchWindow, fr: float, fi: float):
    rm = window.re_min + fr * window.width
    im = window.im_min + fi * window.height
    return [
        SearchWindow(window.re_min, rm, window.im_min, im),
        SearchWindow(rm, window.re_max, window.im_min, im),
        SearchWindow(window.re_min, rm, im, window.im_max),
        SearchWindow(rm, window.re_max, im, window.im_max),
    ]


def localize_zeros(fn, window: SearchWindow, max_cell: float) -> list[complex]:
    """Quadrisect the window until every zero sits alone in a cell smaller
    than max_cell; returns cell centers as refinement seeds.

    Seeds are repeated per multiplicity, so their total count equals
    count_zeros(window).  Clusters that stay unresolved below cells of
    1e-12 are emitted as repeated centers and are the caller's cue for
    coalescent-pair handling.
    """
    total = count_zeros(fn, window)
    seeds: list[complex] = []
    _quadrisect(fn, window, total, max_cell, seeds)
    return seeds


def _quadrisect(fn, window, count, max_cell, out):
    if count == 0:
        return
    if max(window.width, window.height) < 1e-12:
        out.extend([window.center] * count)
        return
    if count == 1 and window.width <= max_cell and window.height <= max_cell:
        out.append(window.center)
        return
    # a zero on the split line makes child counts disagree; nudge the cut
    for fr, fi in ((0.5, 0.5), (0.43, 0.57), (0.57, 0.43), (0.37, 0.63), (0.63, 0.37)):
        children = _split(window, fr, fi)
        try:
            counts = [count_zeros(fn, child) for child in children]
        except BoundaryDegeneracyError:
            continue
        if sum(counts) == count:
            for child, c in zip(children, counts):
                _quadrisect(fn, child, c, max_cell, out)
            return
    raise BoundaryDegeneracyError(
        f"could not partition {count} zeros in {window}; zeros pinned to every tried cut"
    )


# ---------------------------------------------------------------------------
# refinement


def _newton(fn, z, tol, maxiter=100):
    """Damped Newton with a central-difference derivative.

    Returns (z, |f(z)|, converged).  Convergence demands both a small
    residual and a collapsing step, so flat near-double valleys where |f|
    dips below tol without a root nearby are not reported as zeros.
    """
    fz = fn(z)
    best, bres = z, abs(fz)
    step_small = False
    for _ in range(maxiter):
        if bres < tol and step_small:
            return best, bres, True
        s = 1e-7 * (abs(z) + 1.0)
        d = (fn(z + s) - fn(z - s)) / (2.0 * s)
        if d == 0 or not cmath.isfinite(d):
            break
        full = fz / d
        t, moved = 1.0, False
        # halve along the Newton direction until |f| decreases; this is the
        # fallback line search toward the best point when a full step diverges
        for _ in range(30):
            z2 = z - t * full
            f2 = fn(z2)
            if cmath.isfinite(f2) and abs(f2) < abs(fz):
                z, fz, moved = z2, f2, True
                break
            t *= 0.5
        if not moved:
            break
        step_small = abs(t * full) < 3e-8 * (1.0 + abs(z))
        if abs(fz) < bres:
            best, bres = z, abs(fz)
    return best, bres, bres < tol and step_small


def refine(fn, seed: complex, tol: float = 1e-9, maxiter: int = 100) -> complex:
    """Polish a seed to a zero of fn; |f| < tol on success.

    Raises RefinementFailureError (carrying the best iterate and residual)
    when Newton plus its damped fallback cannot converge from this seed.
    """
    z, res, ok = _newton(fn, complex(seed), tol, maxiter)
    if not ok:
        raise RefinementFailureError(
            f"no zero reached from seed {seed} (best residual {res:.3g})", best=z, residual=res
        )
    return z


def coalescent_pair(fn, center: complex, scale: float | None = None, rounds: int = 3):
    """Resolve two (possibly merged) nearby zeros around center.

    Fits a local quadratic model of fn and takes its two roots, recentering
    on their midpoint; each root then gets a few plain Newton steps.  Stays
    accurate through exact coalescence, where ordinary refinement stalls on
    the flat |f| valley.
    """
    z0 = complex(center)
    if scale is None:
        scale = abs(z0) + 1.0
    s = max(1e-4 * scale, 1e-9)
    u1 = u2 = 0.0j
    for _ in range(rounds):
        c0 = fn(z0)
        fp, fm = fn(z0 + s), fn(z0 - s)
        c1 = (fp - fm) / (2.0 * s)
        c2 = (fp - 2.0 * c0 + fm) / (2.0 * s * s)
        if c2 == 0 or not (cmath.isfinite(c1) and cmath.isfinite(c2)):
            break
        disc = cmath.sqrt(c1 * c1 - 4.0 * c0 * c2)
        u1 = (-c1 + disc) / (2.0 * c2)
        u2 = (-c1 - disc) / (2.0 * c2)
        z0 = z0 + 0.5 * (u1 + u2)
        gap = abs(u1 - u2)
        s = max(min(s, 4.0 * gap) if gap > 0 else s, 1e-9)
    half = 0.5 * (u1 - u2)
    out = []
    for r in (z0 + half, z0 - half):
        for _ in range(6):
            sr = 1e-7 * (abs(r) + 1.0)
            d = (fn(r + sr) - fn(r - sr)) / (2.0 * sr)
            if d == 0 or not cmath.isfinite(d):
                break
            rn = r - fn(r) / d
            if abs(rn - r) > abs(half) + 1e-6 * (1.0 + abs(r)):
                break  # Newton escaping the pair; keep the model root
            done = abs(rn - r) < 1e-12 * (1.0 + abs(r))
            r = rn
            if done:
                break
        out.append(r)
    return out[0], out[1]


# ---------------------------------------------------------------------------
# collective-rate extraction


def characteristic_function(params: ChainParams) -> CharFn:
    """The function whose zeros are searched: origin-deflated under the
    superradiant condition, undeflated otherwise."""
    if params.mode == MODE_SR:
        return CharFn(params, deflation_order=params.n_qubits - 1)
    return CharFn(params, deflation_order=0)


def _accept_tol(fn: CharFn, z: complex) -> float:
    return max(1e-9, 64.0 * _EPS * fn.noise_scale(z))


def find_collective_rates(params: ChainParams, window: SearchWindow | None = None) -> list[Pole]:
    """All decay poles inside the window, refined and classified.

    Zeros of the deflated characteristic function are located, polished,
    deduplicated (1e-8), and classified: ``zero-mode`` for |Delta| < 1e-6,
    ``markovian-like`` when continuation to L -> 0 lands on a finite
    Markovian root, ``exclusively-non-markovian`` otherwise.  Refinement
    failures are warned about per pole, never abort the batch.  Sorted by
    |Delta| ascending.
    """
    if window is None:
        window = default_window(params.n_qubits)
    if params.mode == MODE_MARKOVIAN:
        return _markovian_rates(params, window)
    fn = characteristic_function(params)
    max_cell = max(window.diameter() / 128.0, 4e-12)
    seeds = localize_zeros(fn, window, max_cell)
    clusters: list[tuple[complex, int]] = []
    for s in seeds:
        for i, (c, m) in enumerate(clusters):
            if abs(s - c) <= 2.0 * max_cell:
                clusters[i] = (c, m + 1)
                break
        else:
            clusters.append((s, 1))
    roots: list[complex] = []
    for center, mult in clusters:
        if mult >= 2:
            r1, r2 = coalescent_pair(fn, center, scale=max(abs(center), max_cell))
            roots.extend([r1, r2][:mult])
            continue
        try:
            roots.append(refine(fn, center, tol=_accept_tol(fn, center)))
        except RefinementFailureError as err:
            r1, r2 = coalescent_pair(fn, center, scale=max(abs(center), max_cell))
            pick = min((r1, r2), key=lambda r: abs(r - center))
            if abs(fn(pick)) <= _accept_tol(fn, pick):
                roots.append(pick)
            else:
                warnings.warn(f"dropping seed {center}: {err}", stacklevel=2)
    # merge duplicates, then re-resolve suspiciously tight pairs as folds
    uniq: list[complex] = []
    for r in sorted(roots, key=abs):
        if not any(abs(r - u) < 1e-8 * (1.0 + abs(u)) for u in uniq):
            uniq.append(r)
    poles = []
    for r in uniq:
        if not window.contains(r, pad=1e-6 * window.diameter()):
            continue
        if r.imag > 5e-10:
            warnings.warn(f"discarding unphysical root {r} (Re Gamma < 0)", stacklevel=2)
            continue
        res = abs(fn(r))
        poles.append(Pole(delta=r, residual=res, classification=_classify(params, r)))
    poles.sort(key=lambda p: (abs(p.delta), p.delta.real, p.delta.imag))
    return poles


def _markovian_rates(params: ChainParams, window: SearchWindow) -> list[Pole]:
    # the characteristic function is an exact polynomial here; its companion
    # roots are the straightest (and fully deterministic) route
    coeffs = markovian_polynomial(params)
    roots = np.roots(np.array(coeffs[::-1], dtype=complex))
    fn = CharFn(params, deflation_order=0)
    poles = []
    for r in roots:
        z = complex(r)
        if not window.contains(z, pad=1e-9):
            continue
        if z.imag > 5e-10:
            continue
        cls = ZERO_MODE if abs(z) < 1e-6 else MARKOVIAN_LIKE
        poles.append(Pole(delta=z, residual=abs(fn(z)), classification=cls))
    poles.sort(key=lambda p: (abs(p.delta), p.delta.real, p.delta.imag))
    return poles


def _classify(params: ChainParams, delta: complex) -> str:
    if abs(delta) < 1e-6:
        return ZERO_MODE
    n = params.n_qubits
    l_end = min(1e-3, 0.2 / (n * n))
    markov = -0.5j * n
    bound = 4.0 * n + 10.0
    z, l_cur = delta, params.separation
    if l_cur > l_end:
        try:
            z = _track_root(params, delta, l_cur, l_end, divergence=bound)
        except ContinuationBreakdownError:
            return NON_MARKOVIAN
        if z is None:
            return NON_MARKOVIAN
    near = min(abs(z), abs(z - markov))
    return MARKOVIAN_LIKE if near <= 0.3 * (0.5 * n) + 0.05 else NON_MARKOVIAN


def _fn_at_separation(params: ChainParams, sep: float) -> CharFn:
    return characteristic_function(
        ChainParams(
            n_qubits=params.n_qubits,
            separation=sep,
            mode=params.mode,
            omega=params.omega,
            sr_index=params.sr_index,
        )
    )


def _track_root(params, z, l_from, l_to, divergence=None, min_step=1e-6):
    """Follow one zero from l_from to l_to with adaptive step halving.

    A step only counts when Newton converges AND the root moved by less
    than a third of its magnitude; larger jumps are treated as branch
    hopping and the stride is halved.  Strides are also capped a priori at
    35% relative changes of L.  Returns the root at l_to, or None once
    |Delta| crosses the divergence bound (the signature of an exclusively
    non-Markovian branch running away as L -> 0).  Raises
    ContinuationBreakdownError below min_step.
    """
    cur = l_from
    pending = [l_to]
    # coarse geometric waypoints keep every seed inside the previous basin
    if min(l_from, l_to) > 0 and abs(math.log(l_to / l_from)) > 0.35:
        k = math.ceil(abs(math.log(l_to / l_from)) / 0.3)
        pending = [l_from * (l_to / l_from) ** (i / k) for i in range(k, 0, -1)]
    while pending:
        target = pending[-1]
        fn = _fn_at_separation(params, target)
        znew, res, ok = _newton(fn, z, _accept_tol(fn, z))
        if ok and abs(znew - z) > 0.35 * (1.0 + abs(z)):
            ok = False  # converged, but not to the tracked branch
        if not ok:
            pair = coalescent_pair(fn, z, scale=abs(z) + 1.0)
            cand = min(pair, key=lambda r: abs(r - z))
            if (
                abs(fn(cand)) <= _accept_tol(fn, cand) * 10.0
                and abs(cand - z) <= 0.35 * (1.0 + abs(z))
            ):
                znew, ok = cand, True
        if ok:
            z, cur = znew, target
            pending.pop()
            if divergence is not None and abs(z) > divergence:
                return None
            continue
        mid = 0.5 * (cur + target)
        if abs(mid - cur) < min_step * max(1.0, abs(cur)) * 1e-3 or abs(mid - cur) < 1e-12:
            raise ContinuationBreakdownError(
                f"continuation stalled at L = {cur:.6g} toward {target:.6g}", partial=[]
            )
        pending.append(mid)
    return z


def continue_pole(params: ChainParams, pole: Pole, l_path: list[float]) -> list[Pole]:
    """Track one pole along a separation path.

    The path must start at params.separation; steps that Newton cannot
    bridge are halved adaptively down to a 1e-6 minimum.  In sr-condition
    mode, where zeros come in mirror pairs (Delta, -conj(Delta)), the
    emitted branch keeps the sign of Im Gamma across pair coalescence.
    """
    if not l_path:
        raise ContractViolationError("l_path must contain at least the starting separation")
    if abs(l_path[0] - params.separation) > 1e-9 * max(1.0, params.separation):
        raise ContractViolationError(
            f"l_path starts at {l_path[0]}, but params.separation = {params.separation}"
        )
    if params.mode == MODE_SR and pole.classification == ZERO_MODE:
        # under the superradiant condition the origin zero persists at every
        # separation; its continuation is the zero mode itself
        return [pole] + [
            Pole(delta=0.0j, residual=0.0, classification=ZERO_MODE) for _ in l_path[1:]
        ]
    out = [pole]
    z = pole.delta
    prev_sign = _im_gamma_sign(z)
    cur = l_path[0]
    for target in l_path[1:]:
        try:
            z = _track_root(params, z, cur, target)
        except ContinuationBreakdownError as err:
            raise ContinuationBreakdownError(
                f"pole lost between L = {cur:.6g} and {target:.6g}", partial=out
            ) from err
        if z is None:  # pragma: no cover - no divergence bound on explicit paths
            raise ContinuationBreakdownError("pole diverged along the path", partial=out)
        if params.mode == MODE_SR and abs(z.real) > 1e-9 * (1.0 + abs(z)):
            mirror = -z.conjugate()
            if prev_sign != 0 and _im_gamma_sign(z) != prev_sign:
                z = mirror
            elif prev_sign == 0 and _im_gamma_sign(z) < 0:
                z = mirror
        prev_sign = _im_gamma_sign(z) or prev_sign
        cur = target
        fn = _fn_at_separation(params, cur)
        out.append(Pole(delta=z, residual=abs(fn(z)), classification=pole.classification))
    return out


def _im_gamma_sign(delta: complex) -> int:
    im = (2j * delta).imag
    if abs(im) <= 1e-9 * (1.0 + abs(delta)):
        return 0
    return 1 if im > 0 else -1


def grid_scan_minima(fn_log10, window: SearchWindow, resolution: int = 400) -> list[complex]:
    """Strict local minima of a log10|f| map on a uniform grid; brute-force
    oracle seeds for cross-checking the analytic pipeline."""
    res = np.linspace(window.re_min, window.re_max, resolution)
    ims = np.linspace(window.im_min, window.im_max, resolution)
    grid = res[None, :] + 1j * ims[:, None]
    vals = fn_log10(grid)
    vals = np.where(np.isfinite(vals), vals, np.inf)
    out = []
    interior = vals[1:-1, 1:-1]
    neighbors = np.stack(
        [
            vals[:-2, 1:-1], vals[2:, 1:-1], vals[1:-1, :-2], vals[1:-1, 2:],
            vals[:-2, :-2], vals[:-2, 2:], vals[2:, :-2], vals[2:, 2:],
        ]
    )
    mask = interior <= neighbors.min(axis=0)
    ii, jj = np.nonzero(mask)
    for i, j in zip(ii, jj):
        out.append(complex(grid[i + 1, j + 1]))
    return out
