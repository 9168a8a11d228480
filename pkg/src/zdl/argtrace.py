"""Continuous argument tracking along paths in the complex plane.

The argument principle work all happens here: given an analytic function f
and a polygonal path, sample f densely enough that successive phases move
by less than pi/2, unwrap, and report the continuous argument change.  Key
consumers:

  * winding numbers of rectangle boundaries (zero counting),
  * far-field anchored arguments: arg f(s) defined by continuous variation
    from sigma = +infinity, where |f - 1| < 1/2 pins the branch,
  * top-edge argument decompositions of counting formulas.

Refinement doubles the local sample density whenever the wrapped phase step
exceeds a safety margin (1.35 rad < pi/2) or the magnitude jumps by more
than a factor of 8; the magnitude trigger resolves phase swings near zeros
that sit close to the path, which pure phase stepping can alias past.
A zero on (or numerically indistinguishable from) the path raises
ZeroOnPath; rectangle boundaries are then perturbed deterministically.

Traces are cached per (function, policy, directed segment).  Rectangle
subdivision in the scanner reuses three of four edges of every child, so
a cached trace turns a quadtree split into a single new cut. Reversal is
exact: reversing a segment negates its argument change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import mpmath
from mpmath import mpc, mpf, workprec

from .config import EvalConfig
from .errors import FarPointNotDominated, PrecisionExhausted, ZeroOnPath
from .evalcore import (
    EvalResult,
    PrecisionPolicy,
    as_mpc,
    eval_gamma_factor,
    eval_norm_deriv,
    eval_zeta_deriv,
    zeta_derivs,
)

STEP_MAX = 1.35          # accepted wrapped phase step (safety margin under pi/2)
MAG_JUMP_MAX = 3         # accepted |log2 magnitude| jump between neighbors
SAMPLES_PER_UNIT_CAP = 2 ** 20
TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# trackable functions

@dataclass(frozen=True)
class TrackedFn:
    """An analytic function with a stable name (cache identity) and evaluator.

    `poles` lists known pole locations with orders.  The tracer needs them:
    a path passing close to a pole can alias (the phase whips through more
    than pi between samples while the magnitude, symmetric about closest
    approach, trips no guard), so sample steps are capped near each pole.
    """

    name: str
    evaluate: Callable[[mpc, PrecisionPolicy], EvalResult]
    poles: Tuple[Tuple[complex, int], ...] = ()

    def __call__(self, s: mpc, policy: PrecisionPolicy) -> EvalResult:
        return self.evaluate(s, policy)


def fn_zeta_deriv(k: int, eval_cfg: Optional[EvalConfig] = None) -> TrackedFn:
    cfg = eval_cfg or EvalConfig()
    return TrackedFn(f"zeta_d{k}", lambda s, pol: zeta_derivs(s, (k,), pol, cfg)[k],
                     poles=((1 + 0j, k + 1),))


def fn_norm_deriv(k: int, eval_cfg: Optional[EvalConfig] = None) -> TrackedFn:
    """2^s (-1)^k (log 2)^-k zeta^(k); same zeros as zeta^(k), far field -> 1."""
    cfg = eval_cfg or EvalConfig()
    return TrackedFn(f"norm_d{k}", lambda s, pol: eval_norm_deriv(s, k, pol, cfg),
                     poles=((1 + 0j, k + 1),))


def _completed(s: mpc, pol: PrecisionPolicy, cfg: EvalConfig) -> EvalResult:
    z = zeta_derivs(s, (0,), pol, cfg)[0]
    h, _ = eval_gamma_factor(s, pol)
    with workprec(max(z.precision_bits, h.precision_bits)):
        value = h.value * z.value
        radius = (
            abs(h.value) * z.error_radius
            + abs(z.value) * h.error_radius
            + z.error_radius * h.error_radius
        )
    return EvalResult(value, radius, z.precision_bits, z.terms_used + h.terms_used)


def fn_completed_zeta(eval_cfg: Optional[EvalConfig] = None) -> TrackedFn:
    """h(s) * zeta(s) with h = pi^(-s/2) Gamma(s/2): real on the critical line."""
    cfg = eval_cfg or EvalConfig()
    return TrackedFn("completed_zeta", lambda s, pol: _completed(s, pol, cfg),
                     poles=((1 + 0j, 1), (0j, 1)))


def fn_polynomial(roots: Sequence[complex], name: str) -> TrackedFn:
    """prod (s - r) for test oracles; radius from a crude rounding model."""
    rts = tuple(mpc(r) for r in roots)

    def ev(s: mpc, pol: PrecisionPolicy) -> EvalResult:
        wb = pol.working_bits(abs(float(s.imag)))
        with workprec(wb):
            acc = mpc(1, 0)
            for r in rts:
                acc = acc * (s - r)
            radius = (1 + abs(acc)) * mpmath.ldexp(1, 4 + len(rts) - wb)
        return EvalResult(acc, radius, wb, len(rts))

    return TrackedFn(name, ev)


# ---------------------------------------------------------------------------
# geometry and results

@dataclass(frozen=True)
class RectRegion:
    """Axis-aligned rectangle [sigma_min, sigma_max] x [t_min, t_max]."""

    sigma_min: float
    sigma_max: float
    t_min: float
    t_max: float

    def __post_init__(self):
        if not (self.sigma_min < self.sigma_max and self.t_min < self.t_max):
            raise ValueError("degenerate rectangle")

    def corners(self) -> Tuple[mpc, mpc, mpc, mpc]:
        """(bl, br, tr, tl), counterclockwise."""
        return (
            mpc(self.sigma_min, self.t_min),
            mpc(self.sigma_max, self.t_min),
            mpc(self.sigma_max, self.t_max),
            mpc(self.sigma_min, self.t_max),
        )

    def width(self) -> float:
        return self.sigma_max - self.sigma_min

    def height(self) -> float:
        return self.t_max - self.t_min

    def contains(self, re: float, im: float) -> bool:
        return self.sigma_min <= re <= self.sigma_max and self.t_min <= im <= self.t_max


@dataclass(frozen=True)
class ArgPath:
    """Unwrapped argument samples along a polygonal path."""

    waypoints: Tuple[complex, ...]
    samples: Tuple[Tuple[complex, float], ...]   # (point, unwrapped phase)
    total_delta: float
    n_evals: int

    def phase_steps_ok(self) -> bool:
        ph = [p for _, p in self.samples]
        return all(abs(b - a) < math.pi / 2 for a, b in zip(ph, ph[1:]))


@dataclass(frozen=True)
class WindingReport:
    rect: RectRegion
    boundary_delta: float
    count: int
    residual: float
    n_evals: int
    perturbed: bool = False


@dataclass(frozen=True)
class AnchoredArg:
    """Argument at a point, pinned by continuous variation from the far field."""

    value: float
    anchor: float        # arcsin branch value at the far abscissa, in (-pi/2, pi/2)
    far_sigma: float
    path: ArgPath


class TraceStats:
    """Mutable run statistics threaded through scans (no module globals)."""

    def __init__(self):
        self.residuals: List[float] = []
        self.n_windings = 0
        self.n_perturbations = 0
        self.n_evals = 0

    def record_winding(self, residual: float, n_evals: int):
        self.residuals.append(residual)
        self.n_windings += 1
        self.n_evals += n_evals

    def max_residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0


@dataclass
class _SegTrace:
    taus: List[float]
    rel_phases: List[float]      # rel_phases[0] == 0
    raw0: float                  # atan2 phase of the first sample, in (-pi, pi]
    n_evals: int

    @property
    def delta(self) -> float:
        return self.rel_phases[-1]

    def reversed(self) -> "_SegTrace":
        last = self.rel_phases[-1]
        taus = [1.0 - t for t in reversed(self.taus)]
        rel = [p - last for p in reversed(self.rel_phases)]
        raw = math.remainder(self.raw0 + last, TWO_PI)
        return _SegTrace(taus, rel, raw, 0)


class EdgeCache:
    """Cache of directed segment traces keyed by function, policy, endpoints."""

    def __init__(self):
        self._data: Dict[tuple, _SegTrace] = {}
        self.hits = 0
        self.misses = 0

    @staticmethod
    def _key(fn: TrackedFn, policy: PrecisionPolicy, a: complex, b: complex) -> tuple:
        return (fn.name, policy.fingerprint(),
                a.real.hex(), a.imag.hex(), b.real.hex(), b.imag.hex())

    def get(self, fn, policy, a: complex, b: complex) -> Optional[_SegTrace]:
        tr = self._data.get(self._key(fn, policy, a, b))
        if tr is not None:
            self.hits += 1
            return tr
        rev = self._data.get(self._key(fn, policy, b, a))
        if rev is not None:
            self.hits += 1
            return rev.reversed()
        self.misses += 1
        return None

    def put(self, fn, policy, a: complex, b: complex, trace: _SegTrace) -> None:
        self._data[self._key(fn, policy, a, b)] = trace


# ---------------------------------------------------------------------------
# segment tracing

def _default_h0(a: complex, b: complex) -> float:
    """Initial sample spacing heuristic, in path-length units.

    Dense near the zero-bearing strip (small sigma), coarse deep in the
    right half-plane where tracked functions are 1 + tiny.  Horizontal
    runs cross the strip broadside and get the densest grid.
    """
    lo = min(a.real, b.real)
    horizontal = abs(a.imag - b.imag) < 1e-12
    if lo < 4.0:
        return 0.08 if horizontal else 0.25
    if lo < 12.0:
        return 1.0
    return 4.0


def _phase(v: EvalResult) -> float:
    return float(mpmath.atan2(v.value.imag, v.value.real))


def _mag(v: EvalResult) -> float:
    m = mpmath.mag(v.value)
    return float(m) if mpmath.isfinite(mpf(m)) else -1e18


def _trace_segment(
    fn: TrackedFn,
    a: complex,
    b: complex,
    policy: PrecisionPolicy,
    cache: Optional[EdgeCache],
    initial_step: Optional[float] = None,
) -> _SegTrace:
    if cache is not None:
        hit = cache.get(fn, policy, a, b)
        if hit is not None:
            return hit

    length = abs(b - a)
    if length == 0.0:
        raise ValueError("zero-length segment")
    h0 = initial_step if initial_step is not None else _default_h0(a, b)
    n0 = max(1, int(math.ceil(length / h0)))
    taus0 = [i / n0 for i in range(n0 + 1)]
    # refinement cap: no more than SAMPLES_PER_UNIT_CAP per unit of path length
    depth_cap = max(4, int(math.ceil(math.log2(max(length / n0, 1e-12) * SAMPLES_PER_UNIT_CAP))))

    evals: Dict[float, Tuple[float, float]] = {}
    n_evals = 0

    def point(tau: float) -> mpc:
        return mpc(a.real + tau * (b.real - a.real), a.imag + tau * (b.imag - a.imag))

    def ev_fresh(tau: float, pol: PrecisionPolicy) -> Tuple[float, float]:
        nonlocal n_evals
        res = fn(point(tau), pol)
        n_evals += 1
        if res.abs_lower() <= 0:
            raise ZeroOnPath(
                f"|{fn.name}| below certified radius at {complex(point(tau))}",
                point=complex(point(tau)),
            )
        return (_phase(res), _mag(res))

    def ev(tau: float) -> Tuple[float, float]:
        got = evals.get(tau)
        if got is not None:
            return got
        out = ev_fresh(tau, policy)
        evals[tau] = out
        return out

    def ok(pa, pb) -> bool:
        return (
            abs(math.remainder(pb[0] - pa[0], TWO_PI)) <= STEP_MAX
            and abs(pb[1] - pa[1]) <= MAG_JUMP_MAX
        )

    ar, ai = float(a.real), float(a.imag)
    dr, di = float(b.real) - ar, float(b.imag) - ai

    def step_ok(t0: float, t1: float) -> bool:
        # Near a declared pole the phase and magnitude guards can both alias
        # (a symmetric flyby wraps the phase by ~2*pi*order between samples),
        # so cap the step geometrically: order * step <= 0.7 * distance keeps
        # the pole factor's phase advance per step under the wrap threshold.
        if not fn.poles:
            return True
        tm = (t0 + t1) / 2
        mr, mi = ar + tm * dr, ai + tm * di
        step = length * (t1 - t0)
        for p, order in fn.poles:
            if step * order > 0.7 * math.hypot(mr - p.real, mi - p.imag):
                return False
        return True

    for tau in taus0:
        ev(tau)

    stack: List[Tuple[float, float, int]] = []
    for t0, t1 in zip(reversed(taus0[:-1]), reversed(taus0[1:])):
        stack.append((t0, t1, 0))
    ordered: List[float] = [0.0]
    while stack:
        t0, t1, depth = stack.pop()
        pa, pb = evals[t0], evals[t1]
        if ok(pa, pb) and step_ok(t0, t1):
            ordered.append(t1)
            continue
        if depth >= depth_cap:
            if not step_ok(t0, t1):
                raise ZeroOnPath(
                    f"pole of {fn.name} adjacent to path near {complex(point((t0 + t1) / 2))}",
                    point=complex(point((t0 + t1) / 2)),
                )
            # one escalated-precision retry, then declare a zero on the path
            fine = policy.with_output_bits(2 * policy.output_bits)
            qa = ev_fresh(t0, fine)
            qb = ev_fresh(t1, fine)
            if ok(qa, qb):
                evals[t0], evals[t1] = qa, qb
                ordered.append(t1)
                continue
            raise ZeroOnPath(
                f"unresolvable phase step of {fn.name} near {complex(point((t0 + t1) / 2))}",
                point=complex(point((t0 + t1) / 2)),
            )
        tm = (t0 + t1) / 2
        ev(tm)
        stack.append((tm, t1, depth + 1))
        stack.append((t0, tm, depth + 1))

    rel = [0.0]
    for t0, t1 in zip(ordered, ordered[1:]):
        step = math.remainder(evals[t1][0] - evals[t0][0], TWO_PI)
        rel.append(rel[-1] + step)
    trace = _SegTrace(ordered, rel, evals[0.0][0], n_evals)
    if cache is not None:
        cache.put(fn, policy, a, b, trace)
    return trace


def track_arg(
    fn: TrackedFn,
    waypoints: Sequence,
    policy: Optional[PrecisionPolicy] = None,
    cache: Optional[EdgeCache] = None,
    initial_step: Optional[float] = None,
) -> ArgPath:
    """Continuous argument along the polygonal path through `waypoints`.

    total_delta is invariant under refinement of the waypoint list (splitting
    a segment changes samples, not the unwrapped endpoint difference).
    """
    policy = policy or PrecisionPolicy()
    wps = [complex(as_mpc(w)) for w in waypoints]
    if len(wps) < 2:
        raise ValueError("need at least two waypoints")
    traces = []
    for a, b in zip(wps, wps[1:]):
        traces.append((a, b, _trace_segment(fn, a, b, policy, cache, initial_step)))

    samples: List[Tuple[complex, float]] = []
    base = traces[0][2].raw0
    total = 0.0
    n_evals = 0
    for a, b, tr in traces:
        for tau, ph in zip(tr.taus, tr.rel_phases):
            pt = complex(a.real + tau * (b.real - a.real), a.imag + tau * (b.imag - a.imag))
            if samples and tau == 0.0:
                continue  # joint point already emitted by previous segment
            samples.append((pt, base + total + ph))
        total += tr.delta
        n_evals += tr.n_evals
    return ArgPath(tuple(wps), tuple(samples), total, n_evals)


# ---------------------------------------------------------------------------
# winding numbers

_EDGES = ("bottom", "right", "top", "left")


def _edge_segments(rect: RectRegion):
    bl, br, tr, tl = (complex(c) for c in rect.corners())
    return {"bottom": (bl, br), "right": (br, tr), "top": (tr, tl), "left": (tl, bl)}


def winding_number(
    fn: TrackedFn,
    rect: RectRegion,
    policy: Optional[PrecisionPolicy] = None,
    cache: Optional[EdgeCache] = None,
    stats: Optional[TraceStats] = None,
    perturb: bool = True,
    residual_tol: float = 1e-6,
    cut_points: Optional[Dict[str, Sequence[float]]] = None,
) -> WindingReport:
    """Number of zeros (with multiplicity) of fn inside rect.

    Traces the counterclockwise boundary; raises ZeroOnPath if a zero sits on
    it, unless `perturb` is set, in which case the offending edge is moved
    outward (bottom/top/left/right by -dt/+dt/-ds/+ds) through the
    deterministic ladder 1e-6 * 2^-j, j = 0..20, and the report carries the
    perturbed rectangle.  `cut_points` optionally splits named edges at given
    coordinates so slab-aligned sub-segments hit the shared trace cache.
    """
    policy = policy or PrecisionPolicy()
    current = rect
    perturbed = False
    last_exc: Optional[ZeroOnPath] = None
    for attempt in range(22):
        try:
            delta, n_evals = _boundary_delta(fn, current, policy, cache, cut_points)
        except ZeroOnPath as exc:
            if not perturb:
                raise
            last_exc = exc
            j = attempt
            if j > 20:
                break
            eps = 1e-6 * (2.0 ** -j)
            current = _perturb_rect(current, exc.point, eps)
            perturbed = True
            if stats is not None:
                stats.n_perturbations += 1
            continue
        w = delta / TWO_PI
        count = int(round(w))
        residual = abs(w - count)
        if residual > residual_tol:
            raise PrecisionExhausted(
                f"winding residual {residual:.3e} over {current} exceeds {residual_tol}"
            )
        if stats is not None:
            stats.record_winding(residual, n_evals)
        return WindingReport(current, delta, count, residual, n_evals, perturbed)
    raise last_exc  # exhausted perturbation ladder


def _boundary_delta(fn, rect, policy, cache, cut_points):
    segs = _edge_segments(rect)
    total = 0.0
    n_evals = 0
    for name in _EDGES:
        a, b = segs[name]
        pieces = [a]
        cuts = sorted(set(cut_points.get(name, ()))) if cut_points else ()
        if cuts:
            horizontal = name in ("bottom", "top")
            lo, hi = (min(a.real, b.real), max(a.real, b.real)) if horizontal else (
                min(a.imag, b.imag), max(a.imag, b.imag))
            inner = [c for c in cuts if lo < c < hi]
            if a.real > b.real or a.imag > b.imag:
                inner = list(reversed(inner))
            for c in inner:
                pieces.append(complex(c, a.imag) if horizontal else complex(a.real, c))
        pieces.append(b)
        for p, q in zip(pieces, pieces[1:]):
            tr = _trace_segment(fn, p, q, policy, cache)
            total += tr.delta
            n_evals += tr.n_evals
    return total, n_evals


def _perturb_rect(rect: RectRegion, at: Optional[complex], eps: float) -> RectRegion:
    """Move the edge nearest to the offending point outward by eps."""
    if at is None:
        return RectRegion(rect.sigma_min - eps, rect.sigma_max + eps,
                          rect.t_min - eps, rect.t_max + eps)
    d = {
        "left": abs(at.real - rect.sigma_min),
        "right": abs(at.real - rect.sigma_max),
        "bottom": abs(at.imag - rect.t_min),
        "top": abs(at.imag - rect.t_max),
    }
    edge = min(d, key=d.get)
    if edge == "left":
        return RectRegion(rect.sigma_min - eps, rect.sigma_max, rect.t_min, rect.t_max)
    if edge == "right":
        return RectRegion(rect.sigma_min, rect.sigma_max + eps, rect.t_min, rect.t_max)
    if edge == "bottom":
        return RectRegion(rect.sigma_min, rect.sigma_max, rect.t_min - eps, rect.t_max)
    return RectRegion(rect.sigma_min, rect.sigma_max, rect.t_min, rect.t_max + eps)


# ---------------------------------------------------------------------------
# far-field anchored argument

def arg_from_plus_infinity(
    fn: TrackedFn,
    point,
    policy: Optional[PrecisionPolicy] = None,
    far_sigma: float = 30.0,
    cache: Optional[EdgeCache] = None,
) -> AnchoredArg:
    """arg fn(s) pinned by continuous variation from sigma = +infinity.

    At sigma = far_sigma the function must satisfy |f - 1| < 1/2 (else
    FarPointNotDominated): there the argument is unambiguously
    arcsin(Im f / |f|) in (-pi/2, pi/2), and beyond far_sigma it cannot wind,
    so the anchor represents the whole tail to +infinity.  The value at s is
    anchor + (argument change along the horizontal segment far -> s).
    """
    policy = policy or PrecisionPolicy()
    s = complex(as_mpc(point))
    if s.real >= far_sigma:
        raise ValueError("point must lie to the left of the far abscissa")
    far = complex(far_sigma, s.imag)
    fres = fn(mpc(far.real, far.imag), policy)
    dist = abs(fres.value - 1) + fres.error_radius
    if not dist < 0.5:
        raise FarPointNotDominated(
            f"|{fn.name} - 1| = {float(dist):.3f} at sigma = {far_sigma}; anchor undefined"
        )
    anchor = float(mpmath.asin(fres.value.imag / abs(fres.value)))
    path = track_arg(fn, [far, s], policy, cache)
    return AnchoredArg(anchor + path.total_delta, anchor, far_sigma, path)
