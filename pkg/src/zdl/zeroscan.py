"""Zero isolation and strip scans with certified disks.

A scan of zeta^(k) over [sigma_left, sigma_right] x (t_floor, T] proceeds in
horizontal slabs whose cut lines are shared between neighbors: a cut is
traced once and reused (reversed) by the slab above, so tiling the strip
costs one horizontal trace per cut plus interior work.  Cut positions are
chosen by a deterministic ladder that moves a candidate cut until the trace
crosses no zero; with the final geometry fixed, no zero can be lost or
double-counted at slab boundaries, and certified-disk deduplication is kept
as a defensive invariant check.

Inside a slab, rectangles are subdivided (with winding numbers certifying
each child's count and their sum checked against the parent) until each
cell holds a single cluster; a Newton iteration on (zeta^(k), zeta^(k+1))
then refines the zero, and the result is certified by the winding number of
a tiny square around it, which also reveals multiplicity.  If Newton
escapes, a pure winding-bisection takes over.  Cells shrinking below 2^-60
without certification raise SubdivisionLimit.

Counts of zeros ON the critical line use the completed function
h(s) zeta(s), which is real for Re s = 1/2: its sign changes locate k=0
critical zeros without any winding machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
from mpmath import mpc, mpf, workprec

from .config import EvalConfig, LabConfig
from .errors import PrecisionExhausted, SubdivisionLimit, ZeroOnPath
from .evalcore import PrecisionPolicy, zeta_derivs
from .argtrace import (
    EdgeCache,
    RectRegion,
    TraceStats,
    TrackedFn,
    WindingReport,
    fn_completed_zeta,
    fn_norm_deriv,
    fn_zeta_deriv,
    winding_number,
)

MIN_CELL = 2.0 ** -60
TARGET_RADIUS = mpf("1e-10")
CERT_SIDE0 = 1.4e-10          # first certification square side; radius stays <= 1e-10
METHOD_NEWTON = "newton"
METHOD_BISECT = "winding-bisect"
METHOD_LINE = "critical-line-sign-change"


@dataclass(frozen=True)
class ZeroRecord:
    """A certified zero: |true location - (beta + i gamma)| <= error_radius."""

    k: int
    beta: mpf
    gamma: mpf
    multiplicity: int
    error_radius: mpf
    method: str

    def disk_intersects(self, other: "ZeroRecord") -> bool:
        d = mpmath.hypot(self.beta - other.beta, self.gamma - other.gamma)
        return d <= self.error_radius + other.error_radius

    def on_critical_line(self) -> bool:
        return abs(self.beta - mpf("0.5")) <= self.error_radius


@dataclass(frozen=True)
class OrdinateSet:
    """Ordinates of critical-line zeros of zeta^(j) for orders j <= ell."""

    ell: int
    t_min: float
    t_max: float
    ordinates: Tuple[mpf, ...]
    sources: Tuple[frozenset, ...]   # per ordinate: the set of orders j that vanish there

    def count(self) -> int:
        return len(self.ordinates)


def _winding_fn(k: int, eval_cfg: EvalConfig) -> TrackedFn:
    # the normalized derivative kills the 2^-s argument drift of zeta^(k)
    # along vertical far-field edges; for k=0 zeta itself is already tame
    return fn_zeta_deriv(0, eval_cfg) if k == 0 else fn_norm_deriv(k, eval_cfg)


# ---------------------------------------------------------------------------
# Newton refinement and certification

def _newton_refine(
    k: int,
    rect: RectRegion,
    policy: PrecisionPolicy,
    eval_cfg: EvalConfig,
) -> Optional[mpc]:
    """Newton iteration for zeta^(k) from the cell center; None if it escapes."""
    wb = policy.working_bits(rect.t_max) + 40
    with workprec(wb):
        z = mpc(mpf(rect.sigma_min) + mpf(rect.sigma_max), mpf(rect.t_min) + mpf(rect.t_max)) / 2
        margin = 0.5 * max(rect.width(), rect.height()) + 1e-3
        for _ in range(80):
            pair = zeta_derivs(z, (k, k + 1), policy, eval_cfg)
            f, fp = pair[k], pair[k + 1]
            if abs(fp.value) <= fp.error_radius:
                return None  # cannot trust the derivative; fall back to bisection
            step = f.value / fp.value
            z = z - step
            if not (rect.sigma_min - margin <= float(z.real) <= rect.sigma_max + margin
                    and rect.t_min - margin <= float(z.imag) <= rect.t_max + margin):
                return None
            if abs(step) < mpf("1e-13"):
                return z
    return None


def _certify_point(
    fn: TrackedFn,
    k: int,
    z: mpc,
    expect_at_most: int,
    policy: PrecisionPolicy,
    stats: Optional[TraceStats],
    method: str,
) -> Optional[ZeroRecord]:
    """Certify a zero near z by the winding of a shrinking tiny square.

    The square is small enough that the certified radius (half-diagonal plus
    any recentering) stays below TARGET_RADIUS.  Returns None if no zero is
    inside, letting the caller keep subdividing.
    """
    side = CERT_SIDE0
    center = z
    for _ in range(4):
        sq = RectRegion(
            float(center.real) - side / 2, float(center.real) + side / 2,
            float(center.imag) - side / 2, float(center.imag) + side / 2,
        )
        try:
            rep = winding_number(fn, sq, policy, cache=None, stats=stats,
                                 perturb=False, residual_tol=1e-6)
        except ZeroOnPath:
            side *= 0.73  # deterministic shrink moves edges off the offender
            continue
        if rep.count < 1:
            return None
        if rep.count > expect_at_most:
            raise PrecisionExhausted(
                f"certification square winding {rep.count} exceeds cell count {expect_at_most}"
            )
        radius = mpf(side) * mpf(2) ** mpf("-0.5") + abs(center - z)
        return ZeroRecord(k, center.real, center.imag, rep.count, radius, method)
    return None


# ---------------------------------------------------------------------------
# recursive isolation

_CUT_OFFSETS = (0.0, 1e-6, -1e-6, 3e-6, -3e-6, 9e-6, -9e-6, 2.7e-5, -2.7e-5,
                8.1e-5, -8.1e-5, 2.43e-4, -2.43e-4)


class _Isolator:
    def __init__(self, fn: TrackedFn, k: int, policy, eval_cfg, cache, stats):
        self.fn = fn
        self.k = k
        self.policy = policy
        self.eval_cfg = eval_cfg
        self.cache = cache if cache is not None else EdgeCache()
        self.stats = stats
        self.sigma_cuts: List[float] = []
        self.t_cuts: List[float] = []

    def cut_points(self) -> Dict[str, Sequence[float]]:
        return {"bottom": self.sigma_cuts, "top": self.sigma_cuts,
                "left": self.t_cuts, "right": self.t_cuts}

    def winding(self, rect: RectRegion, perturb: bool) -> WindingReport:
        return winding_number(self.fn, rect, self.policy, cache=self.cache,
                              stats=self.stats, perturb=perturb,
                              cut_points=self.cut_points())

    def isolate(self, rect: RectRegion, count: int) -> List[ZeroRecord]:
        if count == 0:
            return []
        if count >= 1 and max(rect.width(), rect.height()) < 1e-6:
            # cluster cell: try direct certification before splitting further
            mid = mpc((rect.sigma_min + rect.sigma_max) / 2, (rect.t_min + rect.t_max) / 2)
            rec = _certify_point(self.fn, self.k, mid, count, self.policy,
                                 self.stats, METHOD_BISECT)
            if rec is not None and rec.multiplicity == count:
                return [rec]
        z = _newton_refine(self.k, rect, self.policy, self.eval_cfg)
        if z is not None and rect.contains(float(z.real), float(z.imag)):
            rec = _certify_point(self.fn, self.k, z, count, self.policy,
                                 self.stats, METHOD_NEWTON)
            if rec is not None and rec.multiplicity == count:
                return [rec]
            if rec is not None and rec.multiplicity < count:
                rest = self._split(rect, count, exclude=rec)
                return [rec] + rest
        if max(rect.width(), rect.height()) < MIN_CELL:
            raise SubdivisionLimit(
                f"cell below 2^-60 with count {count} at {rect} and no certificate"
            )
        return self._split(rect, count)

    def _split(self, rect: RectRegion, count: int,
               exclude: Optional[ZeroRecord] = None) -> List[ZeroRecord]:
        vertical = rect.width() >= rect.height()  # split the longer side
        lo, hi = ((rect.sigma_min, rect.sigma_max) if vertical
                  else (rect.t_min, rect.t_max))
        mid = (lo + hi) / 2
        span = hi - lo
        last: Optional[ZeroOnPath] = None
        for off in _CUT_OFFSETS:
            c = mid + off * max(1.0, span)
            if not (lo + span * 0.25 < c < hi - span * 0.25):
                continue
            if vertical:
                r1 = RectRegion(rect.sigma_min, c, rect.t_min, rect.t_max)
                r2 = RectRegion(c, rect.sigma_max, rect.t_min, rect.t_max)
            else:
                r1 = RectRegion(rect.sigma_min, rect.sigma_max, rect.t_min, c)
                r2 = RectRegion(rect.sigma_min, rect.sigma_max, c, rect.t_max)
            try:
                w1 = self.winding(r1, perturb=False)
                w2 = self.winding(r2, perturb=False)
            except ZeroOnPath as exc:
                last = exc
                continue
            if vertical:
                self.sigma_cuts.append(c)
            else:
                self.t_cuts.append(c)
            if w1.count + w2.count != count:
                raise PrecisionExhausted(
                    f"winding additivity broken: {w1.count}+{w2.count} != {count} at {rect}"
                )
            out = self.isolate(r1, w1.count) + self.isolate(r2, w2.count)
            if exclude is not None:
                out = [r for r in out if not r.disk_intersects(exclude)]
            return out
        raise last if last is not None else PrecisionExhausted(
            f"no admissible cut for {rect}"
        )


def isolate_zeros(
    k: int,
    rect: RectRegion,
    policy: Optional[PrecisionPolicy] = None,
    eval_cfg: Optional[EvalConfig] = None,
    cache: Optional[EdgeCache] = None,
    stats: Optional[TraceStats] = None,
) -> List[ZeroRecord]:
    """All zeros of zeta^(k) in rect, each with a certified disk <= 1e-10.

    The rectangle boundary is perturbed outward (deterministically) if a zero
    sits on it; the sum of multiplicities always equals the winding number of
    the final boundary.
    """
    policy = policy or PrecisionPolicy()
    eval_cfg = eval_cfg or EvalConfig()
    fn = _winding_fn(k, eval_cfg)
    iso = _Isolator(fn, k, policy, eval_cfg, cache, stats)
    top = winding_number(fn, rect, policy, cache=iso.cache, stats=stats, perturb=True)
    records = iso.isolate(top.rect, top.count)
    records.sort(key=lambda r: (r.gamma, r.beta))
    assert sum(r.multiplicity for r in records) == top.count
    return records


# ---------------------------------------------------------------------------
# strip scanning in slabs

def _density(k: int, t: float) -> float:
    """Approximate expected zeros per unit height (main-term slope)."""
    x = max(t, 20.0)
    denom = 4.0 * math.pi if k >= 1 else 2.0 * math.pi
    return max(math.log(x / denom) / (2.0 * math.pi), 0.05)


def _slab_cuts(k: int, t0: float, t1: float) -> List[float]:
    """Interior slab cut candidates for a scan of [t0, t1] (endpoints included)."""
    cuts = [t0]
    t = t0
    while True:
        dt = min(max(1.5 / _density(k, t), 0.75), 8.0)
        if t + 1.6 * dt >= t1:
            break
        t += dt
        cuts.append(t)
    cuts.append(t1)
    return cuts


def scan_strip(
    k: int,
    t_max: float,
    policy: Optional[PrecisionPolicy] = None,
    config: Optional[LabConfig] = None,
    store=None,
    cache: Optional[EdgeCache] = None,
    stats: Optional[TraceStats] = None,
) -> List[ZeroRecord]:
    """All zeros of zeta^(k) with sigma_left < beta, t_floor < gamma <= T.

    T lands on the first rung of a deterministic upward ladder whose
    horizontal line stays clear of zero ordinates (within ~5e-8); the store
    segment records the exact range covered.  With a store attached, ranges
    already scanned under the same (k, policy) fingerprint are reused and
    only the gaps are computed.
    """
    policy = policy or PrecisionPolicy()
    config = config or LabConfig()
    scan_cfg, eval_cfg = config.scan, config.eval
    if not (scan_cfg.t_floor < t_max <= scan_cfg.t_max):
        raise ValueError(f"t_max must lie in ({scan_cfg.t_floor}, {scan_cfg.t_max}]")
    if not (0 <= k <= eval_cfg.k_max - 1):
        raise ValueError(f"scan order k must be in 0..{eval_cfg.k_max - 1} "
                         "(Newton refinement needs order k+1)")
    lo, hi = scan_cfg.sigma_left, eval_cfg.sigma_k
    gaps = [(scan_cfg.t_floor, float(t_max))]
    if store is not None:
        _, gaps = store.get_range(k, scan_cfg.t_floor, float(t_max), policy.fingerprint())
    fn = _winding_fn(k, eval_cfg)
    iso = _Isolator(fn, k, policy, eval_cfg, cache, stats)
    collected: List[ZeroRecord] = []
    for g0, g1 in gaps:
        cuts = _slab_cuts(k, g0, g1)
        prev = cuts[0]
        for target in cuts[1:]:
            top_is_final = target == cuts[-1]
            # cut admissibility ladder: upward-only for the final top edge
            offsets = [j * 1e-6 for j in range(0, 12)] if top_is_final else \
                      [0.0] + [s * j * 1e-6 for j in range(1, 7) for s in (1, -1)]
            placed = None
            last_exc = None
            for off in offsets:
                c = target + off
                rect = RectRegion(lo, hi, prev, c)
                try:
                    rep = winding_number(fn, rect, policy, cache=iso.cache,
                                         stats=stats, perturb=False,
                                         cut_points=iso.cut_points())
                except ZeroOnPath as exc:
                    last_exc = exc
                    continue
                placed = (c, rect, rep)
                break
            if placed is None:
                raise last_exc
            c, rect, rep = placed
            iso.t_cuts.append(c)
            records = iso.isolate(rect, rep.count)
            if sum(r.multiplicity for r in records) != rep.count:
                raise PrecisionExhausted(f"slab {rect} enumeration != winding")
            if store is not None:
                store.put_segment(k, prev, c, policy.fingerprint(), records)
            collected.extend(records)
            prev = c
    if store is not None:
        records, rest = store.get_range(k, scan_cfg.t_floor, float(t_max), policy.fingerprint())
        if rest:
            raise PrecisionExhausted(f"store still has gaps after scan: {rest}")
        return _dedup([r for r in records if float(r.gamma) <= float(t_max) + 2e-5])
    return _dedup(collected)


def _dedup(records: List[ZeroRecord]) -> List[ZeroRecord]:
    """Merge records whose certified disks intersect (tile-boundary safety)."""
    out: List[ZeroRecord] = []
    for rec in sorted(records, key=lambda r: (float(r.gamma), float(r.beta))):
        if out and out[-1].disk_intersects(rec):
            keep = rec if rec.error_radius < out[-1].error_radius else out[-1]
            out[-1] = keep
            continue
        out.append(rec)
    return out


# ---------------------------------------------------------------------------
# critical-line work: h(s) zeta(s) is real on Re s = 1/2

def _signed_line_value(fn: TrackedFn, t: mpf, policy: PrecisionPolicy) -> Tuple[mpf, mpf]:
    res = fn(mpc(mpf(1) / 2, t), policy)
    if abs(res.value.imag) > res.error_radius:
        raise PrecisionExhausted(
            f"completed zeta not real on the line at t={float(t)}: "
            f"Im={float(res.value.imag):.3e} > radius={float(res.error_radius):.3e}"
        )
    return res.value.real, res.error_radius


def critical_line_zeros(
    t_lo: float,
    t_hi: float,
    policy: Optional[PrecisionPolicy] = None,
    config: Optional[LabConfig] = None,
    refine: bool = True,
) -> List[ZeroRecord]:
    """Zeros of zeta on the critical line located by sign changes of h*zeta.

    Entirely independent of the winding machinery: the only ingredients are
    evaluations of the completed function and the intermediate value theorem.
    A sign change certifies at least one zero of odd multiplicity in the
    bracket; records carry multiplicity 1 (all known zeta zeros are simple,
    and an even cluster inside one grid cell would show up as a count
    mismatch against the winding route, not silently).
    """
    policy = policy or PrecisionPolicy()
    config = config or LabConfig()
    fn = fn_completed_zeta(config.eval)
    step = config.scan.line_step
    if not (t_lo < t_hi):
        raise ValueError("need t_lo < t_hi")
    n = int(math.ceil((t_hi - t_lo) / step))
    out: List[ZeroRecord] = []
    with workprec(128):
        grid = [mpf(t_lo) + (mpf(t_hi) - mpf(t_lo)) * i / n for i in range(n + 1)]
        vals = []
        for t in grid:
            v, r = _signed_line_value(fn, t, policy)
            if abs(v) <= r:
                # grid point indistinguishable from a zero: nudge it
                t = t + mpf("1e-9")
                v, r = _signed_line_value(fn, t, policy)
                if abs(v) <= r:
                    raise PrecisionExhausted(f"cannot sign h*zeta near t={float(t)}")
            vals.append((t, v))
        for (ta, va), (tb, vb) in zip(vals, vals[1:]):
            if mpmath.sign(va) == mpmath.sign(vb):
                continue
            lo_t, hi_t, lo_v = ta, tb, va
            if refine:
                while hi_t - lo_t > mpf("1e-11"):
                    mid = (lo_t + hi_t) / 2
                    vm, rm = _signed_line_value(fn, mid, policy)
                    if abs(vm) <= rm:
                        mid = mid + mpf("2e-12")
                        vm, rm = _signed_line_value(fn, mid, policy)
                        if abs(vm) <= rm:
                            break
                    if mpmath.sign(vm) == mpmath.sign(lo_v):
                        lo_t, lo_v = mid, vm
                    else:
                        hi_t = mid
            gamma = (lo_t + hi_t) / 2
            out.append(ZeroRecord(
                k=0, beta=mpf(1) / 2, gamma=gamma, multiplicity=1,
                error_radius=(hi_t - lo_t) / 2, method=METHOD_LINE,
            ))
    return out


def critical_ordinates(
    ell: int,
    t_lo: float,
    t_hi: float,
    policy: Optional[PrecisionPolicy] = None,
    config: Optional[LabConfig] = None,
    store=None,
    cache: Optional[EdgeCache] = None,
    stats: Optional[TraceStats] = None,
    refine: bool = True,
) -> OrdinateSet:
    """Ordinates t in [t_lo, t_hi] where some zeta^(j), j <= ell, vanishes at 1/2+it.

    Order 0 comes from completed-function sign changes; orders j >= 1 from
    strip scans, keeping the zeros whose certified disk intersects the
    critical line.  Ordinates closer than 1e-9 are merged and their source
    order sets united.
    """
    policy = policy or PrecisionPolicy()
    config = config or LabConfig()
    found: List[Tuple[mpf, int]] = []
    for rec in critical_line_zeros(t_lo, t_hi, policy, config, refine=refine):
        found.append((rec.gamma, 0))
    for j in range(1, ell + 1):
        records = scan_strip(j, t_hi, policy, config, store=store,
                             cache=cache, stats=stats)
        for rec in records:
            if t_lo <= float(rec.gamma) <= t_hi and rec.on_critical_line():
                found.append((rec.gamma, j))
    found.sort(key=lambda p: float(p[0]))
    ordinates: List[mpf] = []
    sources: List[set] = []
    for gamma, j in found:
        if ordinates and abs(gamma - ordinates[-1]) <= mpf("1e-9"):
            sources[-1].add(j)
            continue
        ordinates.append(gamma)
        sources.append({j})
    return OrdinateSet(
        ell=ell, t_min=float(t_lo), t_max=float(t_hi),
        ordinates=tuple(ordinates),
        sources=tuple(frozenset(s) for s in sources),
    )
