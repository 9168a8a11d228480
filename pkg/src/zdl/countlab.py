"""Zero counts, error terms, and structural diagnostics for zeta derivatives.

The central quantity is N_k(T), the number of zeros of zeta^(k) in the
counting region (zeros with ordinate up to T), together with its smooth
approximation

    main term = (T/2pi) log(T/4pi e)   for k >= 1,
    main term = (T/2pi) log(T/2pi e)   for k = 0,

and the remainder e_term = N_k(T) - main.  count() measures N_k(T) two
independent ways (boundary winding of the counting rectangle; enumeration of
certified zero records) and decomposes the boundary argument into named edge
contributions, anchored at +infinity where the normalized derivative G_k is
within 1/2 of 1 and cannot wind.

The remaining operations measure the individual ingredients that the counting
argument rests on: the argument envelope of G_l just right of the critical
line, the partial-fraction structure of G'_l/G_l, the negativity of
Re zeta^(l)/zeta^(l-1) left of the line, the one-sided zero sum F_k against
its log-derivative evaluation on the line, the dyadic box partition of the
unit neighborhood of 1/2 + iT, and the viewing-angle sum over zeros near T.
"""

from __future__ import annotations

import ast
import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .argtrace import (
    EdgeCache,
    RectRegion,
    TraceStats,
    TrackedFn,
    arg_from_plus_infinity,
    fn_norm_deriv,
    fn_zeta_deriv,
    track_arg,
    winding_number,
)
from .config import EvalConfig, LabConfig
from .errors import ConfigError, DenominatorZero, PrecisionExhausted, ZeroOnPath
from .evalcore import PrecisionPolicy, eval_ratio
from .zeroscan import ZeroRecord, critical_line_zeros, isolate_zeros, scan_strip

TWO_PI = 2.0 * math.pi

# grid on which bound profiles must be positive and increasing (the
# log/loglog quotient has a genuine shallow dip near T ~ 15, so monotonicity
# is a sampled property, not a pointwise one)
_PROFILE_GRID = (10.0, 30.0, 100.0, 300.0, 1e3, 1e4, 1e6, 1e9)


# ---------------------------------------------------------------------------
# bound profiles for |e_term| comparisons

@dataclass(frozen=True)
class BoundProfile:
    """A comparison envelope T -> phi(T) for the error term."""

    id: str
    formula: Callable[[float], float]


_PHI_FUNCS: Dict[str, Callable[[float], float]] = {
    "log": math.log,
    "loglog": lambda x: math.log(math.log(x)),
    "sqrt": math.sqrt,
    "exp": math.exp,
}

_PHI_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name, ast.Call,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd, ast.Load,
)


def _compile_phi(expr: str) -> Callable[[float], float]:
    """Compile a T-expression over {log, loglog, sqrt, exp, + - * / **}."""
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"bad profile formula {expr!r}: {exc}") from None
    for node in ast.walk(tree):
        if not isinstance(node, _PHI_NODES):
            raise ConfigError(
                f"profile formula {expr!r}: {type(node).__name__} not allowed")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ConfigError(f"profile formula {expr!r}: non-numeric constant")
        if isinstance(node, ast.Name) and node.id != "T" and node.id not in _PHI_FUNCS:
            raise ConfigError(f"profile formula {expr!r}: unknown name {node.id!r}")
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _PHI_FUNCS:
                raise ConfigError(f"profile formula {expr!r}: only "
                                  f"{sorted(_PHI_FUNCS)} may be called")
            if node.keywords:
                raise ConfigError(f"profile formula {expr!r}: no keyword arguments")
    code = compile(tree, "<profile>", "eval")

    def formula(T: float) -> float:
        env: Dict[str, object] = dict(_PHI_FUNCS)
        env["T"] = float(T)
        return float(eval(code, {"__builtins__": {}}, env))

    return formula


def bound_profile(spec: str) -> BoundProfile:
    """Build a named or custom profile and validate it on the sample grid."""
    if spec == "log":
        prof = BoundProfile("log", math.log)
    elif spec in ("loglog", "log-over-loglog"):
        prof = BoundProfile("log-over-loglog",
                            lambda T: math.log(T) / math.log(math.log(T)))
    elif spec in ("fgh", "fgh-sqrt"):
        prof = BoundProfile("fgh-sqrt",
                            lambda T: math.sqrt(math.log(T) * math.log(math.log(T))))
    elif spec.startswith("custom:"):
        prof = BoundProfile("custom", _compile_phi(spec[len("custom:"):]))
    else:
        raise ConfigError(f"unknown bound profile {spec!r}")
    vals = []
    for T in _PROFILE_GRID:
        try:
            vals.append(prof.formula(T))
        except (ValueError, OverflowError, ZeroDivisionError) as exc:
            raise ConfigError(f"profile {spec!r} undefined at T={T}: {exc}") from None
    if any(v <= 0 for v in vals) or any(b <= a for a, b in zip(vals, vals[1:])):
        raise ConfigError(
            f"profile {spec!r} must be positive and increasing on {_PROFILE_GRID}")
    return prof


def standard_profiles() -> Tuple[BoundProfile, ...]:
    return (bound_profile("log"), bound_profile("log-over-loglog"),
            bound_profile("fgh-sqrt"))


# ---------------------------------------------------------------------------
# main term and the counting report

def main_term(k: int, T: float) -> float:
    """Smooth approximation to N_k(T); vanishes at T = 4*pi*e (k >= 1)."""
    if T <= 0:
        raise ValueError("T must be positive")
    denom = 4.0 * math.pi * math.e if k >= 1 else 2.0 * math.pi * math.e
    return T / TWO_PI * math.log(T / denom)


@dataclass(frozen=True)
class CountReport:
    """N_k(T) with its decomposition along the counting rectangle.

    edge_contribs holds, in units of full turns (1/2pi radians):
    the bottom-edge and right-edge argument changes of the winding function,
    then the anchored arguments arg G_k(1/2+iT) and arg zeta(1/2+iT) from the
    top edge.  remainder = n_exact - main_term - the two top-edge terms is
    the empirically bounded constant of the counting formula.
    """

    k: int
    T: float
    n_exact: int
    main_term: float
    e_term: float
    edge_contribs: Tuple[float, float, float, float]
    bound_ratios: Dict[str, float]
    remainder: float
    t_used: float
    n_line: Optional[int] = None


def _count_fn(k: int, eval_cfg: EvalConfig) -> TrackedFn:
    # zeta itself winds correctly for k = 0; G_k has the same zeros as
    # zeta^(k) for k >= 1 and tends to 1 on the right.
    return fn_zeta_deriv(0, eval_cfg) if k == 0 else fn_norm_deriv(k, eval_cfg)


def _admissible_top(k: int, T: float, policy: PrecisionPolicy,
                    config: LabConfig, cache: Optional[EdgeCache]) -> float:
    """First height on the upward ladder whose whole top line is traceable.

    The counting formula needs both the winding function and zeta itself
    free of zeros on the top edge; the traces performed here stay in the
    cache and are reused by the winding and the anchored arguments.
    """
    s_l, s_r = config.scan.sigma_left, config.eval.sigma_k
    wfn = _count_fn(k, config.eval)
    zfn = fn_zeta_deriv(0, config.eval)
    last: Optional[ZeroOnPath] = None
    for j in range(12):
        t = T + j * 1e-6
        try:
            track_arg(wfn, [complex(s_r, t), complex(0.5, t)], policy, cache)
            track_arg(wfn, [complex(0.5, t), complex(s_l, t)], policy, cache)
            if k >= 1:
                track_arg(zfn, [complex(s_r, t), complex(0.5, t)], policy, cache)
            return t
        except ZeroOnPath as exc:
            last = exc
    raise PrecisionExhausted(f"no admissible counting height near T = {T}: {last}")


def count(
    k: int,
    T: float,
    policy: Optional[PrecisionPolicy] = None,
    config: Optional[LabConfig] = None,
    store=None,
    cache: Optional[EdgeCache] = None,
    stats: Optional[TraceStats] = None,
    profiles: Optional[Sequence[BoundProfile]] = None,
    line_check: bool = False,
) -> CountReport:
    """Count zeros of zeta^(k) up to height T, twice, and decompose the answer.

    Route one encloses the whole counting rectangle in a single boundary
    winding; route two enumerates certified zero records (slab scan, store
    backed when one is attached).  The two integers are asserted equal.
    With line_check (k = 0 only) a third, winding-free route counts critical
    line sign changes of the completed function and is asserted to agree.
    """
    policy = policy or PrecisionPolicy()
    config = config or LabConfig()
    profiles = tuple(profiles) if profiles is not None else standard_profiles()
    if cache is None:
        cache = EdgeCache()
    eval_cfg = config.eval
    s_l, s_r = config.scan.sigma_left, eval_cfg.sigma_k
    t_floor = config.scan.t_floor
    if not (t_floor < T <= config.scan.t_max):
        raise ValueError(f"T must lie in ({t_floor}, {config.scan.t_max}]")

    t_top = _admissible_top(k, T, policy, config, cache)
    wfn = _count_fn(k, eval_cfg)

    # anchored top-edge arguments (the far segments are already cached)
    if k >= 1:
        ag = arg_from_plus_infinity(wfn, complex(0.5, t_top), policy,
                                    far_sigma=s_r, cache=cache).value
    else:
        ag = 0.0
    az = arg_from_plus_infinity(fn_zeta_deriv(0, eval_cfg), complex(0.5, t_top),
                                policy, far_sigma=s_r, cache=cache).value

    # per-edge argument changes, then the full (cache-fed) winding
    bl, br = complex(s_l, t_floor), complex(s_r, t_floor)
    tr, tl = complex(s_r, t_top), complex(s_l, t_top)
    p_bottom = track_arg(wfn, [bl, br], policy, cache)
    p_right = track_arg(wfn, [br, tr], policy, cache)
    track_arg(wfn, [tl, bl], policy, cache)
    rect = RectRegion(s_l, s_r, t_floor, t_top)
    rep = winding_number(wfn, rect, policy, cache=cache, stats=stats,
                         perturb=False, cut_points={"top": [0.5]})

    records = scan_strip(k, t_top, policy, config, store=store,
                         cache=cache, stats=stats)
    n_enum = sum(r.multiplicity for r in records)
    assert n_enum == rep.count, (
        f"enumeration ({n_enum}) != winding ({rep.count}) for k={k}, T={T}")

    n_line: Optional[int] = None
    if line_check:
        if k != 0:
            raise ValueError("line_check applies to k = 0 only")
        n_line = len(critical_line_zeros(t_floor, t_top, policy, config))
        assert n_line == rep.count, (
            f"line sign changes ({n_line}) != winding ({rep.count}) at T={T}")

    mt = main_term(k, T)
    e_term = rep.count - mt
    remainder = rep.count - mt - ag / TWO_PI - az / TWO_PI
    ratios = {p.id: abs(e_term) / p.formula(T) for p in profiles}
    return CountReport(
        k=k, T=T, n_exact=rep.count, main_term=mt, e_term=e_term,
        edge_contribs=(p_bottom.total_delta / TWO_PI, p_right.total_delta / TWO_PI,
                       ag / TWO_PI, az / TWO_PI),
        bound_ratios=ratios, remainder=remainder, t_used=t_top, n_line=n_line,
    )


# ---------------------------------------------------------------------------
# argument envelope right of the critical line

@dataclass(frozen=True)
class ArgSample:
    sigma: float
    value: float
    envelope: float
    ratio: float


def arg_profile(
    ell: int,
    T: float,
    sigmas: Sequence[float],
    policy: Optional[PrecisionPolicy] = None,
    config: Optional[LabConfig] = None,
    profile: Optional[BoundProfile] = None,
    cache: Optional[EdgeCache] = None,
) -> List[ArgSample]:
    """arg G_ell(sigma + iT) against the envelope phi(T) + loglog T/(sigma-1/2).

    The argument is anchored at +infinity; the envelope blows up as sigma
    approaches the critical line, mirroring how much winding can accumulate
    on the way in from the far field.
    """
    policy = policy or PrecisionPolicy()
    config = config or LabConfig()
    profile = profile or bound_profile("log")
    if T < 10.0:
        raise ValueError("T must be at least 10")
    far = config.eval.sigma_k
    out: List[ArgSample] = []
    for sigma in sigmas:
        if not 0.5 < sigma <= far:
            raise ValueError(f"sigma must lie in (1/2, {far}]")
        if sigma == far:
            anchored = arg_from_plus_infinity(
                fn_norm_deriv(ell, config.eval), complex(sigma - 1e-9, T),
                policy, far_sigma=far, cache=cache)
        else:
            anchored = arg_from_plus_infinity(
                fn_norm_deriv(ell, config.eval), complex(sigma, T),
                policy, far_sigma=far, cache=cache)
        env = profile.formula(T) + math.log(math.log(T)) / (sigma - 0.5)
        out.append(ArgSample(sigma=float(sigma), value=anchored.value,
                             envelope=env, ratio=abs(anchored.value) / env))
    return out


# ---------------------------------------------------------------------------
# partial-fraction residual of G'_l/G_l near the line

@dataclass(frozen=True)
class PartialFractionReport:
    s: complex
    log_deriv: complex          # G'_k/G_k(s) = log 2 + zeta^(k+1)/zeta^(k)(s)
    zero_sum: complex           # sum of mult/(s - rho) over |gamma - t| < 1
    n_zeros: int
    residual: float             # |log_deriv - zero_sum| / log t


def lemma23_residual(
    k: int,
    s,
    zeros: Sequence[ZeroRecord],
    policy: Optional[PrecisionPolicy] = None,
    eval_cfg: Optional[EvalConfig] = None,
) -> PartialFractionReport:
    """Distance of G'_k/G_k(s) from its local zero sum, normalized by log t.

    The log-derivative is log 2 + zeta^(k+1)/zeta^(k); subtracting the simple
    poles contributed by zeros within unit ordinate distance should leave a
    remainder of size O(log t) for 1/2 <= sigma <= 1, so the normalized
    residual is the empirical constant of that statement.
    """
    policy = policy or PrecisionPolicy()
    eval_cfg = eval_cfg or EvalConfig()
    sc = complex(s)
    if not 0.5 <= sc.real <= 1.0:
        raise ValueError("sigma must lie in [1/2, 1]")
    if sc.imag <= 2.0:
        raise ValueError("t must exceed 2")
    ratio = eval_ratio(sc, k + 1, policy, eval_cfg)
    log_deriv = math.log(2.0) + complex(ratio.value)
    zsum = 0j
    n = 0
    for rec in zeros:
        if rec.k != k or abs(float(rec.gamma) - sc.imag) >= 1.0:
            continue
        zsum += rec.multiplicity / (sc - complex(float(rec.beta), float(rec.gamma)))
        n += rec.multiplicity
    residual = abs(log_deriv - zsum) / math.log(sc.imag)
    return PartialFractionReport(s=sc, log_deriv=log_deriv, zero_sum=zsum,
                                 n_zeros=n, residual=residual)


# ---------------------------------------------------------------------------
# negativity of Re zeta^(l)/zeta^(l-1) on and left of the critical line

@dataclass(frozen=True)
class SignSample:
    sigma: float
    t: float
    real_part: Optional[float]  # None when skipped
    status: str                 # "negative" | "nonnegative" | "skipped"


@dataclass(frozen=True)
class SignScanReport:
    ell: int
    samples: Tuple[SignSample, ...]
    n_negative: int
    n_nonnegative: int
    n_skipped: int

    def nonnegative_points(self) -> List[SignSample]:
        return [p for p in self.samples if p.status == "nonnegative"]


def lemma4_scan(
    ell: int,
    sigma_grid: Sequence[float],
    t_grid: Sequence[float],
    policy: Optional[PrecisionPolicy] = None,
    eval_cfg: Optional[EvalConfig] = None,
) -> SignScanReport:
    """Certified sign of Re zeta^(ell)/zeta^(ell-1) over a (sigma, t) grid.

    Negative is claimed only when the certified interval lies strictly left
    of zero.  Grid points whose denominator disk contains zero are skipped
    and recorded rather than guessed.
    """
    policy = policy or PrecisionPolicy()
    eval_cfg = eval_cfg or EvalConfig()
    for sigma in sigma_grid:
        if not 0.0 < sigma <= 0.5:
            raise ValueError("sigma grid must lie in (0, 1/2]")
    samples: List[SignSample] = []
    n_neg = n_non = n_skip = 0
    for t in t_grid:
        for sigma in sigma_grid:
            try:
                res = eval_ratio(complex(sigma, t), ell, policy, eval_cfg)
            except DenominatorZero:
                samples.append(SignSample(sigma, t, None, "skipped"))
                n_skip += 1
                continue
            re = float(res.value.real)
            certified_neg = re + float(res.error_radius) < 0.0
            status = "negative" if certified_neg else "nonnegative"
            samples.append(SignSample(sigma, t, re, status))
            if certified_neg:
                n_neg += 1
            else:
                n_non += 1
    return SignScanReport(ell=ell, samples=tuple(samples), n_negative=n_neg,
                          n_nonnegative=n_non, n_skipped=n_skip)


# ---------------------------------------------------------------------------
# the one-sided zero sum F_k on the critical line

@dataclass(frozen=True)
class FSumReport:
    k: int
    t: float
    window: float
    value: float                # truncated sum over beta > 1/2, |gamma-t| <= window
    n_terms: int
    comparison: float           # -Re zeta^(k+1)/zeta^(k)(1/2+it) - (1/2)log(t/2pi)
    difference: float           # value - comparison
    tail_bound: float           # crude density bound on the discarded tail


def f_sum(
    k: int,
    t: float,
    zeros: Sequence[ZeroRecord],
    window: float = 50.0,
    policy: Optional[PrecisionPolicy] = None,
    eval_cfg: Optional[EvalConfig] = None,
) -> FSumReport:
    """Truncated F_k(t) = sum (beta-1/2)/((beta-1/2)^2 + (gamma-t)^2).

    Summands come from enumerated zeros of zeta^(k) with beta > 1/2 and
    |gamma - t| <= window; every summand is nonnegative, so the value is
    monotone nondecreasing in the window.  The comparison column evaluates
    -Re zeta^(k+1)/zeta^(k)(1/2 + it) - (1/2) log(t/2pi); their difference
    is the empirically bounded constant of the log-derivative identity.

    The discarded tail is estimated by a generous density argument: at most
    (1/pi) log((t+u)/2pi) zeros per unit ordinate at distance u, each with
    beta - 1/2 <= 8, giving tail <= 16 (log((t+W)/2pi) + 1) / (pi W).
    """
    policy = policy or PrecisionPolicy()
    eval_cfg = eval_cfg or EvalConfig()
    if t <= 2.0 or window <= 0:
        raise ValueError("need t > 2 and a positive window")
    value = 0.0
    n = 0
    for rec in zeros:
        if rec.k != k:
            continue
        beta, gamma = float(rec.beta), float(rec.gamma)
        if beta <= 0.5 or abs(gamma - t) > window:
            continue
        x = beta - 0.5
        value += rec.multiplicity * x / (x * x + (gamma - t) ** 2)
        n += rec.multiplicity
    ratio = eval_ratio(complex(0.5, t), k + 1, policy, eval_cfg)
    comparison = -float(ratio.value.real) - 0.5 * math.log(t / TWO_PI)
    tail = 16.0 * (math.log((t + window) / TWO_PI) + 1.0) / (math.pi * window)
    return FSumReport(k=k, t=t, window=window, value=value, n_terms=n,
                      comparison=comparison, difference=value - comparison,
                      tail_bound=tail)


# ---------------------------------------------------------------------------
# dyadic boxes around 1/2 + iT

@dataclass(frozen=True)
class BoxRegion:
    """R_j: the j-th dyadic shell, outer box minus the previous closed box."""

    j: int
    y: float                                   # Y_j = 2^j X
    outer: Tuple[float, float, float, float]   # sigma_lo, sigma_hi, t_lo, t_hi
    inner: Optional[Tuple[float, float, float, float]]

    def contains(self, beta: float, gamma: float) -> bool:
        s_lo, s_hi, t_lo, t_hi = self.outer
        if not (s_lo <= beta <= s_hi and t_lo <= gamma <= t_hi):
            return False
        if self.inner is not None:
            i_lo, i_hi, it_lo, it_hi = self.inner
            if i_lo <= beta <= i_hi and it_lo <= gamma <= it_hi:
                return False
        return True


@dataclass(frozen=True)
class BoxPartition:
    """Dyadic shells R_1..R_N tiling D(T) = [1/2, sigma_right] x [T-1, T+1].

    X = (log T)^(-1/2), Y_j = 2^j X, and N is minimal with 2^N X >= 1.  The
    j-th closed box is [1/2, 1/2+Y_j] x [T-Y_j, T+Y_j], clipped to D; the
    outermost shell extends to sigma_right so the union is exactly D.  Every
    point of D belongs to the shell of minimal j whose box contains it.
    """

    T: float
    X: float
    n_boxes: int
    sigma_right: float
    boxes: Tuple[BoxRegion, ...]

    def locate(self, beta: float, gamma: float) -> Optional[int]:
        for box in self.boxes:
            if box.contains(beta, gamma):
                return box.j
        return None


def box_partition(T: float, sigma_right: float = 30.0) -> BoxPartition:
    if T < 100.0:
        raise ValueError("T must be at least 100")
    X = 1.0 / math.sqrt(math.log(T))
    n = 1
    while 2 ** n * X < 1.0:
        n += 1
    boxes: List[BoxRegion] = []
    prev: Optional[Tuple[float, float, float, float]] = None
    for j in range(1, n + 1):
        y = 2 ** j * X
        s_hi = sigma_right if j == n else 0.5 + y
        outer = (0.5, s_hi, max(T - y, T - 1.0), min(T + y, T + 1.0))
        boxes.append(BoxRegion(j=j, y=y, outer=outer, inner=prev))
        prev = outer
    return BoxPartition(T=T, X=X, n_boxes=n, sigma_right=sigma_right,
                        boxes=tuple(boxes))


@dataclass(frozen=True)
class BoxCountReport:
    k: int
    partition: BoxPartition
    per_box: Tuple[Tuple[int, int, float], ...]   # (j, count, envelope)
    total: int
    zeros: Tuple[ZeroRecord, ...]


def box_counts(
    k: int,
    partition: BoxPartition,
    policy: Optional[PrecisionPolicy] = None,
    config: Optional[LabConfig] = None,
    cache: Optional[EdgeCache] = None,
    stats: Optional[TraceStats] = None,
    zeros: Optional[Sequence[ZeroRecord]] = None,
    profile: Optional[BoundProfile] = None,
) -> BoxCountReport:
    """Zeros of zeta^(k) per dyadic shell, with the envelope Y_j log T + phi(2T).

    Zeros are enumerated once over a hair more than D(T) and assigned to the
    shell of minimal j; the per-shell sum is asserted to equal the total, so
    the tiling is exercised on every run.
    """
    policy = policy or PrecisionPolicy()
    config = config or LabConfig()
    profile = profile or bound_profile("log")
    T = partition.T
    if zeros is None:
        pad = 1e-4
        rect = RectRegion(0.5 - pad, partition.sigma_right,
                          T - 1.0 - pad, T + 1.0 + pad)
        zeros = isolate_zeros(k, rect, policy, config.eval, cache, stats)
    members = [r for r in zeros
               if float(r.beta) >= 0.5 and abs(float(r.gamma) - T) <= 1.0]
    counts = {box.j: 0 for box in partition.boxes}
    for rec in members:
        j = partition.locate(float(rec.beta), float(rec.gamma))
        assert j is not None, f"zero {rec} escaped the partition of D({T})"
        counts[j] += rec.multiplicity
    total = sum(r.multiplicity for r in members)
    assert sum(counts.values()) == total
    per_box = tuple(
        (box.j, counts[box.j], box.y * math.log(T) + profile.formula(2.0 * T))
        for box in partition.boxes)
    return BoxCountReport(k=k, partition=partition, per_box=per_box,
                          total=total, zeros=tuple(zeros))


# ---------------------------------------------------------------------------
# viewing-angle sums

def theta_angle(a: complex, b: complex, c: complex) -> float:
    """The positive angle at a subtended by b and c, in (0, pi]."""
    if a == b or a == c:
        raise ValueError("angle vertex coincides with a ray endpoint")
    return abs(cmath.phase((b - a) / (c - a)))


@dataclass(frozen=True)
class ThetaReport:
    k: int
    T: float
    X: float
    theta_total: float          # sum of viewing angles over |gamma - T| < 1
    n_zeros: int
    x_log_t: float              # the X log T companion term
    delta_abs: float            # |arg G_k(1/2+iT) - arg G_k(1/2+X+iT)|


def theta_sum(
    k: int,
    T: float,
    X: float,
    zeros: Sequence[ZeroRecord],
    policy: Optional[PrecisionPolicy] = None,
    config: Optional[LabConfig] = None,
    cache: Optional[EdgeCache] = None,
) -> ThetaReport:
    """Angle sum at zeros near height T viewed from the segment endpoints.

    Each enumerated zero rho of zeta^(k) with |gamma - T| < 1 contributes the
    angle at rho subtended by 1/2 + iT and 1/2 + X + iT.  The report pairs
    the sum (plus the X log T term) with the anchored argument difference of
    G_k between the two endpoints, which the sum dominates.
    """
    policy = policy or PrecisionPolicy()
    config = config or LabConfig()
    if not (0.0 < X < 1.0):
        raise ValueError("X must lie in (0, 1)")
    b = complex(0.5, T)
    c = complex(0.5 + X, T)
    total = 0.0
    n = 0
    for rec in zeros:
        if rec.k != k or abs(float(rec.gamma) - T) >= 1.0:
            continue
        total += rec.multiplicity * theta_angle(
            complex(float(rec.beta), float(rec.gamma)), b, c)
        n += rec.multiplicity
    fn = _count_fn(k, config.eval)
    far = config.eval.sigma_k
    a1 = arg_from_plus_infinity(fn, b, policy, far_sigma=far, cache=cache)
    a2 = arg_from_plus_infinity(fn, c, policy, far_sigma=far, cache=cache)
    return ThetaReport(k=k, T=T, X=X, theta_total=total, n_zeros=n,
                       x_log_t=X * math.log(T), delta_abs=abs(a1.value - a2.value))
