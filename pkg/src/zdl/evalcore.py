"""Certified extended-precision evaluation of zeta derivatives.

All quantities downstream (argument tracking, winding numbers, zero
isolation, counting) reduce to evaluating

    zeta^(k)(s),   k = 0..K,

with a rigorous absolute error radius.  The workhorse is Euler-Maclaurin
summation differentiated k times under the sum:

    zeta(s) = sum_{n<N} n^-s + N^(1-s)/(s-1) + N^-s/2
              + sum_{j=1}^{M} B_{2j}/(2j)! (s)_{2j-1} N^(-s-2j+1) + R_M(s,N)

where (s)_{2j-1} = s(s+1)...(s+2j-2) and, by Backlund's classical estimate,

    |R_M(s,N)| <= |(s+2M+1)/(sigma+2M+1)| * |B_{2M+2}/(2M+2)! (s)_{2M+1} N^(-s-2M-1)|

valid for sigma > -(2M+1).  Every piece of the formula is a polynomial in
(-log n)^j times an exponential in s, so the k-th derivative is obtained
exactly by the product rule; only R_M needs care.  R_M is entire (the pole
of zeta at s=1 cancels against the N^(1-s)/(s-1) term), so its k-th
derivative is bounded through the Cauchy integral on the circle |w-s| = 1:

    |d^k R_M(s)| <= k! * max_{|w-s|=1} |R_M(w,N)|

and the Backlund estimate is monotone enough in Re w and |w| to bound the
maximum by substituting sigma-1 for sigma and |s|+1 for |s|.  Truncation
and a conservative rounding model (operation count times the largest
partial-sum magnitude times 2^(2-prec)) add up to the published radius;
working precision is raised and N, M adapted until the radius beats the
requested output accuracy.

Deep in the right half-plane the Bernoulli tail is unnecessary: a direct
Dirichlet partial sum with the integral tail bound

    sum_{n>N} (log n)^k n^-sigma <= (log N)^k N^(1-sigma)/(sigma-1)
                                    * (1 - k/((sigma-1) log N))^-1

is cheaper and is used when sigma >= 12.

Evaluation cost is dominated by the powers n^-s.  These are built once per
point: a true complex exponential for each prime n, a single complex
multiplication for each composite (via a smallest-prime-factor sieve), with
log n and (-log n)^k cached as high-precision reals across calls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from hashlib import sha256
from typing import Dict, Iterable, Optional, Sequence, Tuple

import mpmath
from mpmath import mp, mpc, mpf, workprec

from .config import EvalConfig
from .errors import (
    ConfigError,
    DenominatorZero,
    GammaPole,
    PoleProximity,
    PrecisionExhausted,
)

KERNEL_VERSION = "em-kernel-1"

_CACHE_PREC = 768        # precision of shared log/Bernoulli caches; also caps working precision
_WB_CAP = 700
_N_CAP = 200_000         # Euler-Maclaurin main-sum length cap
_M_CAP = 96              # Bernoulli correction cap
_DIRECT_SIGMA = 12.0     # direct Dirichlet summation to the right of this abscissa
_DIRECT_NS = (16, 24, 32, 48, 64, 96, 128, 192, 256)
_LN2 = None              # lazily built mpf(log 2) at cache precision


# ---------------------------------------------------------------------------
# public value types


@dataclass(frozen=True)
class CPoint:
    """A point of the complex plane carrying its own precision tag.

    re/im are mpmath reals created at `precision_bits`; the tag documents
    how many bits of the coordinates are meaningful when points are handed
    between modules or serialized.
    """

    re: mpf
    im: mpf
    precision_bits: int = 113

    def __post_init__(self):
        if self.precision_bits < 53:
            raise ConfigError("CPoint precision_bits must be >= 53")
        if not (mpmath.isfinite(self.re) and mpmath.isfinite(self.im)):
            raise ConfigError("CPoint coordinates must be finite")

    @classmethod
    def make(cls, re, im, precision_bits: int = 113) -> "CPoint":
        with workprec(precision_bits):
            return cls(mpf(re), mpf(im), precision_bits)

    def as_mpc(self) -> mpc:
        return mpc(self.re, self.im)


@dataclass(frozen=True)
class EvalResult:
    """A certified complex value: |true - value| <= error_radius."""

    value: mpc
    error_radius: mpf
    precision_bits: int
    terms_used: int

    def abs_lower(self) -> mpf:
        """Certified lower bound on |true value| (may be negative if uninformative)."""
        return abs(self.value) - self.error_radius


@dataclass(frozen=True)
class PrecisionPolicy:
    """How much accuracy to demand and how many guard bits to carry.

    The certified radius target is absolute: 2^-output_bits.  Working
    precision grows with the height of the evaluation point, since both the
    magnitude spread inside Euler-Maclaurin and the Cauchy circle factor
    scale with |t|.
    """

    output_bits: int = 64
    guard_bits_base: int = 32
    guard_bits_per_log_t: float = 8.0

    def __post_init__(self):
        if self.output_bits < 24:
            raise ConfigError("output_bits must be >= 24")
        if self.guard_bits_base < 0 or self.guard_bits_per_log_t < 0:
            raise ConfigError("guard bits must be nonnegative")

    def working_bits(self, t_abs: float) -> int:
        extra = math.ceil(self.guard_bits_per_log_t * math.log(2.0 + abs(t_abs)))
        return int(self.output_bits + self.guard_bits_base + extra)

    def target_radius_log2(self) -> int:
        return -self.output_bits

    def with_output_bits(self, output_bits: int) -> "PrecisionPolicy":
        return PrecisionPolicy(output_bits, self.guard_bits_base, self.guard_bits_per_log_t)

    def fingerprint(self) -> str:
        blob = f"{KERNEL_VERSION}|{self.output_bits}|{self.guard_bits_base}|{self.guard_bits_per_log_t}"
        return sha256(blob.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# shared caches (append-only; all entries at _CACHE_PREC bits)

_spf: list = [0, 1]           # smallest prime factor, index n
_ln: list = [None, None]      # ln n
_lnk: Dict[int, list] = {}    # k -> [(-ln n)^k]
_bern_ratio: list = [None]    # j -> B_{2j}/(2j)!  (mpf)
_bern_ratio_l2: list = [0.0]  # j -> log2 |B_{2j}/(2j)!|
_bern_over_2j: list = [None]  # j -> B_{2j}/(2j)   (digamma series)
_bern_over_2j_l2: list = [0.0]


def _ensure_sieve(n: int) -> None:
    if n < len(_spf):
        return
    size = max(n + 1, 2 * len(_spf), 4096)
    spf = list(range(size))
    for p in range(2, int(size ** 0.5) + 1):
        if spf[p] == p:
            for q in range(p * p, size, p):
                if spf[q] == q:
                    spf[q] = p
    _spf[:] = spf


def _ensure_logs(n: int) -> None:
    if n < len(_ln):
        return
    with workprec(_CACHE_PREC):
        for m in range(len(_ln), max(n + 1, len(_ln) + 256)):
            _ln.append(mpmath.ln(m))


def _ensure_lnk(k: int, n: int) -> None:
    _ensure_logs(n)
    col = _lnk.setdefault(k, [None, mpf(1) if k == 0 else mpf(0)])
    if n < len(col):
        return
    with workprec(_CACHE_PREC):
        for m in range(len(col), len(_ln)):
            col.append((-_ln[m]) ** k)


def _ensure_bern(jmax: int) -> None:
    if jmax < len(_bern_ratio):
        return
    with workprec(_CACHE_PREC):
        for j in range(len(_bern_ratio), jmax + 1):
            b = mpmath.bernoulli(2 * j)
            _bern_ratio.append(b / mpmath.factorial(2 * j))
            _bern_ratio_l2.append(float(mpmath.log(abs(_bern_ratio[j]), 2)))
            _bern_over_2j.append(b / (2 * j))
            _bern_over_2j_l2.append(float(mpmath.log(abs(_bern_over_2j[j]), 2)))


def _ln2() -> mpf:
    global _LN2
    if _LN2 is None:
        with workprec(_CACHE_PREC):
            _LN2 = mpmath.ln(2)
    return _LN2


def as_mpc(point) -> mpc:
    """Accept CPoint, mpc, complex, or real-like; return an mpc."""
    if isinstance(point, CPoint):
        return point.as_mpc()
    if isinstance(point, mpc):
        return point
    if isinstance(point, complex):
        return mpc(point.real, point.imag)
    return mpc(point)


def _pow2(l2: float) -> mpf:
    """An mpf upper bound 2^ceil(l2), safe for very large negative exponents."""
    return mpmath.ldexp(1, int(math.ceil(l2)))


# ---------------------------------------------------------------------------
# Euler-Maclaurin kernel

class _NeedBits(Exception):
    """Internal: rounding floor sits above the target; retry with more precision."""

    def __init__(self, deficit: int):
        self.deficit = deficit


def _fact_l2(k: int) -> float:
    return math.lgamma(k + 1) / math.log(2.0)


def _powers(N: int, s: mpc) -> list:
    """pw[n] = n^-s for 1 <= n < N: exp only at primes, one mul at composites."""
    _ensure_sieve(N)
    _ensure_logs(N)
    pw = [None] * N
    pw[1] = mpc(1, 0)
    for n in range(2, N):
        p = _spf[n]
        if p == n:
            pw[n] = mpmath.exp(-s * _ln[n])
        else:
            pw[n] = pw[p] * pw[n // p]
    return pw


def _rounding_l2(ops: int, mag_l2: float, wb: int) -> float:
    return math.log2(max(ops, 2)) + mag_l2 + 2.0 - wb


def _em_mag_l2(N: int, sigma: float, k: int, s_abs: float, dist_pole: float) -> float:
    """log2 bound on the largest intermediate magnitude in the EM formula."""
    lnN = math.log(N)
    sum_l2 = k * math.log2(lnN + 1.0) + max(0.0, 1.0 - sigma) * math.log2(N)
    if abs(sigma - 1.0) > 1e-9:
        sum_l2 += math.log2(1.0 + min(float(N), lnN + 1.0 / abs(sigma - 1.0)))
    else:
        sum_l2 += math.log2(1.0 + lnN)
    pole_l2 = (
        _fact_l2(k + 1)
        + max(0.0, 1.0 - sigma) * math.log2(N)
        + (k + 1) * math.log2(1.0 / min(dist_pole, 1.0))
        + k * math.log2(lnN + 1.0)
    )
    return max(sum_l2, pole_l2) + 2.0


def _em_attempt(s: mpc, orders: Tuple[int, ...], wb: int, tgt_l2: float, N: int):
    """One Euler-Maclaurin pass at fixed N.  Returns (values, tail_l2) or None
    if the Bernoulli tail stalls above target (caller should enlarge N)."""
    kmax = max(orders)
    sigma = float(s.real)
    t_abs = abs(float(s.imag))
    s_abs = math.hypot(sigma, t_abs)
    dist_pole = abs(complex(sigma - 1.0, t_abs))

    # rounding floor pre-check: no point summing if precision cannot reach target
    worst_mag = max(_em_mag_l2(N, sigma, k, s_abs, dist_pole) for k in orders)
    ops_est = N * (len(orders) + 2) + 3000
    floor = _rounding_l2(ops_est, worst_mag, wb)
    if floor > tgt_l2 - 1.0:
        raise _NeedBits(int(math.ceil(floor - (tgt_l2 - 1.0))) + 16)

    _ensure_bern(_M_CAP + 2)
    for k in range(kmax + 1):
        _ensure_lnk(k, N)

    pw = _powers(N, s)

    vals: Dict[int, mpc] = {}
    for k in orders:
        col = _lnk[k]
        acc = mpc(0, 0)
        for n in range(1, N):
            acc += pw[n] * col[n]
        vals[k] = acc

    lnN = _ln[N]
    pwN = mpmath.exp(-s * lnN)
    pN = pwN * N
    inv = 1 / (s - 1)
    nlp = [mpf(1)]
    for _ in range(kmax):
        nlp.append(nlp[-1] * (-lnN))
    ipow = [inv]
    for _ in range(kmax):
        ipow.append(ipow[-1] * inv)
    for k in orders:
        pole = mpc(0, 0)
        for j in range(k + 1):
            c = math.comb(k, j) * math.factorial(k - j) * ((-1) ** (k - j))
            pole += c * nlp[j] * ipow[k - j]
        vals[k] += pN * pole + mpf("0.5") * nlp[k] * pwN

    # Bernoulli corrections with running Backlund/Cauchy tail bound
    a = [mpc(0, 0)] * (kmax + 1)
    a[0] = s
    if kmax >= 1:
        a[1] = mpc(1, 0)
    P = pwN / N
    lg2N = math.log2(N)
    run0 = math.log2(s_abs) if s_abs > 0 else 0.0   # sum log2(|s|+i), i=0..2j as j grows
    run1 = math.log2(s_abs + 1.0)
    need_circle = kmax >= 1
    best = math.inf
    stall = 0
    tails: Optional[Dict[int, float]] = None
    M_used = 0

    for j in range(1, _M_CAP + 1):
        coef = _bern_ratio[j]
        b = [a[m] * P for m in range(kmax + 1)]
        for k in orders:
            acc = mpc(0, 0)
            for m in range(k + 1):
                c = math.comb(k, m)
                term = b[m] * nlp[k - m]
                acc += term if c == 1 else c * term
            vals[k] += coef * acc
        # advance A-vector to (s)_{2(j+1)-1} derivatives: multiply by (s+2j-1)(s+2j)
        q = (s + (2 * j - 1)) * (s + 2 * j)
        q1 = 2 * s + (4 * j - 1)
        for m in range(kmax, -1, -1):
            new = a[m] * q
            if m >= 1:
                new += m * a[m - 1] * q1
            if m >= 2:
                new += m * (m - 1) * a[m - 2]
            a[m] = new
        P = P / (N * N)
        run0 += math.log2(s_abs + 2 * j - 1) + math.log2(s_abs + 2 * j)
        run1 += math.log2(s_abs + 2 * j) + math.log2(s_abs + 2 * j + 1)
        M_used = j

        # Backlund bound for stopping at M=j (next index j+1), per requested order
        cand: Dict[int, float] = {}
        for k in orders:
            if k == 0:
                num = s_abs + 2 * j + 1
                den = sigma + 2 * j + 1
                if den <= 0:
                    cand[0] = math.inf
                    continue
                cand[0] = (
                    _bern_ratio_l2[j + 1] + run0
                    - (sigma + 2 * j + 1) * lg2N
                    + math.log2(num) - math.log2(den)
                )
            else:
                if not need_circle:
                    continue
                den = (sigma - 1.0) + 2 * j + 1
                if den <= 0:
                    cand[k] = math.inf
                    continue
                cand[k] = (
                    _fact_l2(k)
                    + _bern_ratio_l2[j + 1] + run1
                    - ((sigma - 1.0) + 2 * j + 1) * lg2N
                    + math.log2(s_abs + 1 + 2 * j + 1) - math.log2(den)
                )
        worst = max(cand.values())
        if worst <= tgt_l2 - 1.5:
            tails = cand
            break
        if worst < best - 0.5:
            best = worst
            stall = 0
        else:
            stall += 1
            if stall >= 4 and j >= 8:
                return None  # asymptotic turn reached; need larger N
    if tails is None:
        return None

    ops = N * (len(orders) + 2) + M_used * (kmax + 6) * 3 + 3000
    radii: Dict[int, mpf] = {}
    for k in orders:
        mag = _em_mag_l2(N, sigma, k, s_abs, dist_pole)
        radii[k] = _pow2(tails[k]) + _pow2(_rounding_l2(ops, mag, wb))
    return vals, radii, N + M_used


def _direct_attempt(s: mpc, orders: Tuple[int, ...], wb: int, tgt_l2: float):
    """Plain Dirichlet partial sum; only sound (and only tried) for sigma >= _DIRECT_SIGMA."""
    sigma = float(s.real)
    kmax = max(orders)
    chosen = None
    for N in _DIRECT_NS:
        lnN = math.log(N)
        if (sigma - 1.0) * lnN <= 2.0 * max(kmax, 1):
            continue
        worst = -math.inf
        for k in orders:
            geom = 1.0 - k / ((sigma - 1.0) * lnN)
            tl2 = (
                k * math.log2(lnN)
                + (1.0 - sigma) * math.log2(N)
                - math.log2(sigma - 1.0)
                - math.log2(geom)
            )
            worst = max(worst, tl2)
        if worst <= tgt_l2 - 1.5:
            chosen = (N, worst)
            break
    if chosen is None:
        return None
    N, tail_l2 = chosen
    mag_l2 = kmax * math.log2(math.log(N) + 1.0) + 1.0
    floor = _rounding_l2(4 * N, mag_l2, wb)
    if floor > tgt_l2 - 1.0:
        raise _NeedBits(int(math.ceil(floor - (tgt_l2 - 1.0))) + 16)
    for k in range(kmax + 1):
        _ensure_lnk(k, N + 1)
    pw = _powers(N + 1, s)
    vals: Dict[int, mpc] = {}
    for k in orders:
        col = _lnk[k]
        acc = mpc(0, 0)
        for n in range(1, N + 1):
            acc += pw[n] * col[n]
        vals[k] = acc
    radius = _pow2(tail_l2) + _pow2(_rounding_l2(4 * N, mag_l2, wb))
    return vals, {k: radius for k in orders}, N


def zeta_derivs(
    point,
    orders: Iterable[int],
    policy: Optional[PrecisionPolicy] = None,
    eval_cfg: Optional[EvalConfig] = None,
) -> Dict[int, EvalResult]:
    """Evaluate zeta^(k) for each requested order with certified radii.

    Negative-imaginary points are evaluated at the conjugate and reflected,
    which makes conjugation symmetry exact by construction.  Raises
    PoleProximity inside the configured guard disk around s=1 and
    PrecisionExhausted when resource caps prevent reaching the target.
    """
    policy = policy or PrecisionPolicy()
    cfg = eval_cfg or EvalConfig()
    orders = tuple(sorted(set(int(k) for k in orders)))
    if not orders or orders[0] < 0:
        raise ConfigError("derivative orders must be nonnegative")
    if orders[-1] > cfg.k_max + 1:
        raise ConfigError(f"order {orders[-1]} exceeds k_max+1 = {cfg.k_max + 1}")
    s0 = as_mpc(point)
    conj = s0.imag < 0
    s = mpmath.conj(s0) if conj else s0

    dist = abs(complex(float(s.real) - 1.0, float(s.imag)))
    if dist <= cfg.pole_guard:
        raise PoleProximity(f"|s-1| = {dist:.3e} <= pole guard {cfg.pole_guard}")

    t_abs = abs(float(s.imag))
    wb = policy.working_bits(t_abs)
    if dist < 0.5:
        # derivatives blow up like (k+1)! / |s-1|^(k+2); pre-pay the bits
        wb += int((orders[-1] + 2) * math.log2(1.0 / dist)) + 8
    tgt_l2 = float(policy.target_radius_log2())
    target = mpmath.ldexp(1, policy.target_radius_log2())

    sigma = float(s.real)
    for _ in range(10):
        if wb > _WB_CAP:
            raise PrecisionExhausted(f"working precision cap {_WB_CAP} bits reached")
        with workprec(wb):
            try:
                out = None
                if sigma >= _DIRECT_SIGMA:
                    out = _direct_attempt(s, orders, wb, tgt_l2)
                if out is None:
                    N = max(32, int(math.ceil(t_abs / 2)))
                    while True:
                        out = _em_attempt(s, orders, wb, tgt_l2, N)
                        if out is not None:
                            break
                        if 2 * N > _N_CAP:
                            raise PrecisionExhausted(
                                f"main-sum cap {_N_CAP} reached at s = {complex(s)}"
                            )
                        N *= 2
            except _NeedBits as nb:
                wb += max(64, nb.deficit)
                continue
        vals, radii, terms = out
        if all(radii[k] < target for k in orders):
            results = {}
            with workprec(wb):  # conjugation must not round at ambient precision
                for k in orders:
                    v = mpmath.conj(vals[k]) if conj else vals[k]
                    results[k] = EvalResult(v, radii[k], wb, terms)
            return results
        wb += 64
    raise PrecisionExhausted("precision ladder did not converge")


def eval_zeta_deriv(point, k: int, policy: Optional[PrecisionPolicy] = None,
                    eval_cfg: Optional[EvalConfig] = None) -> EvalResult:
    """zeta^(k)(s) with certified absolute error radius."""
    cfg = eval_cfg or EvalConfig()
    if not (0 <= k <= cfg.k_max):
        raise ConfigError(f"derivative order must be in 0..{cfg.k_max}")
    return zeta_derivs(point, (k,), policy, cfg)[k]


def eval_norm_deriv(point, k: int, policy: Optional[PrecisionPolicy] = None,
                    eval_cfg: Optional[EvalConfig] = None) -> EvalResult:
    """The exponentially normalized derivative 2^s (-1)^k (log 2)^-k zeta^(k)(s).

    It shares the zeros of zeta^(k) in any region excluding s=1 and tends to
    1 as sigma -> +infinity, which is what makes a far-field argument anchor
    possible.  Requires k >= 1 (for k=0 the 2^s factor has nothing to cancel
    and the product diverges to the right).
    """
    cfg = eval_cfg or EvalConfig()
    if not (1 <= k <= cfg.k_max):
        raise ConfigError(f"normalized derivative needs 1 <= k <= {cfg.k_max}")
    policy = policy or PrecisionPolicy()
    base = zeta_derivs(point, (k,), policy, cfg)[k]
    s = as_mpc(point)
    wb = base.precision_bits
    with workprec(wb):
        ln2 = +_ln2()
        pref = mpmath.exp(s * ln2) * ((-1) ** k) / ln2 ** k
        value = pref * base.value
        radius = abs(pref) * base.error_radius + abs(value) * mpmath.ldexp(1, 4 - wb)
    return EvalResult(value, radius, wb, base.terms_used)


# ---------------------------------------------------------------------------
# digamma / completed factor

def _digamma_certified(z: mpc, wb: int, tgt_l2: float) -> Tuple[mpc, mpf, int]:
    """psi(z) by upward recurrence into the Stirling zone.

    The asymptotic series psi(z) ~ ln z - 1/(2z) - sum B_{2j}/(2j z^{2j})
    carries the Binet-integral remainder bound

        |R_M| <= |B_{2M+2}| / ((2M+2) |z|^{2M+2}),

    valid whenever |arg z| <= pi/4 (then Re z^2 >= 0, so |t^2+z^2| >= |z|^2
    for all real t in the integral).  The recurrence shifts z right until
    Re z dominates both |Im z| and a precision-scaled size threshold.
    """
    _ensure_bern(_M_CAP + 2)
    re = float(z.real)
    im = float(z.imag)
    need = max(8.0, 0.115 * wb, abs(im))
    n = max(0, int(math.ceil(need - re)))
    shift = mpc(0, 0)
    for j in range(n):
        shift += 1 / (z + j)
    zs = z + n
    zl2 = 0.5 * math.log2(float(zs.real) ** 2 + float(zs.imag) ** 2)
    acc = mpmath.ln(zs) - 1 / (2 * zs)
    inv2 = 1 / (zs * zs)
    w = inv2
    bound_l2 = math.inf
    terms = n
    for j in range(1, 64):
        acc -= _bern_over_2j[j] * w
        w = w * inv2
        terms += 1
        bound_l2 = _bern_over_2j_l2[j + 1] - (2 * j + 2) * zl2
        if bound_l2 <= tgt_l2 - 1.0:
            break
    else:
        raise PrecisionExhausted("digamma series stalled (shift threshold too small)")
    value = acc - shift
    mag_l2 = float(max(mpmath.mag(value), 1))
    radius = _pow2(bound_l2) + _pow2(_rounding_l2(3 * (n + 70), mag_l2, wb))
    return value, radius, terms


def eval_gamma_factor(point, policy: Optional[PrecisionPolicy] = None) -> Tuple[EvalResult, EvalResult]:
    """The completed factor h(s) = pi^(-s/2) Gamma(s/2) and its log-derivative.

    Returns (h, h'/h) where h'/h = -log(pi)/2 + psi(s/2)/2.  The functional
    equation makes h(s) zeta(s) real on the critical line, which downstream
    tests exploit as an end-to-end accuracy gate.  The h value is computed
    through loggamma with a magnitude-scaled radius model; the log-derivative
    carries the certified Stirling remainder from _digamma_certified.
    """
    policy = policy or PrecisionPolicy()
    s = as_mpc(point)
    conj = s.imag < 0
    if conj:
        s = mpmath.conj(s)
    z = s / 2
    m = int(round(-float(z.real)))
    if m >= 0 and abs(z + m) < mpf("1e-8"):
        raise GammaPole(f"s = {complex(point)} is within 1e-8 of a Gamma(s/2) pole")
    t_abs = abs(float(s.imag))
    wb = policy.working_bits(t_abs) + 16
    tgt_l2 = float(policy.target_radius_log2())
    with workprec(wb):
        lnpi = mpmath.ln(mpmath.pi)
        lg = mpmath.loggamma(z)
        lnh = -z * lnpi + lg
        h = mpmath.exp(lnh)
        mag_lnh = float(max(mpmath.mag(lnh), 1))
        r_h = abs(h) * mpmath.ldexp(1, int(mag_lnh) + 7 - wb)
        psi, r_psi, terms = _digamma_certified(z, wb, tgt_l2)
        hld = (psi - lnpi) / 2
        r_hld = r_psi / 2 + (1 + abs(hld)) * mpmath.ldexp(1, 3 - wb)
        if conj:
            h, hld = mpmath.conj(h), mpmath.conj(hld)
    return (
        EvalResult(h, r_h, wb, terms),
        EvalResult(hld, r_hld, wb, terms),
    )


def eval_ratio(point, ell: int, policy: Optional[PrecisionPolicy] = None,
               eval_cfg: Optional[EvalConfig] = None) -> EvalResult:
    """zeta^(ell) / zeta^(ell-1) with a certified quotient radius.

    Raises DenominatorZero when the denominator's certified disk contains 0,
    in which case no finite ratio can be claimed.
    """
    cfg = eval_cfg or EvalConfig()
    if not (1 <= ell <= cfg.k_max + 1):
        raise ConfigError(f"ratio order must be in 1..{cfg.k_max + 1}")
    policy = policy or PrecisionPolicy()
    pair = zeta_derivs(point, (ell - 1, ell), policy, cfg)
    f, g = pair[ell], pair[ell - 1]
    wb = max(f.precision_bits, g.precision_bits)
    with workprec(wb):
        g_abs = abs(g.value)
        if g_abs <= g.error_radius:
            raise DenominatorZero(
                f"zeta^({ell - 1}) disk at {complex(as_mpc(point))} contains zero"
            )
        q = f.value / g.value
        slack = 1 + mpmath.ldexp(1, -24)
        radius = (f.error_radius + abs(q) * g.error_radius) / (g_abs - g.error_radius)
        radius = radius * slack + abs(q) * mpmath.ldexp(1, 3 - wb)
    return EvalResult(q, radius, wb, f.terms_used + g.terms_used)
