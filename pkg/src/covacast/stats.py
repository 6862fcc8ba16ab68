"""Welch's two-sample t-test with Student-t tail probabilities evaluated via a
continued-fraction regularized incomplete beta."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import SampleTooSmall

_MAX_ITER = 300
_EPS = 3e-15
_FPMIN = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: float) -> float:
    """P(|T_df| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    p = regularized_incomplete_beta(df / 2.0, 0.5, x)
    return min(1.0, max(0.0, p))


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p_two_sided: float
    degenerate: bool = False  # set when both samples are constant

    def __iter__(self):
        return iter((self.t, self.df, self.p_two_sided))


def welch_t_test(sample_a, sample_b) -> TTestResult:
    """Unequal-variance two-sample t-test with Welch-Satterthwaite df.

    Both samples constant: p = 1 when their means agree, p = 0 otherwise,
    flagged as degenerate so deterministic backends never divide by zero.
    """
    a = [float(v) for v in sample_a]
    b = [float(v) for v in sample_b]
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise SampleTooSmall("each sample needs at least two observations")

    ma = sum(a) / na
    mb = sum(b) / nb
    va = sum((v - ma) ** 2 for v in a) / (na - 1)
    vb = sum((v - mb) ** 2 for v in b) / (nb - 1)

    if va == 0.0 and vb == 0.0:
        fallback_df = float(na + nb - 2)
        if ma == mb:
            return TTestResult(t=0.0, df=fallback_df, p_two_sided=1.0, degenerate=True)
        t = math.inf if ma > mb else -math.inf
        return TTestResult(t=t, df=fallback_df, p_two_sided=0.0, degenerate=True)

    se2 = va / na + vb / nb
    t = (ma - mb) / math.sqrt(se2)
    df = se2**2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    return TTestResult(t=t, df=df, p_two_sided=student_t_two_sided_p(t, df))
