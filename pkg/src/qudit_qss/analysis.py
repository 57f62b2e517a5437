"""Efficiency comparisons against QKD-based and GHZ-based sharing, and summaries."""

from __future__ import annotations

import csv
import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import Iterable, List, Optional, TextIO, Tuple

from scipy import stats

SCHEMES = ("ghz", "single_qudit", "qkd")
CSV_HEADER = ("scheme", "d", "N", "metric", "value", "ci_low", "ci_high", "n_samples")


def wilson_interval(hits: int, n: int, confidence: float = 0.95) -> Tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    z = stats.norm.ppf(0.5 + confidence / 2)
    p = hits / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def _check_qkd_args(N: int, d: int):
    if N < 1:
        raise ValueError("N must be >= 1")
    if d < 2:
        raise ValueError("d must be >= 2")


def qkd_success(N: int, d: int, m: int) -> float:
    """Chance that all N recipients hit the right basis at least once in m tries."""
    _check_qkd_args(N, d)
    if m < 1:
        raise ValueError("m must be >= 1")
    return (1.0 - (1.0 - 1.0 / d) ** m) ** N


def qkd_rounds(N: int, d: int, p_success: float) -> int:
    """Smallest repetition count m with ``qkd_success(N, d, m) >= p_success``.

    Starts from ceil(ln(1 - p**(1/N)) / ln(1 - 1/d)) and nudges by one when
    rounding puts the closed form on the wrong side of an exact boundary.
    """
    _check_qkd_args(N, d)
    if not 0.0 < p_success < 1.0:
        raise ValueError("p_success must lie strictly between 0 and 1")
    m = max(1, math.ceil(math.log(1.0 - p_success ** (1.0 / N)) / math.log(1.0 - 1.0 / d)))
    while m > 1 and qkd_success(N, d, m - 1) >= p_success:
        m -= 1
    while qkd_success(N, d, m) < p_success:
        m += 1
    return m


def detection_scaling(scheme: str, N: int, eta: float) -> float:
    """Fraction of rounds surviving detector inefficiency ``eta``.

    GHZ needs all N+1 stations to click, pairwise QKD needs N, the relay
    has a single detector station.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    if N < 1:
        raise ValueError("N must be >= 1")
    if scheme == "ghz":
        return eta ** (N + 1)
    if scheme == "single_qudit":
        return eta
    if scheme == "qkd":
        return eta ** N
    raise ValueError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEMES)}")


@dataclass(frozen=True)
class SummaryRow:
    scheme: str
    d: int
    N: int
    metric: str
    value: float
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None
    n_samples: Optional[int] = None


def aggregate(transcripts: Iterable) -> List[SummaryRow]:
    """Pool transcripts by config shape and report rates with 95% intervals.

    Throughput is secret digits per round, i.e. valid rounds not spent on
    checks divided by all rounds.
    """
    groups = OrderedDict()
    for t in transcripts:
        c = t.config
        key = (c.d, c.n_recipients, c.check_fraction, c.link_noise)
        groups.setdefault(key, []).append(t)

    rows = []
    for (d, N, _, _), ts in groups.items():
        rounds = sum(len(t.rounds) for t in ts)
        valid = sum(t.n_valid for t in ts)
        checks = sum(t.n_checks for t in ts)
        violations = sum(t.n_violations for t in ts)
        digits = sum(len(t.secret_stream) for t in ts)
        for metric, hits, n in (
            ("valid_rate", valid, rounds),
            ("violation_rate", violations, checks),
            ("throughput", digits, rounds),
        ):
            lo, hi = wilson_interval(hits, n)
            rows.append(SummaryRow("single_qudit", d, N, metric, hits / n if n else 0.0, lo, hi, n))
    return rows


def write_summary_csv(rows: Iterable[SummaryRow], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([
            r.scheme, r.d, r.N, r.metric, _fmt(r.value),
            _fmt(r.ci_low), _fmt(r.ci_high), "" if r.n_samples is None else r.n_samples,
        ])


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def comparison_rows(N: int, d: int, p: float, eta: float) -> List[SummaryRow]:
    m = qkd_rounds(N, d, p)
    rows = [
        SummaryRow("qkd", d, N, "rounds_m", m),
        SummaryRow("qkd", d, N, "success_at_m", qkd_success(N, d, m)),
    ]
    if m > 1:
        rows.append(SummaryRow("qkd", d, N, "success_at_m_minus_1", qkd_success(N, d, m - 1)))
    for scheme in SCHEMES:
        rows.append(SummaryRow(scheme, d, N, f"detection_scaling_eta={eta:g}", detection_scaling(scheme, N, eta)))
    return rows
