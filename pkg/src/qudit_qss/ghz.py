"""Brute-force GHZ secret sharing, kept as an oracle for the single-qudit relay.

Each of the N+1 parties measures its share of
``(1/sqrt(d)) sum_k |k>^(N+1)`` in MUB basis ``j_n`` and gets outcome ``l_n``.
The joint law is

    P(l | j) = d**-(N+2) * | sum_k w**(-sum_n (k*l_n + k*k*j_n)) |**2

which is normalised over ``l`` for every ``j``: when ``sum j = 0 (mod d)`` the
inner sum is ``d`` on the ``d**N`` tuples with ``sum l = 0`` and zero
elsewhere, otherwise it is a Gauss sum of modulus ``sqrt(d)`` everywhere.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple, Optional, TextIO, Tuple

import numpy as np

from .mub import _tables, check_dimension
from .protocol import RoundRecord

TABLE_BUDGET = 10 ** 6


@dataclass(frozen=True)
class GhzSpec:
    d: int
    n_parties: int

    def __post_init__(self):
        object.__setattr__(self, "d", check_dimension(self.d))
        if self.n_parties < 2:
            raise ValueError("GHZ sharing needs at least 2 parties")
        if self.d ** self.n_parties > TABLE_BUDGET:
            raise MemoryError(
                f"d**n_parties = {self.d ** self.n_parties} exceeds the "
                f"{TABLE_BUDGET} entry budget for exact enumeration"
            )

    @property
    def n_outcomes(self) -> int:
        return self.d ** self.n_parties


class JointOutcome(NamedTuple):
    l: Tuple[int, ...]
    j: Tuple[int, ...]


def joint_prob(spec: GhzSpec, outcome: JointOutcome) -> float:
    d = spec.d
    l, j = outcome
    if len(l) != spec.n_parties or len(j) != spec.n_parties:
        raise ValueError(f"outcome must have {spec.n_parties} entries per tuple")
    roots = _tables(d)[0]
    sl, sj = sum(l), sum(j)
    k = np.arange(d)
    amp = roots[(-(k * sl + k * k * sj)) % d].sum()
    return float(abs(amp) ** 2) / d ** (spec.n_parties + 1)


def _l_tuples(d: int, n: int) -> np.ndarray:
    return np.array(list(itertools.product(range(d), repeat=n)), dtype=np.int64).reshape(-1, n)


@lru_cache(maxsize=256)
def _conditional(d: int, n: int, j: Tuple[int, ...]) -> np.ndarray:
    # P(l | j) for every l tuple in itertools.product order
    roots = _tables(d)[0]
    k = np.arange(d)
    sl = _l_tuples(d, n).sum(axis=1)
    expo = -(np.outer(sl, k) + sum(j) * k * k) % d
    amp = roots[expo].sum(axis=1)
    table = (amp.real ** 2 + amp.imag ** 2) / d ** (n + 1)
    table.setflags(write=False)
    return table


def conditional_table(spec: GhzSpec, j: Iterable[int]) -> np.ndarray:
    """``P(l | j)`` for all ``d**n`` outcome tuples, lexicographic in ``l``."""
    j = tuple(int(v) % spec.d for v in j)
    if len(j) != spec.n_parties:
        raise ValueError(f"need {spec.n_parties} basis choices")
    return _conditional(spec.d, spec.n_parties, j)


def sample_round(spec: GhzSpec, rng: np.random.Generator) -> Tuple[JointOutcome, bool]:
    d, n = spec.d, spec.n_parties
    j = tuple(int(v) for v in rng.integers(0, d, size=n))
    table = _conditional(d, n, j)
    idx = int(np.searchsorted(np.cumsum(table), rng.random() * table.sum(), side="right"))
    idx = min(idx, table.size - 1)
    l = tuple(int(v) for v in np.unravel_index(idx, (d,) * n))
    return JointOutcome(l, j), sum(j) % d == 0


def equivalence_map(record: RoundRecord, d: int) -> JointOutcome:
    """Read a valid single-qudit round as a GHZ outcome.

    The distributor's entries absorb its measurement: ``l_1 = x_1 - a`` and
    ``j_1 = y_1 - J``, so both tuples sum to zero mod ``d``.
    """
    if not record.valid:
        raise ValueError("only valid rounds have a GHZ counterpart")
    l = ((record.x[0] - record.a) % d,) + tuple(record.x[1:])
    j = ((record.y[0] - record.J) % d,) + tuple(record.y[1:])
    return JointOutcome(l, j)


def dump_table(spec: GhzSpec, out: TextIO, j_settings: Optional[Iterable[Tuple[int, ...]]] = None) -> int:
    """Write ``l-tuple, j-tuple, probability`` rows as CSV; returns row count.

    Without ``j_settings`` every basis setting is written, which is only
    allowed when the full ``d**(2n)`` table fits the budget.
    """
    d, n = spec.d, spec.n_parties
    if j_settings is None:
        if d ** (2 * n) > TABLE_BUDGET:
            raise MemoryError("full joint table exceeds budget; pass j_settings")
        j_settings = itertools.product(range(d), repeat=n)
    ls = _l_tuples(d, n)
    writer = csv.writer(out)
    writer.writerow(["l", "j", "probability"])
    rows = 0
    for j in j_settings:
        table = conditional_table(spec, j)
        jtxt = " ".join(map(str, j))
        for l, p in zip(ls, table):
            writer.writerow([" ".join(map(str, l)), jtxt, repr(float(p))])
            rows += 1
    return rows
