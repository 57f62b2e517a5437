"""Qudit states, the cyclic MUB family and the diagonal phase gates.

Vectors of basis ``j`` are

    |e_l^(j)> = d**-0.5 * sum_k  w**(k*(l + j*k)) |k>,   w = exp(2*pi*i/d)

for odd prime ``d``.  ``X_d`` multiplies amplitude ``k`` by ``w**k`` and
``Y_d`` by ``w**(k*k)``, so ``X_d**x Y_d**y`` sends label ``(l, j)`` to
``(l + x, j + y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional, Tuple

import numpy as np
from sympy import isprime

CLASSIFY_TOL = 1e-9
NORM_TOL = 1e-9


def check_dimension(d) -> int:
    """Return ``d`` as an int, raising ValueError unless it is an odd prime."""
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)):
        raise TypeError(f"dimension must be an integer, got {d!r}")
    d = int(d)
    if d < 3 or not isprime(d):
        raise ValueError(
            f"dimension d={d} is not an odd prime; the cyclic MUB "
            "construction requires d to be an odd prime (3, 5, 7, 11, ...)"
        )
    return d


class MubLabel(NamedTuple):
    """Label ``(l, j)``: vector ``l`` of basis ``j``."""

    l: int
    j: int


class PhaseGate(NamedTuple):
    """The diagonal unitary ``X_d**x Y_d**y``."""

    x: int
    y: int

    def then(self, other: "PhaseGate") -> "PhaseGate":
        # diagonal gates commute, exponents just add
        return PhaseGate(self.x + other.x, self.y + other.y)


@lru_cache(maxsize=None)
def _tables(d: int):
    d = check_dimension(d)
    e = np.arange(d)
    # w**e for reduced exponents only
    roots = np.cos(2 * np.pi * e / d) + 1j * np.sin(2 * np.pi * e / d)
    k = np.arange(d)
    k2 = (k * k) % d
    labels = [(l, j) for j in range(d) for l in range(d)]
    vecs = np.array([roots[(k * (l + j * k)) % d] for l, j in labels]) / math.sqrt(d)
    # bases[j] rows are <e_l^(j)| for l = 0..d-1
    bases = vecs.conj().reshape(d, d, d)
    for arr in (roots, k, k2, vecs, bases):
        arr.setflags(write=False)
    return roots, k, k2, vecs, bases


def omega_power(d: int, e: int) -> complex:
    """``w**e`` with the exponent reduced mod ``d`` first."""
    return complex(_tables(d)[0][e % d])


@dataclass(frozen=True, eq=False)
class QuditState:
    """Pure state of one qudit stored as its full amplitude vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.size < 2:
            raise ValueError("amplitudes must be a 1-d vector of length >= 2")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalised (norm^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def _trusted(cls, amps: np.ndarray) -> "QuditState":
        # skips validation; callers guarantee a unit vector
        obj = object.__new__(cls)
        amps.setflags(write=False)
        object.__setattr__(obj, "amplitudes", amps)
        return obj

    @property
    def d(self) -> int:
        return self.amplitudes.shape[0]

    def phase(self, theta: float) -> "QuditState":
        return QuditState._trusted(self.amplitudes * complex(math.cos(theta), math.sin(theta)))

    def __repr__(self):
        return f"QuditState(d={self.d}, amplitudes={np.round(self.amplitudes, 6)!r})"


def mub_vector(d: int, label) -> QuditState:
    l, j = label
    vecs = _tables(d)[3]
    return QuditState._trusted(vecs[(j % d) * d + (l % d)].copy())


def basis_state(d: int, k: int) -> QuditState:
    """Computational basis state ``|k>`` (the basis the MUB labels leave out)."""
    d = check_dimension(d)
    amps = np.zeros(d, dtype=np.complex128)
    amps[k % d] = 1.0
    return QuditState._trusted(amps)


def apply_gate(state: QuditState, gate) -> QuditState:
    d = state.d
    x, y = gate
    roots, k, k2, _, _ = _tables(d)
    return QuditState._trusted(state.amplitudes * roots[(x * k + y * k2) % d])


def overlap_sq(a: QuditState, b: QuditState) -> float:
    if a.d != b.d:
        raise ValueError(f"dimension mismatch: {a.d} vs {b.d}")
    return abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2


def basis_probabilities(state: QuditState, j: int) -> np.ndarray:
    """Born probabilities of the ``d`` outcomes when measuring in basis ``j``."""
    d = state.d
    bases = _tables(d)[4]
    amp = bases[j % d] @ state.amplitudes
    return amp.real ** 2 + amp.imag ** 2


def classify(state: QuditState, tol: float = CLASSIFY_TOL) -> Optional[MubLabel]:
    """Label of the MUB vector equal to ``state`` up to global phase, else None."""
    d = state.d
    vecs = _tables(d)[3]
    amp = vecs.conj() @ state.amplitudes
    probs = amp.real ** 2 + amp.imag ** 2
    hits = np.flatnonzero(probs >= 1.0 - tol)
    if hits.size != 1:
        return None
    j, l = divmod(int(hits[0]), d)
    return MubLabel(l, j)


def measure_in_basis(state: QuditState, j: int, rng: np.random.Generator) -> Tuple[int, QuditState]:
    """Projective measurement in basis ``j``; returns ``(outcome, collapsed state)``."""
    d = state.d
    probs = basis_probabilities(state, j)
    cdf = np.cumsum(probs)
    outcome = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    outcome = min(outcome, d - 1)
    return outcome, mub_vector(d, (outcome, j))


def random_mub_vector(d: int, rng: np.random.Generator) -> QuditState:
    l, j = rng.integers(0, d, size=2)
    return mub_vector(d, (int(l), int(j)))


def all_labels(d: int):
    return [MubLabel(l, j) for j in range(d) for l in range(d)]


def verify_mubs(d: int, tol: float = CLASSIFY_TOL, cyclic: bool = True) -> dict:
    """Exhaustively check unbiasedness, orthonormality and the cyclic gate action.

    Returns a dict of check name -> (passed, detail) for reporting.
    """
    d = check_dimension(d)
    vecs = _tables(d)[3]
    gram = np.abs(vecs.conj() @ vecs.T) ** 2
    same_basis = np.kron(np.eye(d), np.ones((d, d))).astype(bool)
    cross = gram[~same_basis]
    within = gram[same_basis].reshape(-1)
    ident = np.eye(d * d)[same_basis].reshape(-1)
    unbiased_err = float(np.max(np.abs(cross - 1.0 / d))) if cross.size else 0.0
    ortho_err = float(np.max(np.abs(within - ident)))
    report = {
        "unbiased": (unbiased_err <= tol, f"max |overlap - 1/d| = {unbiased_err:.3e}"),
        "orthonormal": (ortho_err <= tol, f"max deviation = {ortho_err:.3e}"),
    }
    if cyclic:
        bad = 0
        for l, j in all_labels(d):
            v = mub_vector(d, (l, j))
            for x in range(d):
                for y in range(d):
                    if classify(apply_gate(v, (x, y)), tol) != ((l + x) % d, (j + y) % d):
                        bad += 1
        report["cyclic"] = (bad == 0, f"{d ** 4 - bad}/{d ** 4} label/gate pairs map correctly")
    return report
