"""Classical (N, k) Shamir threshold sharing over the integers mod a prime P."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

from sympy import isprime


@dataclass(frozen=True)
class ShamirParams:
    N: int
    k: int
    P: int
    coefficients: Tuple[int, ...]  # a_0 (the secret), a_1, ..., a_{k-1}

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(int(a) for a in self.coefficients))
        if not isprime(self.P):
            raise ValueError(f"P={self.P} is not prime")
        if not 1 <= self.k <= self.N < self.P:
            raise ValueError("need 1 <= k <= N < P")
        if len(self.coefficients) != self.k:
            raise ValueError(f"need exactly k={self.k} coefficients")

    @property
    def secret(self) -> int:
        return self.coefficients[0] % self.P


def poly_eval(coeffs: Sequence[int], x: int, P: int) -> int:
    y = 0
    for c in reversed(coeffs):
        y = (y * x + c) % P
    return y


def shamir_share(params: ShamirParams) -> List[Tuple[int, int]]:
    return [(x, poly_eval(params.coefficients, x, params.P)) for x in range(1, params.N + 1)]


def shamir_reconstruct(shares: Sequence[Tuple[int, int]], P: int) -> int:
    """Lagrange interpolation of the share polynomial at x = 0."""
    if not isprime(P):
        raise ValueError(f"P={P} is not prime")
    if not shares:
        raise ValueError("need at least one share")
    xs = [x % P for x, _ in shares]
    if len(set(xs)) != len(xs):
        raise ValueError("shares have repeated abscissae")
    if 0 in xs:
        raise ValueError("abscissa 0 would expose the secret directly")
    secret = 0
    for i, (xi, yi) in enumerate(shares):
        num = den = 1
        for m, xm in enumerate(xs):
            if m != i:
                num = num * -xm % P
                den = den * (xi - xm) % P
        secret = (secret + yi * num * pow(den, -1, P)) % P
    return secret
