"""Single-qudit (N, N) secret sharing: relay, announcements, checks, extraction.

Parties are numbered 1..N+1; party 1 is the distributor.  Link ``k`` carries
the qudit from party ``k`` to party ``k + 1`` and link ``N + 1`` brings it
back to the distributor, who measures it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .mub import (
    QuditState,
    apply_gate,
    check_dimension,
    measure_in_basis,
    mub_vector,
    random_mub_vector,
)

log = logging.getLogger(__name__)

# Everything on the wire during one link transit.  Index 0 is the particle
# the next party (or the distributor's detector) treats as the carrier.
Pulse = Tuple[QuditState, ...]


@dataclass(frozen=True)
class ProtocolConfig:
    d: int
    n_recipients: int
    n_rounds: int
    check_fraction: float = 0.1
    corruption_threshold: float = 0.0
    seed: int = 0
    link_noise: float = 0.0
    # chance that a recipient counts particles at its gate exit each round
    number_check_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "d", check_dimension(self.d))
        if self.n_recipients < 1:
            raise ValueError("n_recipients must be >= 1")
        if self.n_rounds < 0:
            raise ValueError("n_rounds must be >= 0")
        for name in ("check_fraction", "corruption_threshold", "link_noise", "number_check_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def n_parties(self) -> int:
        return self.n_recipients + 1


@dataclass(frozen=True)
class RoundChoices:
    """Test hook: force some or all of the random choices of a round."""

    x: Optional[Sequence[int]] = None
    y: Optional[Sequence[int]] = None
    J: Optional[int] = None
    check: Optional[bool] = None


@dataclass(frozen=True)
class Announcement:
    """What the classical channel reveals after a round.

    ``y`` and ``x`` map recipient party number (2..N+1) to its value; ``x``
    is only filled for check rounds.  Nothing the distributor holds is here.
    """

    round_index: int
    order: Tuple[int, ...]
    y: dict
    valid: bool
    check: bool
    x: Optional[dict] = None
    check_passed: Optional[bool] = None


class Interceptor:
    """Base class for anything sitting on a link.

    ``intercept`` sees only the in-flight pulse; ``observe`` sees only the
    public announcement.  Subclasses keep their own records.
    """

    def intercept(self, pulse: Pulse) -> Pulse:
        return pulse

    def observe(self, announcement: Announcement) -> None:
        pass


@dataclass(frozen=True)
class ChannelTap:
    link: int
    interceptor: Interceptor


@dataclass(frozen=True)
class RoundRecord:
    x: Tuple[int, ...]
    y: Tuple[int, ...]
    J: int
    a: int
    valid: bool
    is_check_round: bool
    check_passed: Optional[bool]
    x1_secret: Optional[int]
    order: Tuple[int, ...] = ()
    alarm: bool = False

    def shares(self) -> Tuple[int, ...]:
        """Recipients' private values x_2..x_{N+1}."""
        return self.x[1:]


@dataclass(frozen=True)
class SessionTranscript:
    config: ProtocolConfig
    rounds: Tuple[RoundRecord, ...]
    verdict: str
    observed_violation_rate: float
    secret_stream: Tuple[int, ...]
    alarms: int = 0

    @property
    def n_valid(self) -> int:
        return sum(r.valid for r in self.rounds)

    @property
    def n_checks(self) -> int:
        return sum(r.is_check_round for r in self.rounds)

    @property
    def n_violations(self) -> int:
        return sum(r.check_passed is False for r in self.rounds)

    @property
    def valid_fraction(self) -> float:
        return self.n_valid / len(self.rounds) if self.rounds else 0.0


def announce_order(rng: np.random.Generator, n_recipients: int) -> Tuple[int, ...]:
    """Random speaking order of recipients 2..N+1."""
    if n_recipients < 1:
        raise ValueError("n_recipients must be >= 1")
    return tuple((rng.permutation(n_recipients) + 2).tolist())


def reconstruct_secret(shares: Sequence[int], d: int, n_recipients: Optional[int] = None) -> int:
    """Recipients pool x_2..x_{N+1}; the distributor's digit is minus their sum."""
    d = check_dimension(d)
    if not shares:
        raise ValueError("need at least one share")
    if n_recipients is not None and len(shares) != n_recipients:
        raise ValueError(f"expected {n_recipients} shares, got {len(shares)}")
    return -sum(shares) % d


def _index_taps(taps: Sequence[ChannelTap], n_parties: int) -> dict:
    by_link = {}
    for tap in taps:
        if not 1 <= tap.link <= n_parties:
            raise ValueError(f"tap link {tap.link} outside 1..{n_parties}")
        if tap.link in by_link:
            raise ValueError(f"more than one tap on link {tap.link}")
        by_link[tap.link] = tap.interceptor
    return by_link


def run_round(
    config: ProtocolConfig,
    rng: np.random.Generator,
    taps: Sequence[ChannelTap] = (),
    forced: Optional[RoundChoices] = None,
    round_index: int = 0,
    _tap_index: Optional[dict] = None,
) -> RoundRecord:
    d, n = config.d, config.n_parties
    by_link = _index_taps(taps, n) if _tap_index is None else _tap_index

    # draws happen unconditionally so forcing never shifts the stream
    draws = rng.integers(0, d, size=2 * n + 1).tolist()
    x, y, J = draws[:n], draws[n:2 * n], draws[2 * n]
    if forced is not None:
        if forced.x is not None:
            x = [int(v) % d for v in forced.x]
        if forced.y is not None:
            y = [int(v) % d for v in forced.y]
        if forced.J is not None:
            J = int(forced.J) % d
        if len(x) != n or len(y) != n:
            raise ValueError(f"forced choices need {n} entries each")

    pulse: Pulse = (mub_vector(d, (0, 0)),)
    alarm = False
    for party in range(1, n + 1):
        gate = (x[party - 1], y[party - 1])
        pulse = (apply_gate(pulse[0], gate),) if len(pulse) == 1 else tuple(apply_gate(q, gate) for q in pulse)
        if party > 1 and config.number_check_rate > 0.0:
            if rng.random() < config.number_check_rate and len(pulse) > 1:
                alarm = True
        interceptor = by_link.get(party)
        if interceptor is not None:
            pulse = tuple(interceptor.intercept(pulse))
        if config.link_noise > 0.0 and rng.random() < config.link_noise:
            pulse = (random_mub_vector(d, rng),) + pulse[1:]

    a, _ = measure_in_basis(pulse[0], J, rng)
    valid = sum(y) % d == J
    order = announce_order(rng, config.n_recipients)

    is_check = False
    if valid:
        is_check = bool(rng.random() < config.check_fraction)
        if forced is not None and forced.check is not None:
            is_check = forced.check
    check_passed = (sum(x) % d == a) if is_check else None
    x1_secret = (x[0] - a) % d if valid else None

    if by_link:
        ann = Announcement(
            round_index=round_index,
            order=order,
            y={p: y[p - 1] for p in order},
            valid=valid,
            check=is_check,
            x={p: x[p - 1] for p in order} if is_check else None,
            check_passed=check_passed,
        )
        for interceptor in by_link.values():
            interceptor.observe(ann)

    return RoundRecord(
        x=tuple(x),
        y=tuple(y),
        J=J,
        a=a,
        valid=valid,
        is_check_round=is_check,
        check_passed=check_passed,
        x1_secret=x1_secret,
        order=order,
        alarm=alarm,
    )


def run_session(config: ProtocolConfig, taps: Sequence[ChannelTap] = ()) -> SessionTranscript:
    rng = np.random.default_rng(config.seed)
    by_link = _index_taps(taps, config.n_parties)
    rounds = tuple(
        run_round(config, rng, round_index=i, _tap_index=by_link) for i in range(config.n_rounds)
    )
    return finish_session(config, rounds)


def finish_session(config: ProtocolConfig, rounds: Sequence[RoundRecord]) -> SessionTranscript:
    """Apply the distributor's security decision to a list of rounds."""
    checks = [r for r in rounds if r.is_check_round]
    violations = sum(not r.check_passed for r in checks)
    rate = violations / len(checks) if checks else 0.0
    alarms = sum(r.alarm for r in rounds)
    # a particle-number alarm is direct evidence of a probe
    corrupt = rate > config.corruption_threshold or alarms > 0
    secret = tuple(r.x1_secret for r in rounds if r.valid and not r.is_check_round)
    log.debug(
        "session d=%d N=%d: %d valid, %d checks, %d violations, %d alarms",
        config.d, config.n_recipients, sum(r.valid for r in rounds), len(checks), violations, alarms,
    )
    return SessionTranscript(
        config=config,
        rounds=tuple(rounds),
        verdict="corrupt" if corrupt else "clean",
        observed_violation_rate=rate,
        secret_stream=secret,
        alarms=alarms,
    )
