"""Eavesdropping models installed as channel taps, plus exact detection oracles.

Eve's code only ever touches what ``Interceptor`` hands it: the in-flight
pulse and the public announcement.  Ground truth is joined back in
``evaluate_attack`` from the full transcript, after the session is over.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple, Union

import numpy as np

from .analysis import wilson_interval
from .mub import measure_in_basis, mub_vector
from .protocol import (
    Announcement,
    ChannelTap,
    Interceptor,
    ProtocolConfig,
    Pulse,
    SessionTranscript,
    run_session,
)

KINDS = ("intercept_resend", "substitute_qudit", "multi_pulse")


@dataclass(frozen=True)
class AdversaryConfig:
    kind: str
    link: int = 1
    # "uniform" or a fixed basis index
    basis_strategy: Union[str, int] = "uniform"
    num_check_probability: float = 0.0
    seed: int = 0

    def __post_init__(self):
        kind = self.kind.replace("-", "_")
        if kind not in KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}; choose from {', '.join(KINDS)}")
        object.__setattr__(self, "kind", kind)
        if not 0.0 <= self.num_check_probability <= 1.0:
            raise ValueError("num_check_probability must lie in [0, 1]")
        if self.basis_strategy != "uniform" and not isinstance(self.basis_strategy, int):
            raise ValueError("basis_strategy must be 'uniform' or an integer basis index")

    def validate_for(self, n_recipients: int) -> None:
        n = n_recipients + 1
        if not 1 <= self.link <= n:
            raise ValueError(f"link {self.link} outside 1..{n}")
        if self.kind == "multi_pulse" and self.link < 2:
            raise ValueError("multi-pulse probes a recipient's gate; link must be >= 2")


@dataclass
class AttackReport:
    kind: str
    link: int
    rounds_attacked: int
    eve_guess_correct_rate: float
    detection_rate: float
    detected: bool
    ci_low: float
    ci_high: float
    guess_samples: int = 0
    detection_samples: int = 0

    def as_row(self) -> dict:
        return {
            "kind": self.kind,
            "link": self.link,
            "rounds": self.rounds_attacked,
            "guess_rate": self.eve_guess_correct_rate,
            "detection_rate": self.detection_rate,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
        }


class InterceptResend(Interceptor):
    """Measure the carrier in a guessed MUB basis and forward the collapse."""

    def __init__(self, d: int, basis_strategy="uniform", seed: int = 0):
        self.d = d
        self.basis_strategy = basis_strategy
        self.rng = np.random.default_rng(seed)
        # one (basis, outcome) per round, in round order
        self.records: List[Tuple[int, int]] = []

    def intercept(self, pulse: Pulse) -> Pulse:
        if self.basis_strategy == "uniform":
            basis = int(self.rng.integers(0, self.d))
        else:
            basis = int(self.basis_strategy) % self.d
        outcome, collapsed = measure_in_basis(pulse[0], basis, self.rng)
        self.records.append((basis, outcome))
        return (collapsed,) + tuple(pulse[1:])

    @property
    def guesses(self) -> List[int]:
        # her best guess of the partial x-sum is the raw outcome
        return [o for _, o in self.records]


@dataclass
class _SubstituteState:
    d: int
    rng: np.random.Generator
    retained: Optional[object] = None
    kept: Optional[object] = None
    guesses: List[int] = field(default_factory=list)


class _SwapIn(Interceptor):
    def __init__(self, state: _SubstituteState):
        self.state = state

    def intercept(self, pulse: Pulse) -> Pulse:
        self.state.retained = pulse[0]
        return (mub_vector(self.state.d, (0, 0)),) + tuple(pulse[1:])


class _SwapOut(Interceptor):
    def __init__(self, state: _SubstituteState):
        self.state = state

    def intercept(self, pulse: Pulse) -> Pulse:
        self.state.kept = pulse[0]
        return (self.state.retained,) + tuple(pulse[1:])

    def observe(self, ann: Announcement) -> None:
        s = self.state
        basis = sum(ann.y.values()) % s.d
        outcome, _ = measure_in_basis(s.kept, basis, s.rng)
        s.guesses.append(outcome)
        s.retained = s.kept = None


class _ProbeIn(Interceptor):
    def __init__(self, d: int):
        self.d = d

    def intercept(self, pulse: Pulse) -> Pulse:
        return tuple(pulse) + (mub_vector(self.d, (0, 0)),)


class _ProbeOut(Interceptor):
    def __init__(self, d: int, party: int, seed: int = 0):
        self.d = d
        self.party = party
        self.rng = np.random.default_rng(seed)
        self.probe = None
        self.guesses: List[Tuple[int, int]] = []

    def intercept(self, pulse: Pulse) -> Pulse:
        self.probe = pulse[-1]
        return tuple(pulse[:-1])

    def observe(self, ann: Announcement) -> None:
        # the announced y_k tells her which basis the probe now lives in
        y_k = ann.y[self.party]
        x_k, _ = measure_in_basis(self.probe, y_k, self.rng)
        self.guesses.append((x_k, y_k))
        self.probe = None


def intercept_resend_tap(adv: AdversaryConfig, d: int) -> Tuple[ChannelTap, InterceptResend]:
    if adv.kind != "intercept_resend":
        raise ValueError("config is not an intercept-resend attack")
    eve = InterceptResend(d, adv.basis_strategy, adv.seed)
    return ChannelTap(adv.link, eve), eve


def substitute_qudit_attack(adv: AdversaryConfig, d: int, n_recipients: int):
    """Taps on link 1 and link N+1 plus the shared state holding Eve's guesses."""
    if adv.kind != "substitute_qudit":
        raise ValueError("config is not a substitute-qudit attack")
    state = _SubstituteState(d, np.random.default_rng(adv.seed))
    taps = (ChannelTap(1, _SwapIn(state)), ChannelTap(n_recipients + 1, _SwapOut(state)))
    return taps, state


def multi_pulse_attack(adv: AdversaryConfig, d: int):
    """Probe injected before party ``adv.link``'s gate and collected after it."""
    if adv.kind != "multi_pulse":
        raise ValueError("config is not a multi-pulse attack")
    out = _ProbeOut(d, adv.link, adv.seed)
    taps = (ChannelTap(adv.link - 1, _ProbeIn(d)), ChannelTap(adv.link, out))
    return taps, out


def multi_pulse_detection_probability(p: float, rounds: int) -> float:
    """Chance that at least one of ``rounds`` probed rounds meets a particle count."""
    return 1.0 - (1.0 - p) ** rounds


def evaluate_attack(
    config: ProtocolConfig, adv: AdversaryConfig, n_rounds: Optional[int] = None
) -> Tuple[AttackReport, SessionTranscript]:
    adv.validate_for(config.n_recipients)
    d = config.d
    overrides = {}
    if n_rounds is not None:
        overrides["n_rounds"] = n_rounds
    if adv.kind == "multi_pulse":
        overrides["number_check_rate"] = adv.num_check_probability
    if overrides:
        config = ProtocolConfig(**{**config.__dict__, **overrides})

    if adv.kind == "intercept_resend":
        tap, eve = intercept_resend_tap(adv, d)
        transcript = run_session(config, (tap,))
        k = adv.link
        # truth: l-index of the carrier on link k
        pairs = [
            (g, sum(r.x[:k]) % d)
            for g, r in zip(eve.guesses, transcript.rounds)
            if r.valid
        ]
    elif adv.kind == "substitute_qudit":
        taps, state = substitute_qudit_attack(adv, d, config.n_recipients)
        transcript = run_session(config, taps)
        pairs = [
            (g, sum(r.x[1:]) % d)
            for g, r in zip(state.guesses, transcript.rounds)
            if r.valid
        ]
    else:
        taps, eve = multi_pulse_attack(adv, d)
        transcript = run_session(config, taps)
        k = adv.link
        pairs = [
            (g, (r.x[k - 1], r.y[k - 1]))
            for g, r in zip(eve.guesses, transcript.rounds)
            if r.valid
        ]

    guess_rate = sum(g == t for g, t in pairs) / len(pairs) if pairs else 0.0
    if adv.kind == "multi_pulse":
        hits, trials = transcript.alarms, len(transcript.rounds)
    else:
        hits, trials = transcript.n_violations, transcript.n_checks
    rate = hits / trials if trials else 0.0
    lo, hi = wilson_interval(hits, trials)
    report = AttackReport(
        kind=adv.kind,
        link=adv.link,
        rounds_attacked=len(transcript.rounds),
        eve_guess_correct_rate=guess_rate,
        detection_rate=rate,
        detected=transcript.verdict == "corrupt",
        ci_low=lo,
        ci_high=hi,
        guess_samples=len(pairs),
        detection_samples=trials,
    )
    return report, transcript


# ---------------------------------------------------------------------------
# exact oracles: rational enumeration using only the MUB overlap rule


def _born(d: int, state: Tuple[int, int], basis: int, outcome: int) -> Fraction:
    """P(outcome) measuring MUB vector ``state=(l, j)`` in ``basis``."""
    l, j = state
    if j % d != basis % d:
        return Fraction(1, d)
    return Fraction(int(l % d == outcome % d))


def _sum_law(d: int, count: int):
    """Distribution of the mod-d sum of ``count`` uniform residues."""
    if count == 0:
        return {0: Fraction(1)}
    return {s: Fraction(1, d) for s in range(d)}


def exact_intercept_resend(d: int, n_recipients: int, link: int, fixed_basis: Optional[int] = None) -> Fraction:
    """P(check fails | valid check round) for intercept-resend on ``link``."""
    n = n_recipients + 1
    if not 1 <= link <= n:
        raise ValueError("link out of range")
    prefix = _sum_law(d, link)  # parties 1..link, never empty
    suffix = _sum_law(d, n - link)
    eve_bases = {fixed_basis % d: Fraction(1)} if fixed_basis is not None else _sum_law(d, 1)
    total = Fraction(0)
    for (L, pL), (Jc, pJ), (Xs, pX), (Ys, pY) in itertools.product(
        prefix.items(), prefix.items(), suffix.items(), suffix.items()
    ):
        w = pL * pJ * pX * pY
        J = (Jc + Ys) % d  # validity pins J to the y-sum
        for b, pb in eve_bases.items():
            for o in range(d):
                po = _born(d, (L, Jc), b, o)
                if not po:
                    continue
                final = ((o + Xs) % d, (b + Ys) % d)
                for a in range(d):
                    pa = _born(d, final, J, a)
                    if pa and a != (L + Xs) % d:
                        total += w * pb * po * pa
    return total


def exact_substitute_qudit(d: int, n_recipients: int) -> Tuple[Fraction, Fraction]:
    """``(P(check fails | valid check round), P(Eve's sum is right))``."""
    rec = _sum_law(d, n_recipients)
    detect = Fraction(0)
    guess = Fraction(0)
    for x1, y1 in itertools.product(range(d), repeat=2):
        for (Xr, pX), (Yr, pY) in itertools.product(rec.items(), rec.items()):
            w = Fraction(1, d * d) * pX * pY
            J = (y1 + Yr) % d
            for a in range(d):
                pa = _born(d, (x1, y1), J, a)
                if pa and a != (x1 + Xr) % d:
                    detect += w * pa
            # Eve's own qudit ends as (Xr, Yr); she measures in basis Yr
            guess += w * _born(d, (Xr, Yr), Yr, Xr)
    return detect, guess


def exact_detection_probability(kind: str, d: int, n_recipients: int, link: int = 1) -> Fraction:
    kind = kind.replace("-", "_")
    if kind == "intercept_resend":
        return exact_intercept_resend(d, n_recipients, link)
    if kind == "substitute_qudit":
        return exact_substitute_qudit(d, n_recipients)[0]
    raise ValueError(f"no exact check-round oracle for {kind!r}")


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(p * (1 - p) / n) if n else math.inf
