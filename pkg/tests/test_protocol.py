import cmath
import itertools
import math
from collections import Counter

import numpy as np
import pytest

from qudit_qss.mub import classify
from qudit_qss.protocol import (
    ChannelTap,
    Interceptor,
    ProtocolConfig,
    RoundChoices,
    announce_order,
    reconstruct_secret,
    run_round,
    run_session,
)


def within_3sigma(hits, n, p):
    return abs(hits - n * p) <= 3 * math.sqrt(n * p * (1 - p))


def cfg(**kw):
    base = dict(d=3, n_recipients=2, n_rounds=1000, check_fraction=0.2, seed=11)
    base.update(kw)
    return ProtocolConfig(**base)


class TestConfig:
    def test_rejects_even_dimension(self):
        with pytest.raises(ValueError, match="odd prime"):
            cfg(d=2)

    @pytest.mark.parametrize("field,value", [
        ("n_recipients", 0), ("check_fraction", 1.5), ("link_noise", -0.1), ("seed", -1),
    ])
    def test_rejects_out_of_range(self, field, value):
        with pytest.raises(ValueError):
            cfg(**{field: value})


class TestRunRound:
    def test_identity_round(self, rng):
        r = run_round(cfg(), rng, forced=RoundChoices(x=(0, 0, 0), y=(0, 0, 0), J=0))
        assert (r.valid, r.a, r.x1_secret) == (True, 0, 0)

    def test_worked_round(self, rng):
        d, x, y = 3, (1, 2, 1), (0, 1, 2)
        # independent state vector: amplitude k carries w**(k*sum x + k^2*sum y)
        psi = np.array([cmath.exp(2j * math.pi * (k * sum(x) + k * k * sum(y)) / d) for k in range(d)])
        psi /= math.sqrt(d)
        basis0 = [np.array([cmath.exp(2j * math.pi * k * l / d) for k in range(d)]) / math.sqrt(d) for l in range(d)]
        probs = [abs(np.vdot(b, psi)) ** 2 for b in basis0]
        assert probs == pytest.approx([0, 1, 0], abs=1e-12)

        r = run_round(cfg(), rng, forced=RoundChoices(x=x, y=y, J=0))
        assert r.valid
        assert r.a == 1
        assert r.x1_secret == 0

    def test_invalid_rounds_have_uniform_outcome(self, rng):
        config = cfg(check_fraction=0.0)
        counts = Counter()
        n = 0
        while n < 30_000:
            r = run_round(config, rng)
            if not r.valid:
                counts[r.a] += 1
                n += 1
                assert r.x1_secret is None
        assert all(within_3sigma(counts[a], n, 1 / 3) for a in range(3))

    def test_validity_ignores_x(self):
        config = cfg(d=5, n_recipients=3)
        for y_seed in range(30):
            yr = np.random.default_rng(y_seed)
            y = yr.integers(0, 5, 4).tolist()
            J = int(yr.integers(0, 5))
            flags = set()
            for x in itertools.islice(itertools.permutations([0, 1, 3, 4]), 10):
                r = run_round(config, np.random.default_rng(99), forced=RoundChoices(x=x, y=y, J=J))
                flags.add(r.valid)
            assert flags == {sum(y) % 5 == J}

    def test_state_tracking_along_relay(self, rng):
        class Watcher(Interceptor):
            def __init__(self):
                self.seen = []

            def intercept(self, pulse):
                self.seen.append(classify(pulse[0]))
                return pulse

        d, N = 7, 4
        watchers = [Watcher() for _ in range(N + 1)]
        taps = [ChannelTap(k + 1, w) for k, w in enumerate(watchers)]
        config = cfg(d=d, n_recipients=N)
        records = [run_round(config, rng, taps) for _ in range(50)]
        for i, r in enumerate(records):
            for k, w in enumerate(watchers, start=1):
                assert w.seen[i] == (sum(r.x[:k]) % d, sum(r.y[:k]) % d)

    def test_two_taps_on_one_link_rejected(self, rng):
        taps = [ChannelTap(1, Interceptor()), ChannelTap(1, Interceptor())]
        with pytest.raises(ValueError):
            run_round(cfg(), rng, taps)

    def test_tap_link_out_of_range(self, rng):
        with pytest.raises(ValueError):
            run_round(cfg(), rng, [ChannelTap(4, Interceptor())])

    def test_forced_choices_wrong_length(self, rng):
        with pytest.raises(ValueError):
            run_round(cfg(), rng, forced=RoundChoices(x=(1, 2)))

    def test_announcement_hides_distributor_data(self, rng):
        class Listener(Interceptor):
            def observe(self, ann):
                self.ann = ann

        ear = Listener()
        config = cfg(n_recipients=3, check_fraction=1.0)
        r = run_round(config, rng, [ChannelTap(2, ear)], forced=RoundChoices(y=(0, 0, 0, 0), J=0))
        assert set(ear.ann.y) == {2, 3, 4}
        assert set(ear.ann.x) == {2, 3, 4}
        assert not hasattr(ear.ann, "J") and not hasattr(ear.ann, "a")
        assert r.is_check_round


class TestReconstruct:
    def test_worked_shares(self):
        assert reconstruct_secret((2, 1), 3) == 0

    def test_zero_shares(self):
        assert reconstruct_secret((0, 0, 0), 7) == 0

    def test_negation(self):
        assert reconstruct_secret((1, 1, 1, 1), 5) == 1

    def test_share_count_checked(self):
        with pytest.raises(ValueError):
            reconstruct_secret((1, 2), 3, n_recipients=3)
        with pytest.raises(ValueError):
            reconstruct_secret((), 3)


class TestSession:
    def test_honest_session(self):
        t = run_session(cfg(n_rounds=10_000, check_fraction=0.1))
        assert t.verdict == "clean"
        assert t.observed_violation_rate == 0.0
        assert within_3sigma(t.n_valid, 10_000, 1 / 3)
        assert t.n_checks > 0

    def test_secret_stream_matches_reconstruction(self):
        t = run_session(cfg(d=5, n_recipients=4, n_rounds=3000))
        usable = [r for r in t.rounds if r.valid and not r.is_check_round]
        assert list(t.secret_stream) == [r.x1_secret for r in usable]
        for r in usable:
            assert reconstruct_secret(r.shares(), 5, 4) == r.x1_secret

    def test_no_checks_means_clean(self):
        t = run_session(cfg(check_fraction=0.0, link_noise=1.0, n_rounds=500))
        assert t.n_checks == 0
        assert t.verdict == "clean"

    def test_noise_trips_threshold(self):
        noisy = cfg(link_noise=0.5, n_rounds=3000)
        assert run_session(noisy).verdict == "corrupt"
        lenient = cfg(link_noise=0.5, n_rounds=3000, corruption_threshold=1.0)
        t = run_session(lenient)
        assert t.verdict == "clean" and t.observed_violation_rate > 0

    def test_verdict_follows_threshold(self):
        t = run_session(cfg(link_noise=0.3, n_rounds=3000, corruption_threshold=0.2))
        assert (t.verdict == "corrupt") == (t.observed_violation_rate > 0.2)

    def test_same_seed_same_rounds(self):
        a = run_session(cfg(seed=5))
        b = run_session(cfg(seed=5))
        assert a.rounds == b.rounds
        assert run_session(cfg(seed=6)).rounds != a.rounds

    def test_zero_rounds(self):
        t = run_session(cfg(n_rounds=0))
        assert t.rounds == () and t.verdict == "clean"


class TestAnnounceOrder:
    def test_single_recipient(self, rng):
        assert announce_order(rng, 1) == (2,)

    def test_seeded(self):
        a = announce_order(np.random.default_rng(3), 3)
        assert a == announce_order(np.random.default_rng(3), 3)
        assert sorted(a) == [2, 3, 4]

    def test_uniform_over_permutations(self, rng):
        n = 10_000
        counts = Counter(announce_order(rng, 3) for _ in range(n))
        assert len(counts) == 6
        assert all(within_3sigma(c, n, 1 / 6) for c in counts.values())

    def test_rejects_zero(self, rng):
        with pytest.raises(ValueError):
            announce_order(rng, 0)
