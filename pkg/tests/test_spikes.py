import pytest
from hypothesis import given, settings, strategies as st

from edspid.clock import Scheduler, TICKS_PER_SECOND
from edspid.spikes import (DividerConfig, GAIN_ONE, HoldAndFire, PfmGenerator,
                           RateCommand, RateDivider, RateOverflow, SpikeEvent,
                           SpikeIntegrator, hold_and_fire, pfm_generate,
                           rate_differentiate, rate_divide, spike_integrate)

SECOND = TICKS_PER_SECOND


# ---------------------------------------------------------------------------
# PFM generation

def test_zero_rate_emits_nothing():
    assert pfm_generate(RateCommand(0.0), (0, SECOND)) == []


def test_positive_rate_count_and_spacing():
    spikes = pfm_generate(RateCommand(1000.0), (0, SECOND))
    # closed form: 1000 spikes/s for 1 s, interval divides the window evenly
    assert len(spikes) == 1000
    assert all(s.polarity == 1 for s in spikes)
    gaps = {b.at - a.at for a, b in zip(spikes, spikes[1:])}
    assert gaps == {50_000}


def test_count_tracks_rate_for_awkward_intervals():
    # 300 kHz: the ideal 166.67-tick interval cannot be a constant tick gap;
    # phase carry-over must absorb the rounding
    spikes = pfm_generate(RateCommand(300_000.0), (0, SECOND // 10))
    assert abs(len(spikes) - 30_000) <= 1


def test_negative_rate_polarity_and_count():
    spikes = pfm_generate(RateCommand(-250.0), (0, 2 * SECOND))
    assert abs(len(spikes) - 500) <= 1
    assert all(s.polarity == -1 for s in spikes)


def test_rate_overflow_rejected():
    with pytest.raises(RateOverflow):
        pfm_generate(RateCommand(600_000.0), (0, SECOND))


def test_empty_window_rejected():
    with pytest.raises(ValueError):
        pfm_generate(RateCommand(100.0), (10, 10))


@settings(max_examples=300, deadline=None)
@given(rate=st.floats(min_value=1.0, max_value=500_000.0),
       n_intervals=st.integers(min_value=100, max_value=400))
def test_pfm_rate_fidelity(rate, n_intervals):
    # window of >= 100 nominal inter-spike intervals
    window = (0, max(1, round(n_intervals * SECOND / rate)))
    spikes = pfm_generate(RateCommand(rate), window)
    expected = rate * window[1] / SECOND
    assert abs(len(spikes) - expected) <= 1


def test_online_generator_matches_offline_at_constant_rate():
    sched = Scheduler()
    got = []
    gen = PfmGenerator(sched, "g", lambda p: got.append((sched.now, p)))
    gen.set_rate(777.0)
    sched.run_until(SECOND)
    offline = pfm_generate(RateCommand(777.0), (0, SECOND))
    assert got == [(s.at, s.polarity) for s in offline]


def test_rate_updates_preserve_phase():
    # re-asserting the same rate every 1 ms must not suppress spikes: the
    # integral path retargets its generator far more often than it fires
    sched = Scheduler()
    got = []
    gen = PfmGenerator(sched, "g", lambda p: got.append(sched.now))
    gen.set_rate(100.0)
    for ms in range(1, 1001):
        sched.run_until(ms * (SECOND // 1000))
        gen.set_rate(100.0)
    assert abs(len(got) - 100) <= 1


def test_generator_rate_is_clamped_not_faulted():
    sched = Scheduler()
    got = []
    gen = PfmGenerator(sched, "g", lambda p: got.append(p), rate_max=1000.0)
    gen.set_rate(5000.0)
    assert gen.rate == 1000.0
    gen.set_rate(-123.0)
    assert gen.rate == -123.0


# ---------------------------------------------------------------------------
# Rate divider

def _spike_train(n, polarity=1, spacing=1000, start=0, channel="in"):
    return [SpikeEvent(at=start + i * spacing, polarity=polarity,
                       channel=channel) for i in range(n)]


def test_unity_gain_passes_every_spike():
    stream = _spike_train(1000)
    out = rate_divide(stream, DividerConfig(k=GAIN_ONE))
    assert len(out) == len(stream)


def test_zero_gain_blocks_everything():
    assert rate_divide(_spike_train(500), DividerConfig(k=0)) == []


def test_half_gain_emits_500_of_1000():
    # oracle: accumulator walk, 16384 per spike, crossing 32768 every 2nd
    acc, crossings = 0, 0
    for _ in range(1000):
        acc += 16384
        if acc >= GAIN_ONE:
            acc -= GAIN_ONE
            crossings += 1
    assert crossings == 500
    out = rate_divide(_spike_train(1000), DividerConfig(k=16384))
    assert len(out) == 500
    assert all(s.polarity == 1 for s in out)


def test_gain_above_one_duplicates_spikes():
    # k = 49152 -> gain 1.5: 1000 inputs -> 1500 outputs by the same walk
    out = rate_divide(_spike_train(1000), DividerConfig(k=49152))
    assert len(out) == 1500


@settings(max_examples=300, deadline=None)
@given(k=st.integers(min_value=0, max_value=0xFFFF),
       polarities=st.lists(st.sampled_from((1, -1)), min_size=1, max_size=500))
def test_divider_net_count_follows_gain(k, polarities):
    divider = RateDivider(k)
    net_out = sum(p for spike in polarities for p in divider.feed(spike))
    net_in = sum(polarities)
    assert abs(net_out - net_in * k / GAIN_ONE) < 1.0 + 1e-9


def test_cascaded_dividers_compose():
    stream = _spike_train(4000)
    g1, g2 = 20000, 24000
    once = rate_divide(rate_divide(stream, DividerConfig(g1)), DividerConfig(g2))
    combined_k = round(g1 * g2 / GAIN_ONE)
    direct = rate_divide(stream, DividerConfig(combined_k))
    assert abs(len(once) - len(direct)) <= 2


# ---------------------------------------------------------------------------
# Integrator

def test_opposite_spikes_cancel():
    stream = _spike_train(10, 1) + _spike_train(10, -1, start=100_000)
    assert spike_integrate(stream).accumulator == 0


def test_positive_spikes_count():
    assert spike_integrate(_spike_train(100)).accumulator == 100


def test_integrator_saturates_at_acc_max():
    acc_max = 1 << 20
    integ = SpikeIntegrator(acc_max)
    for _ in range(1 << 21):
        integ.feed(1)
    assert integ.value == acc_max
    integ.feed(1)
    assert integ.value == acc_max  # clamped, not wrapped
    integ.feed(-1)
    assert integ.value == acc_max - 1


@settings(max_examples=300, deadline=None)
@given(acc_max=st.integers(min_value=1, max_value=50),
       polarities=st.lists(st.sampled_from((1, -1)), max_size=300))
def test_integrator_is_clamped_running_sum(acc_max, polarities):
    integ = SpikeIntegrator(acc_max)
    clamped = 0
    for p in polarities:
        clamped = max(-acc_max, min(acc_max, clamped + p))
        integ.feed(p)
        assert integ.value == clamped


# ---------------------------------------------------------------------------
# Differentiator

WINDOW = SECOND // 100  # 10 ms


def _periodic(rate_hz, start, end):
    # exact constant-rate train, offset half an interval so no spike sits on
    # a window boundary
    gap = SECOND // rate_hz
    return [SpikeEvent(at=t, polarity=1)
            for t in range(start + gap // 2, end, gap)]


def test_constant_rate_differentiates_to_zero():
    stream = _periodic(1000, 0, 10 * WINDOW)
    rates = [c.rate for c in rate_differentiate(stream, WINDOW, end=10 * WINDOW)]
    assert rates[0] == pytest.approx(1000.0)
    assert all(r == 0.0 for r in rates[1:])


def test_rate_step_produces_one_pulse():
    # silent first window, then 1000/s from the boundary onward
    stream = _periodic(1000, WINDOW, 4 * WINDOW)
    rates = [c.rate for c in rate_differentiate(stream, WINDOW, end=4 * WINDOW)]
    assert rates == [0.0, pytest.approx(1000.0), 0.0, 0.0]


def test_empty_input_differentiates_to_zero():
    rates = rate_differentiate([], WINDOW, end=5 * WINDOW)
    assert [c.rate for c in rates] == [0.0] * 5


# ---------------------------------------------------------------------------
# Hold & Fire

def test_opposite_same_tick_spikes_cancel():
    a = [SpikeEvent(at=42, polarity=1)]
    b = [SpikeEvent(at=42, polarity=-1)]
    assert hold_and_fire([a, b]) == []


def test_equal_same_tick_spikes_serialize():
    a = [SpikeEvent(at=42, polarity=1)]
    b = [SpikeEvent(at=42, polarity=1)]
    out = hold_and_fire([a, b])
    assert [(s.at, s.polarity) for s in out] == [(42, 1), (43, 1)]


def test_three_stream_net_count_conserved():
    # oracle: brute-force signed sum over all inputs
    streams = [
        _spike_train(40, 1, spacing=700),
        _spike_train(25, -1, spacing=1100, start=350),
        _spike_train(17, 1, spacing=1300, start=90),
    ]
    net_in = sum(s.polarity for stream in streams for s in stream)
    assert net_in == 32
    out = hold_and_fire(streams)
    assert sum(s.polarity for s in out) == 32


def test_hold_and_fire_needs_input():
    with pytest.raises(ValueError):
        hold_and_fire([])


@settings(max_examples=300, deadline=None)
@given(st.lists(
    st.lists(st.tuples(st.integers(min_value=0, max_value=2000),
                       st.sampled_from((1, -1))), max_size=60),
    min_size=1, max_size=4))
def test_hold_and_fire_conservation(raw_streams):
    streams = [[SpikeEvent(at=t, polarity=p) for t, p in stream]
               for stream in raw_streams]
    out = hold_and_fire(streams)
    assert sum(s.polarity for s in out) == sum(
        s.polarity for stream in streams for s in stream)
    # one spike per tick at most
    ticks = [s.at for s in out]
    assert len(ticks) == len(set(ticks))


def test_spike_trace_dump(tmp_path):
    from edspid.spikes import dump_spike_trace
    stream = pfm_generate(RateCommand(-500.0, channel="j1.out"), (0, SECOND // 10))
    path = tmp_path / "spikes.tsv"
    n = dump_spike_trace(stream, path)
    lines = path.read_text().splitlines()
    assert n == len(stream) == len(lines)
    tick, channel, polarity = lines[0].split("\t")
    assert int(tick) == stream[0].at
    assert channel == "j1.out"
    assert polarity == "-1"


def test_online_merger_matches_offline():
    raw = [[(10, 1), (10, 1), (12, -1)],
           [(10, -1), (11, 1), (12, 1)],
           [(500, 1), (500, 1), (500, 1)]]
    offline = hold_and_fire([[SpikeEvent(at=t, polarity=p) for t, p in s]
                             for s in raw])

    sched = Scheduler()
    got = []
    merger = HoldAndFire(sched, "m", lambda p: got.append((sched.now, p)))
    for stream in raw:
        for t, p in stream:
            sched.schedule(t, lambda p=p: merger.receive(p))
    sched.run_until(1000)
    assert got == [(s.at, s.polarity) for s in offline]
