"""
Tour of the spike-computation blocks
====================================

Everything the controller does is built from five rate-coded primitives:
a PFM generator, a fixed-point rate divider, a saturating spike integrator,
a windowed rate differentiator, and the Hold&Fire stream merger.  This demo
exercises each one standalone.
"""

from edspid.clock import TICKS_PER_SECOND
from edspid.spikes import (DividerConfig, GAIN_ONE, RateCommand, SpikeEvent,
                           hold_and_fire, pfm_generate, rate_differentiate,
                           rate_divide, spike_integrate)

SECOND = TICKS_PER_SECOND

# --- PFM: a signed rate becomes a spike train --------------------------------
train = pfm_generate(RateCommand(1000.0), (0, SECOND))
print(f"PFM @ +1000/s over 1 s -> {len(train)} spikes, "
      f"first gap {train[1].at - train[0].at} ticks "
      f"({(train[1].at - train[0].at) * 20e-9 * 1e3:.2f} ms)")

train_neg = pfm_generate(RateCommand(-250.0), (0, 2 * SECOND))
print(f"PFM @ -250/s over 2 s  -> {len(train_neg)} spikes, "
      f"polarity {train_neg[0].polarity}")

# --- rate divider: gain = word / 2^15 ----------------------------------------
half = rate_divide(train, DividerConfig(k=GAIN_ONE // 2))
onefive = rate_divide(train, DividerConfig(k=3 * GAIN_ONE // 2))
print(f"divider k=16384 (x0.5) -> {len(half)} of {len(train)} spikes")
print(f"divider k=49152 (x1.5) -> {len(onefive)} of {len(train)} spikes")

# --- integrator: running net count with clamping -----------------------------
updown = train[:100] + [SpikeEvent(at=s.at + SECOND, polarity=-1)
                        for s in train[:40]]
state = spike_integrate(updown)
print(f"integrator after 100 up / 40 down -> {state.accumulator}")

# --- differentiator: windowed rate difference --------------------------------
window = SECOND // 100  # 10 ms
step = pfm_generate(RateCommand(2000.0), (5 * window, 20 * window))
diffs = [c.rate for c in rate_differentiate(step, window, end=12 * window)]
print("differentiator output per window boundary (spikes/s):")
print("  " + " ".join(f"{d:+7.0f}" for d in diffs))

# --- Hold & Fire: merge without losing net count -----------------------------
a = [SpikeEvent(at=42, polarity=1)]
b = [SpikeEvent(at=42, polarity=1)]
c = [SpikeEvent(at=42, polarity=-1)]
merged = hold_and_fire([a, b, c])
print(f"H&F of (+1, +1, -1) at the same tick -> "
      f"{[(s.at, s.polarity) for s in merged]} (net conserved, serialized)")
