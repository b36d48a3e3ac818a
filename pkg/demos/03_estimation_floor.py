"""
Pilot-based channel estimation under coarse quantization
========================================================

LMMSE estimation from quantized pilots has a closed-form per-element MSE.
This script sweeps pilot power for several ADC resolutions on the first
hop, compares simulation against the formula, and shows the error floor
that coarse quantization pins in place no matter how hard the pilots are
driven.  The same machinery covers the second hop, checked at the end.
"""

import numpy as np

from relaysim import config as cfg
from relaysim.channel import substream
from relaysim.correlation import exponential_correlation, select_transmit_correlation
from relaysim.estimation import (mse_first_hop_closed_form,
                                 mse_second_hop_closed_form,
                                 pilot_mse_first_hop, pilot_mse_second_hop)
from relaysim.quantizer import IDEAL, AdcSpec

scn = cfg.table_defaults()            # N = 128, M = 256, K = 10
gains = scn.user_gains()
recv1 = exponential_correlation(scn.r_R, scn.N)
trials = 150
rng = substream(scn.seed, "demo-estimation")

print(f"first hop: N = {scn.N}, K = {scn.K}, tau = {scn.tau1}, "
      f"r = {scn.r_R}, {trials} trials per point")
print(f"{'P (dB)':>7} " + " ".join(f"{label:>22}"
      for label in ("q = 1", "q = 2", "ideal")))
print(f"{'':>7} " + " ".join(f"{'sim / closed':>22}" for _ in range(3)))

curves = {}
for p_db in (0, 10, 20, 30, 40):
    power = 10.0 ** (p_db / 10.0)
    cells = []
    for bits in (1, 2, IDEAL):
        adc = AdcSpec.from_bits(bits)
        sim, _ = pilot_mse_first_hop(recv1, gains, adc, scn.tau1, power,
                                     scn.sigma_R2, trials, rng)
        closed = mse_first_hop_closed_form(
            recv1, gains, adc, scn.tau1, power, scn.sigma_R2) / (scn.N * scn.K)
        cells.append(f"{sim:.5f} / {closed:.5f}")
        curves.setdefault(bits, {})[p_db] = closed
    print(f"{p_db:>7} " + " ".join(f"{c:>22}" for c in cells))

# the one-bit curve flattens: quantization noise, not thermal noise,
# limits the estimate once the pilots are strong enough
flat = curves[1][40] / curves[1][30]
drop = curves[IDEAL][40] / curves[IDEAL][30]
print(f"\nMSE(40 dB) / MSE(30 dB): one-bit {flat:.3f}, ideal {drop:.3f}")
print("the one-bit ratio near 1 is the quantization floor")

# ---------------------------------------------------------------------------
# second hop, one operating point
recv2 = exponential_correlation(scn.r_B, scn.M)
tx2 = select_transmit_correlation(scn.r_R, scn.N, scn.K)
eta = scn.relay_gain()
adc = AdcSpec.from_bits(2)
sim, se = pilot_mse_second_hop(recv2, tx2, eta, adc, scn.tau2, scn.P2,
                               scn.sigma_B2, trials, rng)
closed = mse_second_hop_closed_form(recv2, eta, adc, scn.tau2, scn.P2,
                                    scn.sigma_B2, scn.K) / (scn.M * scn.K)
print(f"\nsecond hop at P2 = {10 * np.log10(scn.P2):.0f} dB, q = 2: "
      f"simulated {sim:.6f} vs closed form {closed:.6f} "
      f"({abs(sim - closed) / se:.2f} standard errors)")
