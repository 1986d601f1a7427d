"""Photon statistics of a two-level emitter: closed form, Monte Carlo,
and the effect of a 300x decay-rate enhancement.

Simulates Hanbury Brown-Twiss histograms for a pumped two-level emitter
and for two merged independent emitters, overlays the closed forms
1 - exp(-tau/tau1)/n, and shows how a decay-rate enhancement narrows the
anti-bunching dip.  Finishes with the photon-rate budget chain.
"""

import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from miekerker import (TwoLevelModel, fit_antibunching, g2, g2_enhanced,
                       hbt_montecarlo, photon_budget)

HERE = pathlib.Path(__file__).parent

TAU0 = 31e-9                 # emitter lifetime in a low-index medium
model = TwoLevelModel(k12=0.1 / TAU0, k21=1 / TAU0)
print(f"tau0 = {model.tau0 * 1e9:.1f} ns, tau1 = {model.tau1 * 1e9:.2f} ns")

fig, axes = plt.subplots(1, 3, figsize=(13, 3.6))

# --- single emitter: MC vs closed form
hist = hbt_montecarlo(model, duration=4e-2, bin_width=model.tau1 / 6, seed=404)
fit = fit_antibunching(hist)
print(f"single emitter: {hist.n_coincidences} coincidences, "
      f"fitted tau1 = {fit.tau1 * 1e9:.2f} ns, g2(0) = {fit.g2_zero:.3f}")
ax = axes[0]
ax.errorbar(hist.tau * 1e9, hist.g2, hist.err, fmt=".", ms=3, lw=0.5,
            label="HBT Monte Carlo")
ax.plot(hist.tau * 1e9, g2(model, hist.tau), "-", label="1 - exp(-tau/tau1)")
ax.set_title("single emitter")

# --- two merged emitters: dip only reaches 1/2
hist2 = hbt_montecarlo(model, duration=4e-2, bin_width=model.tau1 / 6,
                       seed=404, n_emitters=2)
fit2 = fit_antibunching(hist2)
print(f"two emitters: fitted g2(0) = {fit2.g2_zero:.3f} (expect 0.5)")
ax = axes[1]
ax.errorbar(hist2.tau * 1e9, hist2.g2, hist2.err, fmt=".", ms=3, lw=0.5)
ax.plot(hist2.tau * 1e9, g2(model, hist2.tau, n_emitters=2), "-")
ax.axhline(0.5, color="gray", lw=0.5)
ax.set_title("two independent emitters")

# --- enhanced emitter: the dip narrows by the rate enhancement
enhanced = g2_enhanced(TwoLevelModel(k12=0.0, k21=1 / TAU0), 300.0)
print(f"300x enhancement: tau1 {31 / 300 * 1e3:.0f} ps")
tau = np.linspace(0, 5 * model.tau1, 400)
ax = axes[2]
ax.plot(tau * 1e9, g2(model, tau), label="bare (tau1 = 28 ns)")
ax.plot(tau * 1e9, 1 - np.exp(-tau / enhanced.tau1), label="enhanced (tau1 = 103 ps)")
ax.set_title("decay-rate enhancement 300x")
ax.legend()

for ax in axes:
    ax.set_xlabel("tau (ns)")
    ax.set_ylabel("g2")
    ax.set_ylim(-0.05, 1.3)
fig.tight_layout()
fig.savefig(HERE / "photon_statistics.png", dpi=150)
print(f"wrote {HERE / 'photon_statistics.png'}")

# --- the photon budget that the enhancement and CE buy
b = photon_budget(0.7, TAU0, 300.0, 0.75)
print(f"\nbudget: {b.base_rate / 1e6:.1f} MHz bare "
      f"-> {b.emission_rate / 1e9:.2f} GHz emitted "
      f"-> {b.collection_rate / 1e9:.2f} GHz collected")
