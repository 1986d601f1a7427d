"""Far-field patterns of superposed Mie moments: first and generalized
Kerker conditions.

Three moment sets are compared:
  * a1 = b1 = 1          -- first Kerker condition (backward null)
  * a1 = b1 = a2 = b2 = 1 -- generalized Kerker condition (stronger
                             forward directivity, still a backward null)
  * a1 = b1 = a2 = 1, b2 = 2 -- near-balanced moments: in-plane and
                             out-of-plane cuts almost coincide

Writes polar-cut CSV files and a polar figure next to this script.
"""

import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from miekerker import MieCoefficients, kerker_metrics, pattern

HERE = pathlib.Path(__file__).parent
CASES = {
    "first_kerker": MieCoefficients.from_amplitudes([1, 0], [1, 0]),
    "generalized_kerker": MieCoefficients.from_amplitudes([1, 1], [1, 1]),
    "near_balanced": MieCoefficients.from_amplitudes([1, 1], [1, 2]),
}

fig, axes = plt.subplots(1, 3, subplot_kw={"projection": "polar"},
                         figsize=(12, 4))
for ax, (name, c) in zip(axes, CASES.items()):
    p = pattern(c, n_theta=721, n_phi=72)
    m = kerker_metrics(p)
    print(f"{name}: directivity {m.directivity:.2f}, "
          f"backward/forward {m.backward_intensity / m.forward_intensity:.2e}")

    # in-plane and out-of-plane cuts over the full meridian circle
    inplane = p.cut(0.0) / p.intensity.max()
    outplane = p.cut(np.pi / 2) / p.intensity.max()
    th_full = np.concatenate([p.theta, 2 * np.pi - p.theta[::-1]])
    ax.plot(th_full, np.concatenate([inplane, inplane[::-1]]), label="in-plane")
    ax.plot(th_full, np.concatenate([outplane, outplane[::-1]]), "--",
            label="out-of-plane")
    ax.set_title(name.replace("_", " "), pad=18)
    ax.set_theta_zero_location("N")

    np.savetxt(HERE / f"{name}_cuts.csv",
               np.column_stack([np.degrees(p.theta), inplane, outplane]),
               delimiter=",", header="theta_deg,inplane,outplane", comments="")

axes[0].legend(loc="lower right", bbox_to_anchor=(1.1, -0.15))
fig.tight_layout()
fig.savefig(HERE / "kerker_patterns.png", dpi=150)
print(f"wrote {HERE / 'kerker_patterns.png'}")
