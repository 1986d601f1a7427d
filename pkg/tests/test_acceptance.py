"""Acceptance suite: every release criterion at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to get one PASS/FAIL
line per criterion.
"""

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import LAMBDA_NM, oracle_sphere_grid, cubic_sphere_points
from miekerker.emitter import (TwoLevelModel, fit_antibunching, g2,
                               g2_enhanced, hbt_montecarlo,
                               mirror_decay_rate_exact, photon_budget,
                               relative_decay_rate)
from miekerker.farfield import (RadiationPattern, collection_efficiency,
                                kerker_metrics, pattern,
                                scattering_amplitudes)
from miekerker.fields import (FieldGrid, PlaneWave, PointDipole,
                              extinction_cross_section,
                              scattering_cross_section, solve)
from miekerker.mie import MieCoefficients, mie_coefficients, mie_efficiencies
from miekerker.multipole import decompose, to_mie_moments


def report(name: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}" + (f"  ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_01_first_kerker_null():
    rng = np.random.default_rng(17)
    worst = 0.0
    for _ in range(5):
        amp = complex(rng.normal(), rng.normal())
        c = MieCoefficients.from_amplitudes([amp], [amp])
        p = pattern(c, 181, 8)
        worst = max(worst, np.max(p.intensity[-1]) / np.max(p.intensity[0]))
    report("1. first Kerker null I(pi) <= 1e-20 I(0)", worst <= 1e-20,
           f"worst ratio {worst:.2e}")


def test_02_generalized_kerker_forward_amplitude():
    c = MieCoefficients.from_amplitudes([1.0, 1.0], [1.0, 1.0])
    s_par0, s_perp0 = scattering_amplitudes(c, 0.0)
    s_par_pi, s_perp_pi = scattering_amplitudes(c, np.pi)
    ok_fwd = (abs(s_par0 - 8.0) < 1e-12 and abs(s_perp0 - 8.0) < 1e-12)
    ok_bwd = (abs(s_par_pi) < 1e-12 and abs(s_perp_pi) < 1e-12)
    d_gen = kerker_metrics(pattern(c, 721, 8)).directivity
    d_first = kerker_metrics(
        pattern(MieCoefficients.from_amplitudes([1.0], [1.0]), 721, 8)).directivity
    report("2. generalized Kerker: S(0)=8, S(pi)=0, directivity beats dipole pair",
           ok_fwd and ok_bwd and d_gen > d_first,
           f"S(0)={s_par0:.3f}, D_gen={d_gen:.3f} vs D_first={d_first:.3f}")


def test_03_duality_symmetry():
    rng = np.random.default_rng(23)
    worst = 0.0
    for n_orders in (1, 2, 4):
        amps = rng.normal(size=n_orders) + 1j * rng.normal(size=n_orders)
        c = MieCoefficients.from_amplitudes(amps, amps)
        p = pattern(c, 181, 8)
        dev = np.max(np.abs(p.cut(0.0) - p.cut(np.pi / 2))) / p.intensity.max()
        worst = max(worst, dev)
    report("3. duality symmetry: balanced moments give identical cuts",
           worst <= 1e-12, f"max relative cut difference {worst:.2e}")


def test_04_pattern_integral_vs_series():
    worst = 0.0
    for x in (0.5, 1.0, 2.0):
        for m in (1.5, 2.0 + 0.1j):
            c = mie_coefficients(x, m)
            sigma = pattern(c, 721, 72, k0=x).total_power()  # radius 1
            expect = mie_efficiencies(c).q_sca * np.pi
            worst = max(worst, abs(sigma - expect) / expect)
    report("4. Mie pattern integral matches series cross-section to 1e-6",
           worst <= 1e-6, f"worst relative deviation {worst:.2e}")


def test_05_decomposition_round_trip():
    g = oracle_sphere_grid(0.8, 2.0, voxels_per_radius=10)
    c = mie_coefficients(0.8, 2.0)
    cm = to_mie_moments(decompose(g, origin=(0, 0, 0)), g.k0, 1.0)
    devs = [abs(mine - orc) / abs(orc)
            for mine, orc in [(cm.a[0], c.a[0]), (cm.b[0], c.b[0]),
                              (cm.a[1], c.a[1]), (cm.b[1], c.b[1])]]

    g_ray = oracle_sphere_grid(0.01, 1.5, voxels_per_radius=12)
    c_ray = mie_coefficients(0.01, 1.5)
    cm_ray = to_mie_moments(decompose(g_ray, origin=(0, 0, 0)), g_ray.k0, 1.0)
    dev_a1 = abs(cm_ray.a[0] - c_ray.a[0]) / abs(c_ray.a[0])
    others = max(abs(cm_ray.b[0]), abs(cm_ray.a[1]), abs(cm_ray.b[1])) / abs(cm_ray.a[0])
    report("5. round-trip: x=0.8 within 5%, Rayleigh within 2% and clean",
           max(devs) <= 0.05 and dev_a1 <= 0.02 and others < 1e-4,
           f"x=0.8 worst {max(devs):.3f}, Rayleigh a1 {dev_a1:.4f}, "
           f"others/a1 {others:.1e}")


def test_06_solver_vs_oracle():
    x, m = 0.5, 1.5
    radius = x / (2 * np.pi / LAMBDA_NM)
    pts, res = cubic_sphere_points(radius, 10)
    grid = FieldGrid(points=pts, cell_volume=res**3, epsilon_r=m**2,
                     wavelength=LAMBDA_NM, source=PlaneWave(),
                     lattice_spacing=res)
    solved = solve(grid)
    q_dda = extinction_cross_section(solved) / (np.pi * radius**2)
    q_mie = mie_efficiencies(mie_coefficients(x, m)).q_ext
    c_sca = scattering_cross_section(solved)
    c_ext = extinction_cross_section(solved)
    dev = abs(q_dda - q_mie) / q_mie
    energy = abs(c_sca - c_ext) / c_ext
    report("6. coupled-dipole extinction within 5% of Mie, energy closed to 2%",
           dev <= 0.05 and energy <= 0.02,
           f"Q_ext dev {dev:.3f}, |Csca-Cext|/Cext {energy:.2e}")


def test_07_collection_efficiency_closed_forms():
    theta = np.linspace(0.0, np.pi, 721)
    phi = np.arange(72) * (2 * np.pi / 72)
    iso = RadiationPattern(theta=theta, phi=phi,
                           intensity=np.ones((721, 72)))
    ce_iso = collection_efficiency(iso, 0.9, "top")
    expect_iso = (1.0 - np.cos(np.arcsin(0.9))) / 2.0

    dip = RadiationPattern(theta=theta, phi=phi,
                           intensity=np.repeat(np.sin(theta)[:, None] ** 2, 72, axis=1))
    ce_dip = collection_efficiency(dip, 0.9, "top")
    theta_c = np.arcsin(0.9)
    num, _ = quad(lambda t: np.sin(t) ** 3, 0.0, theta_c)
    den, _ = quad(lambda t: np.sin(t) ** 3, 0.0, np.pi)
    report("7. CE closed forms: isotropic 0.28206, sin^2 dipole vs 1D integral",
           abs(ce_iso - expect_iso) <= 1e-3 and abs(ce_iso - 0.28206) <= 1e-3
           and abs(ce_dip - num / den) <= 1e-3,
           f"iso {ce_iso:.5f} (expect {expect_iso:.5f}), "
           f"dipole {ce_dip:.5f} (oracle {num / den:.5f})")


def test_08_photon_budget_chain():
    b = photon_budget(0.7, 31e-9, 300.0, 0.75)
    # printed chain: ~22 MHz -> 300 x 22e6 = 6.6 GHz -> 0.75 x 6.6 ~ 5 GHz
    ok = (abs(b.base_rate - 22e6) / 22e6 <= 0.03
          and abs(b.emission_rate - 6.6e9) / 6.6e9 <= 0.03
          and abs(b.collection_rate - 5e9) / 5e9 <= 0.03
          and b.emission_rate == b.base_rate * 300.0
          and b.collection_rate == b.emission_rate * 0.75)
    report("8. photon budget reproduces 22 MHz -> 6.6 GHz -> ~5 GHz",
           ok, f"{b.base_rate / 1e6:.2f} MHz -> {b.emission_rate / 1e9:.2f} GHz "
               f"-> {b.collection_rate / 1e9:.2f} GHz")


def test_09_g2_suite():
    model = TwoLevelModel(k12=0.1e8, k21=1e8)
    ok_zero = g2(model, 0.0) == 0.0
    ok_tau1 = abs(g2(model, model.tau1) - (1.0 - np.exp(-1.0))) <= 1e-12

    hist = hbt_montecarlo(model, duration=2e-2, bin_width=model.tau1 / 6, seed=101)
    dev = np.max(np.abs(hist.g2 - g2(model, hist.tau)) / hist.err)

    hist2 = hbt_montecarlo(model, duration=2e-2, bin_width=model.tau1 / 6,
                           seed=21, n_emitters=2)
    fit2 = fit_antibunching(hist2)
    ok_n2 = abs(fit2.g2_zero - 0.5) <= 0.02
    report("9. g2: zeros, 1-1/e point, MC within 3 sigma, n=2 fit at 0.5",
           ok_zero and ok_tau1 and dev < 3.0 and ok_n2,
           f"max MC dev {dev:.2f} sigma, n=2 g2(0) {fit2.g2_zero:.3f}")


def test_10_antibunching_scaling():
    # the pump is rescaled with the decay rate (as an experiment would do to
    # keep the count rate up); a pump held fixed while k21 grows 300x leaves
    # the narrowed dip without coincidences at any feasible duration
    base = TwoLevelModel(k12=0.05e8, k21=1e8)
    enhanced = TwoLevelModel(k12=base.k12 * 300.0, k21=base.k21 * 300.0)
    assert enhanced.k21 == g2_enhanced(base, 300.0).k21
    h_base = hbt_montecarlo(base, duration=4e-2, bin_width=base.tau1 / 6, seed=31)
    h_enh = hbt_montecarlo(enhanced, duration=4e-2 / 300.0,
                           bin_width=enhanced.tau1 / 6, seed=32)
    t_base = fit_antibunching(h_base).tau1
    t_enh = fit_antibunching(h_enh).tau1
    shrink = t_base / t_enh
    report("10. enhancement 300 shrinks fitted tau1 by 300 +/- 5%",
           abs(shrink - 300.0) / 300.0 <= 0.05, f"shrink factor {shrink:.1f}")


def test_11_relative_decay_rate():
    src = PointDipole(position=(0.0, 0.0, 0.0), moment=(0, 0, 1e-30))

    def empty(mirror_z=None, position=(0.0, 0.0, 0.0)):
        return solve(FieldGrid(
            points=np.zeros((0, 3)), cell_volume=np.zeros(0),
            epsilon_r=np.zeros(0), wavelength=LAMBDA_NM,
            source=PointDipole(position=position, moment=(0, 0, 1e-30)),
            mirror_z=mirror_z))

    vac = relative_decay_rate(empty(), empty()).relative_rate
    ok_vac = abs(vac - 1.0) <= 0.01

    k0 = 2 * np.pi / LAMBDA_NM
    worst = 0.0
    for kd in np.linspace(0.5, 10.0, 8):
        d_nm = kd / k0
        rate = relative_decay_rate(empty(mirror_z=0.0, position=(0, 0, d_nm)),
                                   empty(position=(0, 0, d_nm))).relative_rate
        worst = max(worst, abs(rate - mirror_decay_rate_exact(kd))
                    / mirror_decay_rate_exact(kd))
    report("11. decay rate: vacuum unity within 1%, mirror curve within 3%",
           ok_vac and worst <= 0.03,
           f"vacuum {vac:.4f}, worst mirror dev {worst:.2e}")


def test_12_qualitative_targets_documented():
    """Trend-level targets that the substituted solver reaches only
    qualitatively; documented here, not asserted with tight tolerances."""
    # cheap assertable part: reflector-spacing periodicity of the rate
    kds = np.linspace(0.5, 12.0, 80)
    rates = np.array([mirror_decay_rate_exact(kd) for kd in kds])
    crossings = int(np.sum(np.diff(np.sign(rates - 1.0)) != 0))
    print("\n[DOC ] 12. qualitative targets (trend-level only):")
    print(f"[DOC ]     decay rate vs mirror spacing oscillates about 1 "
          f"({crossings} crossings over kd in [0.5, 12]) - periodic reflections")
    print("[DOC ]     L-sweep moment trends (EQ-dominant near L~170 nm, "
          "near-balanced moments near L~340 nm): run demos/antenna_length_sweep.py")
    print("[DOC ]     the exact FEM figures (80% CE, 400x peak, D=310/620 nm "
          "resonances) are out of reach of the desk-scale volume solver")
    assert crossings >= 5
