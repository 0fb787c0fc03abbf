import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fockbench import analysis, scenarios
from fockbench.dynamics import accumulated_phase
from fockbench.elements import (
    Displace,
    KerrWait,
    Measure,
    MeasureKind,
    PhaseProfile,
    Prism,
    Pump,
    average_trajectories,
    design_lens,
    ideal_image,
    imaging_plan,
    local_kerr,
    run_elements,
)
from fockbench.errors import DomainError
from fockbench.hilbert import (
    DEVICE,
    StateVector,
    coherent_state,
    dg_state,
    fidelity,
    fock_state,
    gaussian_state,
    khz,
    moments,
    to_mhz,
)

SQRT150 = math.sqrt(150)


def test_design_lens_device_values():
    lens = design_lens(150, 4.684, DEVICE)
    assert to_mhz(lens.delta_L) == pytest.approx(0.337, abs=5e-4)
    assert to_mhz(lens.delta_L) == pytest.approx(0.33, abs=0.01)
    assert 1e3 * to_mhz(local_kerr(150, DEVICE)) == pytest.approx(2.33, abs=0.005)


def test_design_lens_two_photon_boundary():
    p = DEVICE.with_(k6=0.0)
    assert design_lens(1, 1.0, p).delta_L == pytest.approx(p.k4 / 2)


def test_design_lens_curvature_matches_phase():
    lens = design_lens(150, 4.684, DEVICE)
    phi = accumulated_phase(DEVICE.with_(delta=lens.delta_L), 300, lens.t_phi)
    curvature = phi[151] - 2 * phi[150] + phi[149]
    assert lens.phi0 == pytest.approx(curvature / 2, rel=1e-9)
    assert abs(phi[151] - phi[149]) / 2 <= 1e-3 * lens.phi0  # stationary at 150


def test_design_lens_errors():
    with pytest.raises(DomainError):
        design_lens(150, 0.0, DEVICE)
    with pytest.raises(DomainError):
        design_lens(150, 1.0, DEVICE.with_(k4=0.0))


def test_imaging_plan_examples():
    p = imaging_plan(0.288, 0.144, 150)
    assert p.t_v == pytest.approx(0.288) and p.M == pytest.approx(1.0)
    p = imaging_plan(0.25, 0.144, 150)
    assert round(1e3 * p.t_v) == 340
    assert p.M == pytest.approx(1.36, abs=0.005)
    assert imaging_plan(math.inf, 0.144, 150).t_v == 0.144
    with pytest.raises(DomainError):
        imaging_plan(0.1, 0.144, 150)
    with pytest.raises(DomainError):
        imaging_plan(0.144, 0.144, 150)


@given(st.floats(0.01, 1.0), st.floats(1.01, 100.0))
def test_imaging_identity(t_f, ratio):
    p = imaging_plan(t_f * ratio, t_f, 150)
    assert p.residual() <= 1e-9
    assert p.M == pytest.approx(p.t_v / p.t_u)


def test_ideal_image_mirror_at_unit_magnification():
    obj = dg_state(135, 165, 1, 2, 0, 3, 301).amps
    img = ideal_image(obj, 1.0, 150)
    for k in range(1, 40):
        assert abs(img[150 + k]) == pytest.approx(abs(obj[150 - k]), abs=1e-12)


def test_ideal_image_fixed_point():
    obj = fock_state(150, 301).amps
    img = np.abs(ideal_image(obj, 1.36, 150)) ** 2
    # linear interpolation spreads the spike onto its neighbours, symmetrically
    assert int(np.argmax(img)) == 150
    assert img @ np.arange(301) == pytest.approx(150, abs=1e-12)


def test_ideal_image_dg_peaks():
    obj = dg_state(135, 165, 1, 1, 0, scenarios.SLIT_WIDTH, 512).amps
    img = np.abs(ideal_image(obj, 1.36, 150)) ** 2
    fit = analysis.fit_two_gaussians(img)
    assert fit.peak1.mean == pytest.approx(150 - 1.36 * 15, abs=0.2)
    assert fit.peak2.mean == pytest.approx(150 + 1.36 * 15, abs=0.2)
    assert fit.separation == pytest.approx(40.8, abs=0.3)


def test_ideal_image_inverts_heights():
    obj = dg_state(135, 165, 1, 2, 0, scenarios.SLIT_WIDTH, 512).amps
    fit = analysis.fit_two_gaussians(np.abs(ideal_image(obj, 1.36, 150)) ** 2)
    assert fit.height_ratio == pytest.approx(0.25, rel=0.02)
    with pytest.raises(DomainError):
        ideal_image(obj, 0.0, 150)


def test_empty_sequence():
    s = coherent_state(3.0, 40)
    out, recs = run_elements(s, [], DEVICE)
    assert out is s and recs == []


@given(st.floats(-math.pi, math.pi), st.floats(0, 5), st.floats(-3, 3))
def test_prism_and_kerr_wait_commute(phi_p, t, delta_mhz):
    s = coherent_state(SQRT150, 512)
    a, _ = run_elements(s, [Prism(phi_p), KerrWait(t, 2 * math.pi * delta_mhz)], DEVICE)
    b, _ = run_elements(s, [KerrWait(t, 2 * math.pi * delta_mhz), Prism(phi_p)], DEVICE)
    assert np.max(np.abs(a.amps - b.amps)) <= 1e-12


def test_measure_is_non_destructive_and_cursor_advances():
    s = coherent_state(SQRT150, 512)
    steps = [Measure(MeasureKind.POPULATIONS, "a"), Pump(DEVICE.eps_p, 0.0, 0.05),
             Measure(MeasureKind.MOMENTS, "b"), KerrWait(0.2, 0.0), Measure(MeasureKind.POPULATIONS, "c")]
    out, recs = run_elements(s, steps, DEVICE)
    bare, _ = run_elements(s, [st_ for st_ in steps if not isinstance(st_, Measure)], DEVICE)
    assert np.array_equal(out.amps, bare.amps)
    assert [r.label for r in recs] == ["a", "b", "c"]
    assert [r.time_cursor for r in recs] == pytest.approx([0.0, 0.05, 0.25])
    assert recs[1].populations is None
    assert recs[0].mean == pytest.approx(150, abs=1e-6)


def test_phase_profile_and_displace_elements():
    s = fock_state(0, 64)
    out, _ = run_elements(s, [Displace(2.0), PhaseProfile(lambda n: 0.3 * n)], DEVICE)
    assert fidelity(out, coherent_state(2.0 * np.exp(0.3j), 64)) == pytest.approx(1.0, abs=1e-9)


def test_element_duration_validation():
    with pytest.raises(DomainError):
        KerrWait(-1.0, 0.0)
    with pytest.raises(DomainError):
        Pump(1.0, 0.0, -0.1)


def test_lens_focus_example():
    lens = design_lens(150, 4.684, DEVICE)
    steps = [KerrWait(lens.t_phi, lens.delta_L)]
    steps += [Pump(DEVICE.eps_p, lens.delta_L, 0.01)] * 10
    steps += [x for _ in range(6) for x in (Pump(DEVICE.eps_p, lens.delta_L, 0.005), Measure(MeasureKind.POPULATIONS, "f"))]
    _, recs = run_elements(coherent_state(SQRT150, 512), steps, DEVICE)
    assert max(r.populations[150] for r in recs) >= 0.17


def test_dg_central_fringe_suppressed_at_pattern_center():
    c = int(round(scenarios.pattern_center(130.0, 170.0)))
    p0 = scenarios.slit_pattern(130.0, 170.0, 1.0, 1.0, 0.0)
    ppi = scenarios.slit_pattern(130.0, 170.0, 1.0, 1.0, math.pi)
    assert p0[c] / ppi[c] >= 5


@pytest.mark.xfail(strict=True, reason="the pattern drifts about 9.5 photons up; n=150 is a dark fringe at theta=0")
def test_dg_central_fringe_suppressed_at_150():
    p0 = scenarios.slit_pattern(130.0, 170.0, 1.0, 1.0, 0.0)
    ppi = scenarios.slit_pattern(130.0, 170.0, 1.0, 1.0, math.pi)
    assert p0[150] / ppi[150] >= 5


def test_interference_is_2pi_periodic_and_shifts_monotonically():
    res = scenarios.figure_s7()
    assert res.metrics["periodicity_corr"].value >= 0.95
    assert res.metrics["fringe_shift_monotone"].passed


def test_imaging_inverts_height_order():
    _, _, image, _ = scenarios.imaging_run(1.0, 2.0)
    assert analysis.fit_two_gaussians(image.populations).height_ratio < 1
    _, _, image, _ = scenarios.imaging_run(2.0, 1.0)
    assert analysis.fit_two_gaussians(image.populations).height_ratio > 1


@pytest.mark.xfail(strict=True, reason="non-paraxial chief ray: separation 48.5 vs 40.8")
def test_imaging_separation_matches_ideal_image():
    plan, _, image, ideal = scenarios.imaging_run(1.0, 2.0)
    got = analysis.fit_two_gaussians(image.populations).separation
    want = analysis.fit_two_gaussians(ideal).separation
    assert abs(got / want - 1) <= 0.10


def test_dissipative_run_requires_rng_and_averages():
    p = DEVICE.with_(kappa=0.5)
    s = fock_state(3, 12)
    steps = [KerrWait(1.0, 0.0), Measure(MeasureKind.POPULATIONS, "m")]
    with pytest.raises(DomainError):
        run_elements(s, steps, p)
    recs = average_trajectories(s, steps, p, trials=300, seed=2)
    pops = recs[0].populations
    assert pops.sum() == pytest.approx(1.0)
    # each photon survives with probability exp(-kappa t): binomial occupation
    surv = math.exp(-0.5)
    expect = [math.comb(3, k) * surv**k * (1 - surv) ** (3 - k) for k in range(4)]
    np.testing.assert_allclose(pops[:4], expect, atol=5 * recs[0].stderr[:4].max() + 0.01)
    again = average_trajectories(s, steps, p, trials=300, seed=2)
    assert np.array_equal(again[0].populations, pops)
