import math

import numpy as np
import pytest

from fracshape.errors import (
    BilinearSingularity,
    FrdPlantUnsupported,
    ImproperTransferFunction,
    InvalidSignal,
)
from fracshape.tfcore import Domain, FrdData, PlantModel, RationalTF
from fracshape.timesim import (
    SignalShape,
    SignalSpec,
    SimConfig,
    discretize,
    sim_result_csv,
    simulate,
)

INTEGRATOR = PlantModel.from_tf(RationalTF.integrator())
UNITY = RationalTF.constant(1.0)


def step_cfg(duration=5.0, ts=1e-3, **kw):
    return SimConfig(duration, ts, SignalSpec(SignalShape.STEP), **kw)


class TestDiscretize:
    def test_constant_passthrough(self):
        tf = discretize(RationalTF.constant(3.5), 0.01)
        assert tf.num.coeffs == (3.5,) and tf.den.coeffs == (1.0,)
        assert tf.domain is Domain.DISCRETE_Z and tf.sample_period_s == 0.01

    def test_dc_gain_preserved(self):
        tf = discretize(RationalTF.from_coeffs([1.0], [1.0, 1.0]), 0.01)
        assert tf(1.0).real == pytest.approx(1.0, rel=1e-10)

    def test_integrator_maps_pole_to_unity(self):
        tf = discretize(RationalTF.integrator(), 0.01)
        # denominator must vanish at z = 1
        assert abs(tf.den(1.0)) < 1e-12 * max(abs(c) for c in tf.den.coeffs)

    def test_improper_rejected(self):
        with pytest.raises(ImproperTransferFunction):
            discretize(RationalTF.differentiator(), 0.01)

    def test_pole_at_two_over_t_rejected(self):
        # pole at s = 200 with T = 0.01 sits exactly at 2/T
        tf = RationalTF.from_coeffs([1.0], [-200.0, 1.0])
        with pytest.raises(BilinearSingularity):
            discretize(tf, 0.01)

    def test_frequency_response_matches_continuous_well_below_nyquist(self):
        ct = RationalTF.from_coeffs([1.0], [1.0, 0.2, 1.0])
        dt = discretize(ct, 1e-4)
        f = np.geomspace(0.01, 5.0, 50)
        hc = np.array([ct(2j * math.pi * x) for x in f])
        hd = np.array([dt(np.exp(2j * math.pi * x * 1e-4)) for x in f])
        assert np.max(np.abs(hd - hc) / np.abs(hc)) < 1e-4


class TestSignals:
    def test_step_with_delay(self):
        t = np.arange(0, 1, 0.1)
        s = SignalSpec(SignalShape.STEP, amplitude=2.0, start_time_s=0.45).samples(t)
        assert np.allclose(s[:5], 0.0) and np.allclose(s[5:], 2.0)

    def test_sawtooth_resets(self):
        t = np.arange(0, 1.0, 0.125)
        s = SignalSpec(SignalShape.SAWTOOTH, amplitude=4.0, frequency_hz=2.0).samples(t)
        assert s[0] == 0.0
        assert s[3] == pytest.approx(3.0)  # 3/4 through the first period
        assert s[4] == pytest.approx(0.0)  # reset at t = 0.5

    def test_gaussian_needs_seed(self):
        with pytest.raises(InvalidSignal):
            SignalSpec(SignalShape.GAUSSIAN, std_dev=0.1)

    def test_role_restrictions(self):
        saw = SignalSpec(SignalShape.SAWTOOTH, frequency_hz=1.0)
        step = SignalSpec(SignalShape.STEP)
        gauss = SignalSpec(SignalShape.GAUSSIAN, std_dev=0.1, seed=1)
        with pytest.raises(InvalidSignal):
            SimConfig(1.0, 0.01, reference=gauss)
        with pytest.raises(InvalidSignal):
            SimConfig(1.0, 0.01, reference=step, disturbance=saw)
        with pytest.raises(InvalidSignal):
            SimConfig(1.0, 0.01, reference=step, noise=step)

    def test_sample_budget(self):
        with pytest.raises(InvalidSignal):
            SimConfig(1e6, 1e-2, reference=SignalSpec(SignalShape.STEP))


class TestSimulate:
    def test_first_order_step_fixture(self):
        res = simulate(INTEGRATOR, UNITY, None, step_cfg())
        i = int(round(1.0 / 1e-3))
        assert res.time_s[i] == pytest.approx(1.0)
        assert res.output[i] == pytest.approx(1.0 - math.exp(-1.0), abs=0.002)

    def test_frd_plant_rejected(self):
        frd = PlantModel.from_frd(FrdData([1.0, 10.0], [1 + 0j, 0.1 + 0j]))
        with pytest.raises(FrdPlantUnsupported):
            simulate(frd, UNITY, None, step_cfg())

    def test_seeded_noise_bit_determinism(self):
        cfg = step_cfg(
            duration=1.0,
            noise=SignalSpec(SignalShape.GAUSSIAN, std_dev=0.05, seed=42),
        )
        a = simulate(INTEGRATOR, UNITY, None, cfg)
        b = simulate(INTEGRATOR, UNITY, None, cfg)
        assert np.array_equal(a.output, b.output)
        assert np.array_equal(a.control_effort, b.control_effort)
        assert a.seeds == {"noise": 42}

    def test_linearity_in_reference_amplitude(self):
        cfg1 = SimConfig(2.0, 1e-3, SignalSpec(SignalShape.STEP, amplitude=1.0))
        cfg2 = SimConfig(2.0, 1e-3, SignalSpec(SignalShape.STEP, amplitude=2.0))
        y1 = simulate(INTEGRATOR, UNITY, None, cfg1).output
        y2 = simulate(INTEGRATOR, UNITY, None, cfg2).output
        scale = np.abs(y2).max()
        assert np.max(np.abs(y2 - 2.0 * y1)) / scale < 1e-9

    def test_superposition_of_disturbance(self):
        dist = SignalSpec(SignalShape.SINE, amplitude=0.3, frequency_hz=2.0)
        both = simulate(INTEGRATOR, UNITY, None, step_cfg(duration=2.0, disturbance=dist))
        ref_only = simulate(INTEGRATOR, UNITY, None, step_cfg(duration=2.0))
        zero_ref = SimConfig(2.0, 1e-3, SignalSpec(SignalShape.STEP, amplitude=0.0),
                             disturbance=dist)
        dist_only = simulate(INTEGRATOR, UNITY, None, zero_ref)
        resid = both.output - ref_only.output - dist_only.output
        assert np.max(np.abs(resid)) / np.abs(both.output).max() < 1e-9

    def test_discretization_convergence(self):
        coarse = simulate(INTEGRATOR, UNITY, None, step_cfg(duration=2.0, ts=2e-3))
        fine = simulate(INTEGRATOR, UNITY, None, step_cfg(duration=2.0, ts=1e-3))
        # compare at shared time points (every other fine sample)
        resid = np.abs(fine.output[::2] - coarse.output)
        assert resid.max() / np.abs(coarse.output).max() < 0.005

    def test_prefilter_adds_comparison_trace(self):
        pf = RationalTF.from_coeffs([1.0], [1.0, 0.02])
        res = simulate(INTEGRATOR, UNITY, pf, step_cfg(duration=1.0, use_prefilter=True))
        assert res.output_no_prefilter is not None
        assert not np.array_equal(res.output, res.output_no_prefilter)
        off = simulate(INTEGRATOR, UNITY, pf, step_cfg(duration=1.0, use_prefilter=False))
        assert off.output_no_prefilter is None
        assert np.array_equal(off.output, res.output_no_prefilter)

    def test_unstable_loop_flags_divergence(self):
        plant = PlantModel.from_tf(RationalTF.from_coeffs([1.0], [-1.0, 1.0]))  # 1/(s-1)
        ctrl = RationalTF.constant(0.5)  # closed loop pole at +0.5
        res = simulate(plant, ctrl, None, step_cfg(duration=100.0, ts=0.01))
        assert res.diverged
        assert res.diverged_at_index is not None
        assert len(res.output) == res.diverged_at_index
        assert np.all(np.isfinite(res.output))

    def test_improper_closure_rejected(self):
        # 1 + PC cancels its leading term: closed loop (2-s)/3 is improper
        plant = PlantModel.from_tf(RationalTF.constant(1.0))
        ctrl = RationalTF.from_coeffs([2.0, -1.0], [1.0, 1.0])
        with pytest.raises(ImproperTransferFunction):
            simulate(plant, ctrl, None, step_cfg(duration=0.1))

    def test_undersampling_warns(self):
        with pytest.warns(UserWarning):
            simulate(INTEGRATOR, RationalTF.constant(100.0), None,
                     step_cfg(duration=1.0, ts=0.05))

    def test_final_value_on_stage_plant(self):
        # integrator in the loop + stable closure: step output settles to the
        # reference within 1% over a sufficiently long run
        from conftest import rescale_to_crossover
        from fracshape.filters import assemble_controller
        from fracshape.presets import integer_controller, stage_plant_spec
        from fracshape.session import make_example_plant

        plant = PlantModel.from_tf(make_example_plant(stage_plant_spec()))
        ctrl = rescale_to_crossover(plant, assemble_controller(integer_controller()), 10.0)
        res = simulate(plant, ctrl, None, step_cfg(duration=5.0, ts=1e-4))
        assert not res.diverged
        assert abs(res.output[-1] - 1.0) < 0.01


class TestCsvExport:
    def test_header_and_precision(self):
        res = simulate(INTEGRATOR, UNITY, None, step_cfg(duration=0.01))
        text = sim_result_csv(res)
        lines = text.strip().split("\n")
        assert lines[0] == "t,r,y,u"
        assert len(lines) == len(res.time_s) + 1
        # full double precision round-trip
        cells = lines[5].split(",")
        assert float(cells[2]) == res.output[4]

    def test_prefilter_column(self):
        pf = RationalTF.from_coeffs([1.0], [1.0, 0.02])
        res = simulate(INTEGRATOR, UNITY, pf, step_cfg(duration=0.01, use_prefilter=True))
        assert sim_result_csv(res).startswith("t,r,y,u,y_nopf")
