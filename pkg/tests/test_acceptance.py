"""Acceptance suite: one test per exit criterion, at the stated tolerances.

Run with `pytest -v tests/test_acceptance.py` to get one pass/fail line per
criterion. Two sub-criteria are asserted exactly as stated although analysis
shows them unattainable (see the repo-external decision notes); their tests
carry an `_as_stated` suffix and fail with the measured numbers in the message.
"""
import json
import math
import time

import numpy as np
import pytest
from click.testing import CliRunner

from fracshape.analysis import FreqGrid, margins, open_loop
from fracshape.cli import main as cli_main
from fracshape.errors import FrdPlantUnsupported
from fracshape.fracapprox import (
    CfeConfig,
    CfeMethod,
    CroneConfig,
    _tobfd_series,
    carlson,
    cfe_discretize,
    crone,
    matsuda,
)
from fracshape.filters import FilterKind, FilterSpec, assemble_controller, realize_filter
from fracshape.presets import fractional_controller, integer_controller
from fracshape.session import (
    FrdPlantSource,
    Session,
    TfPlantSource,
    import_frd,
    load_session,
    save_session,
    serialize_frd,
)
from fracshape.tfcore import (
    FrdData,
    PlantModel,
    RationalTF,
    SensitivityKind,
    eval_response,
    sensitivity,
)
from fracshape.timesim import SignalShape, SignalSpec, SimConfig, simulate

from conftest import rescale_to_crossover

TWO_PI = 2.0 * math.pi


def random_stable_tf(rng: np.random.Generator, max_sections: int = 2) -> RationalTF:
    """Random proper transfer function with all poles in the open left half plane."""
    den = np.array([1.0])
    n_sections = int(rng.integers(1, max_sections + 1))
    for _ in range(n_sections):
        if rng.random() < 0.5:
            a = float(rng.uniform(0.05, 50.0))
            den = np.convolve(den, [a, 1.0])
        else:
            wn = float(rng.uniform(0.05, 50.0))
            zeta = float(rng.uniform(0.2, 1.5))
            den = np.convolve(den, [wn * wn, 2 * zeta * wn, 1.0])
    n_deg = int(rng.integers(0, len(den) - 1))
    num = rng.uniform(-2.0, 2.0, size=n_deg + 1)
    if num[-1] == 0.0:
        num[-1] = 1.0
    return RationalTF.from_coeffs(num, den)


class TestAcceptance:
    def test_01_sensitivity_identity(self):
        start = time.perf_counter()
        rng = np.random.default_rng(20240817)
        f = np.geomspace(1e-3, 1e3, 1000)
        worst_tps = worst_ps = worst_cs = 0.0
        for _ in range(20):
            plant = PlantModel.from_tf(random_stable_tf(rng))
            ctrl = random_stable_tf(rng)
            t = sensitivity(plant, ctrl, SensitivityKind.COMPLEMENTARY, f).values
            s = sensitivity(plant, ctrl, SensitivityKind.SENSITIVITY, f).values
            ps = sensitivity(plant, ctrl, SensitivityKind.PROCESS, f).values
            cs = sensitivity(plant, ctrl, SensitivityKind.CONTROL, f).values
            pv = eval_response(plant, f).values
            cv = eval_response(ctrl, f).values
            worst_tps = max(worst_tps, float(np.max(np.abs(t + s - 1.0))))
            worst_ps = max(worst_ps, float(np.max(np.abs(ps - pv * s))))
            worst_cs = max(worst_cs, float(np.max(np.abs(cs - cv * s))))
        elapsed = time.perf_counter() - start
        assert worst_tps < 1e-12
        assert worst_ps < 1e-12
        assert worst_cs < 1e-12
        assert elapsed < 5.0

    def _approx_csv(self, runner, tmp_path, name, *args):
        csv = tmp_path / f"{name}.csv"
        coeff = tmp_path / f"{name}.json"
        res = runner.invoke(
            cli_main,
            ["approx", *args, "--out", str(csv), "--coeff-out", str(coeff)],
            catch_exceptions=False,
        )
        assert res.exit_code == 0, res.output
        rows = np.array(
            [[float(c) for c in line.split(",")]
             for line in csv.read_text().splitlines()[1:]]
        )
        return rows, json.loads(coeff.read_text())

    def test_02_continuous_method_comparison(self, tmp_path):
        start = time.perf_counter()
        runner = CliRunner()
        curves = {
            "crone": self._approx_csv(
                runner, tmp_path, "crone",
                "--method", "crone", "--nu", "0.5", "--band", "1e-2:1e2", "--n", "2"),
            "carlson": self._approx_csv(
                runner, tmp_path, "carlson", "--method", "carlson", "--nu", "0.5", "--n", "2"),
            "matsuda": self._approx_csv(
                runner, tmp_path, "matsuda",
                "--method", "matsuda", "--nu", "0.5", "--band", "1e-2:1e2", "--n", "2"),
        }
        # half-order slope: +10 dB/decade through 0 dB at w=1, phase 45 deg,
        # checked on the inner decade of the band (one decade margin per side)
        for name, (rows, coeffs) in curves.items():
            f, mag_db, phase = rows[:, 0], rows[:, 1], rows[:, 2]
            w = TWO_PI * f
            sel = (w >= 0.1) & (w <= 10.0)
            assert sel.sum() > 10, name
            exact_db = 10.0 * np.log10(w[sel])
            assert np.abs(mag_db[sel] - exact_db).max() <= 3.0, name
            assert np.abs(phase[sel] - 45.0).max() <= 15.0, name
        assert curves["crone"][1]["poles"] == 2
        assert curves["matsuda"][1]["poles"] == 2
        assert time.perf_counter() - start < 1.0

    def test_02b_continuous_method_pole_counts_as_stated(self, tmp_path):
        runner = CliRunner()
        counts = {}
        for name, args in {
            "crone": ["--method", "crone", "--nu", "0.5", "--band", "1e-2:1e2", "--n", "2"],
            "carlson": ["--method", "carlson", "--nu", "0.5", "--n", "2"],
            "matsuda": ["--method", "matsuda", "--nu", "0.5", "--band", "1e-2:1e2", "--n", "2"],
        }.items():
            _, coeffs = self._approx_csv(runner, tmp_path, f"pc_{name}", *args)
            counts[name] = coeffs["poles"]
        # the Newton iteration's degree sequence is 1, 4, 13, 40: a 6-pole result
        # is unreachable for order 1/2, so this asserts the stated count verbatim
        assert (counts["crone"], counts["carlson"], counts["matsuda"]) == (2, 6, 2), (
            f"measured pole counts {counts}; the iteration degree law 3d+1 "
            "cannot produce 6"
        )

    def test_03_discrete_method_comparison(self, tmp_path):
        start = time.perf_counter()
        runner = CliRunner()
        t = 1e-4
        w_nyq = math.pi / t
        for method in ("tustin", "sobfd", "tobfd"):
            rows, coeffs = self._approx_csv(
                runner, tmp_path, method,
                "--method", method, "--nu", "0.5", "--T", "1e-4", "--n", "3")
            assert coeffs["poles"] == 3, method
            f, mag_db = rows[:, 0], rows[:, 1]
            w = TWO_PI * f
            sel = (w >= w_nyq / 100.0) & (w <= w_nyq / 10.0)
            exact_db = 10.0 * np.log10(w[sel])
            assert np.abs(mag_db[sel] - exact_db).max() <= 1.5, method
        resid = _tobfd_series(0.5, 7)  # raises ComplexResidue above 1e-9 relative
        assert np.all(np.isreal(resid))
        assert time.perf_counter() - start < 1.0

    def test_04_crone_band_fidelity(self):
        start = time.perf_counter()
        cfg = CroneConfig(1e-2, 1e2, 6)
        w = np.geomspace(0.1, 10.0, 500)
        for nu in (0.3, 0.5, 0.7, -0.3, -0.5, -0.7):
            tf = crone(nu, cfg)
            h = np.array([tf(1j * x) for x in w])
            exact = (1j * w) ** nu
            assert np.abs(20 * np.log10(np.abs(h) / np.abs(exact))).max() <= 1.0, nu
            assert np.abs(np.angle(h, deg=True) - np.angle(exact, deg=True)).max() <= 2.0, nu
        assert time.perf_counter() - start < 1.0

    def test_05_carlson_hand_iterate(self):
        one = carlson(0.5, 1)
        assert one.num.coeffs == (1.0, 3.0)
        assert one.den.coeffs == (3.0, 1.0)
        for i in (1, 2, 3):
            assert abs(carlson(0.5, i)(1.0) - 1.0) < 1e-12

    def test_06_matsuda_interpolation(self):
        band = CroneConfig(1e-2, 1e2, 3)
        m = 2 * band.n_pairs + 1
        edges = np.linspace(-2.0, 2.0, m + 1)
        points = 10.0 ** ((edges[:-1] + edges[1:]) / 2.0)
        for nu in (0.25, 0.5, 0.75):
            tf = matsuda(nu, band)
            for x in points:
                assert abs(tf(x).real / x**nu - 1.0) < 1e-9

    def test_07_margin_fixtures(self):
        hz = 1.0 / TWO_PI
        chain = RationalTF.from_coeffs([1.0], [0.0, 1.0, 2.0, 1.0])
        grid = FreqGrid(1e-3, 1e3, 100).frequencies()
        report = margins(eval_response(chain, grid))
        assert report.gain_margin_db == pytest.approx(6.02, abs=0.05)
        assert report.gm_freq_hz * TWO_PI == pytest.approx(1.0, abs=1e-3)
        assert report.phase_margin_deg == pytest.approx(21.4, abs=0.2)

        loop1 = eval_response(RationalTF.integrator(), grid)
        rep1 = margins(loop1)
        assert rep1.phase_margin_deg == pytest.approx(90.0, abs=0.1)
        assert math.isinf(rep1.gain_margin_db)
        assert rep1.modulus_margin >= 0.99
        s_max = float(np.max(np.abs(1.0 / (1.0 + loop1.values))))
        assert rep1.modulus_margin == pytest.approx(1.0 / s_max, rel=1e-9)

    def test_08_stage_design_comparison(self, stage_plant):
        start = time.perf_counter()
        reports = {}
        for name, cdef in (("ioc", integer_controller()), ("foc", fractional_controller())):
            tf = rescale_to_crossover(stage_plant, assemble_controller(cdef), 10.0)
            assert all(math.isfinite(c) for c in tf.num.coeffs + tf.den.coeffs)
            loop = open_loop(stage_plant, tf, FreqGrid(0.01, 10000.0, 100))
            report = margins(loop)
            assert report.phase_margin_deg is not None, name
            reports[name] = report
            # closed-loop stability oracle: characteristic polynomial roots
            pn, pd = stage_plant.tf.num.coeffs, stage_plant.tf.den.coeffs
            char = np.polynomial.polynomial.polyadd(
                np.convolve(pd, tf.den.coeffs), np.convolve(pn, tf.num.coeffs)
            )
            roots = np.roots(char[::-1])
            assert roots.real.max() < 0.0, f"{name} loop is unstable"
        assert reports["foc"].phase_margin_deg > reports["ioc"].phase_margin_deg
        assert time.perf_counter() - start < 5.0

    def test_08b_stage_design_low_frequency_gain_as_stated(self, stage_loops):
        c_ioc = abs(stage_loops["ioc"][0](2j * math.pi * 0.1))
        c_foc = abs(stage_loops["foc"][0](2j * math.pi * 0.1))
        # both controllers share the identical integer PI that dominates 0.1 Hz;
        # after the common-crossover rescale the fractional derivative's larger
        # 10 Hz tail lowers the fractional controller's low-frequency gain by
        # ~0.5%, so this asserts the stated inequality verbatim
        assert c_foc > c_ioc, (
            f"|C_foc(0.1 Hz)| = {c_foc:.6g} is not strictly above "
            f"|C_ioc(0.1 Hz)| = {c_ioc:.6g} (ratio {c_foc / c_ioc:.5f})"
        )

    def test_09_simulation_fixture(self):
        integ = PlantModel.from_tf(RationalTF.integrator())
        unity = RationalTF.constant(1.0)
        cfg = SimConfig(5.0, 1e-3, SignalSpec(SignalShape.STEP))
        res = simulate(integ, unity, None, cfg)
        i = int(round(1.0 / 1e-3))
        assert res.output[i] == pytest.approx(1.0 - math.exp(-1.0), abs=0.002)

        # linearity
        y1 = simulate(integ, unity, None,
                      SimConfig(2.0, 1e-3, SignalSpec(SignalShape.STEP, amplitude=1.0))).output
        y2 = simulate(integ, unity, None,
                      SimConfig(2.0, 1e-3, SignalSpec(SignalShape.STEP, amplitude=2.0))).output
        assert np.max(np.abs(y2 - 2 * y1)) / np.abs(y2).max() < 1e-9

        # superposition
        dist = SignalSpec(SignalShape.SINE, amplitude=0.25, frequency_hz=1.5)
        both = simulate(integ, unity, None,
                        SimConfig(2.0, 1e-3, SignalSpec(SignalShape.STEP), disturbance=dist))
        ref = simulate(integ, unity, None, SimConfig(2.0, 1e-3, SignalSpec(SignalShape.STEP)))
        only = simulate(
            integ, unity, None,
            SimConfig(2.0, 1e-3, SignalSpec(SignalShape.STEP, amplitude=0.0), disturbance=dist),
        )
        resid = both.output - ref.output - only.output
        assert np.max(np.abs(resid)) / np.abs(both.output).max() < 1e-9

        # seeded-noise bit determinism
        noisy = SimConfig(1.0, 1e-3, SignalSpec(SignalShape.STEP),
                          noise=SignalSpec(SignalShape.GAUSSIAN, std_dev=0.01, seed=5))
        assert np.array_equal(
            simulate(integ, unity, None, noisy).output,
            simulate(integ, unity, None, noisy).output,
        )

        # measured-plant rejection
        frd = PlantModel.from_frd(FrdData([1.0, 10.0], [1 + 0j, 0.1 - 0.1j]))
        with pytest.raises(FrdPlantUnsupported):
            simulate(frd, unity, None, cfg)

    def test_10_fractional_degenerates_to_integer(self):
        frac = realize_filter(
            FilterSpec(FilterKind.FRAC_PD,
                       {"f_d": 33.33, "f_t": 300.0, "alpha": 1.0, "n_pairs": 3})
        )
        integer = realize_filter(FilterSpec(FilterKind.PD, {"f_d": 33.33, "f_t": 300.0}))
        f = np.geomspace(3.333, 3000.0, 500)
        a = eval_response(frac, f).values
        b = eval_response(integer, f).values
        assert np.abs(20 * np.log10(np.abs(a) / np.abs(b))).max() <= 0.5
        dphase = np.degrees(np.unwrap(np.angle(a)) - np.unwrap(np.angle(b)))
        assert np.abs(dphase).max() <= 3.0

    def test_11_session_round_trip(self):
        session = Session(
            plant=TfPlantSource((1.0,), (1.0, 0.02, 1.0)),
            controllers=(integer_controller(), fractional_controller()),
            active_controller="ioc",
        )
        assert load_session(save_session(session)) == session

        frd = FrdData([1.0, 5.0, 20.0], [0.5 - 0.25j, 0.125 + 0.0625j, -0.03125 + 0j])
        assert import_frd(serialize_frd(frd, "cartesian")) == frd
        back = import_frd(serialize_frd(frd, "polar"))
        assert np.allclose(back.values, frd.values, rtol=1e-12)
        frd_session = Session(plant=FrdPlantSource(frd))
        assert load_session(save_session(frd_session)) == frd_session
