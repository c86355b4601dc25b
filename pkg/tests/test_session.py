import json
import math

import numpy as np
import pytest

from fracshape.errors import (
    ImproperTransferFunction,
    MalformedRow,
    MixedColumnSchemas,
    NonMonotoneFrequencies,
    SchemaViolation,
    UnknownName,
    VersionUnsupported,
)
from fracshape.filters import ApproxMethod, ControllerDef, FilterKind, FilterSpec, assemble_controller
from fracshape.presets import demo_session, fractional_controller, integer_controller
from fracshape.session import (
    ExamplePlantKind,
    ExamplePlantSpec,
    ExamplePlantSource,
    FrdPlantSource,
    Session,
    TfPlantSource,
    export_controller,
    import_frd,
    load_session,
    make_example_plant,
    resolve_plant,
    save_session,
    simconfig_from_document,
    simconfig_to_document,
)
from fracshape.tfcore import FrdData, RationalTF, eval_response
from fracshape.timesim import SignalShape, SignalSpec, SimConfig


class TestSessionRoundTrip:
    def test_demo_session_round_trips_structurally(self):
        s = demo_session()
        assert load_session(save_session(s)) == s

    def test_empty_controllers_session(self):
        s = Session(plant=TfPlantSource((1.0,), (1.0, 1.0)))
        assert load_session(save_session(s)) == s

    def test_numbers_survive_bit_exactly(self):
        s = Session(
            plant=TfPlantSource((0.1 + 0.2, math.pi), (1.0, 1e-17 + 1.0)),
            controllers=(integer_controller(kp=0.1630000000000001),),
            active_controller="ioc",
        )
        back = load_session(save_session(s))
        assert back.plant.num == s.plant.num
        assert back.controllers[0].filters[0].params["Kp"] == 0.1630000000000001

    def test_frd_plant_round_trips(self):
        frd = FrdData([1.0, 2.5, 7.1], [1 + 2j, 0.5 - 0.25j, -0.125 + 0j])
        s = Session(plant=FrdPlantSource(frd, source_file="probe.csv"))
        assert load_session(save_session(s)) == s

    def test_prefilter_round_trips(self):
        pf = RationalTF.from_coeffs([1.0], [1.0, 0.01])
        s = Session(
            plant=TfPlantSource((1.0,), (1.0, 1.0)),
            controllers=(ControllerDef("c", (FilterSpec(FilterKind.GAIN, {"Kp": 2.0}),), pf),),
        )
        assert load_session(save_session(s)) == s

    def test_unknown_version_rejected(self):
        doc = json.loads(save_session(demo_session()))
        doc["format_version"] = 99
        with pytest.raises(VersionUnsupported):
            load_session(json.dumps(doc))

    def test_schema_violation_carries_field_path(self):
        doc = json.loads(save_session(demo_session()))
        doc["controllers"][0]["filters"][1]["kind"] = "nonsense"
        with pytest.raises(SchemaViolation) as err:
            load_session(json.dumps(doc))
        assert "controllers[0].filters[1]" in str(err.value)

    def test_active_controller_must_exist(self):
        with pytest.raises(UnknownName):
            Session(plant=TfPlantSource((1.0,), (1.0,)), active_controller="ghost")

    def test_duplicate_controller_names_rejected(self):
        with pytest.raises(ValueError):
            Session(
                plant=TfPlantSource((1.0,), (1.0,)),
                controllers=(ControllerDef("a"), ControllerDef("a")),
            )


class TestFrdCsv:
    def test_polar_row(self):
        frd = import_frd("freq_hz,mag_db,phase_deg\n1.0,0.0,-90.0\n2.0,0.0,0.0\n")
        assert frd.values[0] == pytest.approx(-1j, abs=1e-15)

    def test_cartesian_passthrough_bit_exact(self):
        text = "freq_hz,re,im\n1.0,0.125,-0.25\n2.0,3.0,4.0\n5.0,-1.5,0.0625\n"
        frd = import_frd(text)
        assert frd.values == (0.125 - 0.25j, 3.0 + 4.0j, -1.5 + 0.0625j)
        from fracshape.session import serialize_frd

        assert import_frd(serialize_frd(frd, "cartesian")) == frd

    def test_polar_round_trip_close(self):
        from fracshape.session import serialize_frd

        frd = FrdData([1.0, 3.0], [0.5 + 0.25j, -2.0 + 1.0j])
        back = import_frd(serialize_frd(frd, "polar"))
        assert np.allclose(back.values, frd.values, rtol=1e-12)

    def test_comments_and_blank_lines_ignored(self):
        text = "# measured on rig 3\nfreq_hz,re,im\n\n1.0,1.0,0.0\n# mid comment\n2.0,0.5,0.0\n"
        assert len(import_frd(text).freqs_hz) == 2

    def test_duplicate_frequency_rejected(self):
        with pytest.raises(NonMonotoneFrequencies):
            import_frd("freq_hz,re,im\n1.0,1.0,0.0\n1.0,0.5,0.0\n")

    def test_mixed_schema_rejected(self):
        with pytest.raises(MixedColumnSchemas):
            import_frd("freq_hz,re,phase_deg\n1.0,1.0,0.0\n")

    def test_malformed_row_reports_line_number(self):
        with pytest.raises(MalformedRow) as err:
            import_frd("freq_hz,re,im\n1.0,1.0,0.0\n2.0,oops,0.0\n")
        assert err.value.line_number == 3

    def test_wrong_column_count_reports_line(self):
        with pytest.raises(MalformedRow) as err:
            import_frd("freq_hz,re,im\n1.0,1.0\n")
        assert err.value.line_number == 2


class TestExamplePlants:
    def test_undamped_oscillator(self):
        spec = ExamplePlantSpec(ExamplePlantKind.MASS_SPRING_DAMPER, (1.0,), (1.0,), (1e-12,))
        tf = make_example_plant(spec)
        assert tf.den.coeffs == pytest.approx((1.0, 1e-12, 1.0))
        # resonance at w = 1
        assert abs(tf(1j * 0.99999)) > 1e4

    def test_critically_damped_dc_gain(self):
        spec = ExamplePlantSpec(ExamplePlantKind.MASS_SPRING_DAMPER, (1.0,), (1.0,), (2.0,))
        tf = make_example_plant(spec)
        assert tf(0.0).real == pytest.approx(1.0)
        assert tf.den.coeffs == (1.0, 2.0, 1.0)

    def test_collocated_antiresonance_below_resonance(self):
        spec = ExamplePlantSpec(
            ExamplePlantKind.DOUBLE_MASS_SPRING_COLLOCATED,
            (1.0, 1.0), (100.0, 100.0), (0.2, 0.2),
        )
        tf = make_example_plant(spec)
        w = np.geomspace(0.5, 50.0, 4000)
        mag = np.abs(np.array([tf(1j * x) for x in w]))
        i_min = int(np.argmin(mag))
        i_max_after = i_min + int(np.argmax(mag[i_min:]))
        assert w[i_min] == pytest.approx(10.0, rel=0.01)  # sqrt(k2/m2)
        assert w[i_min] < w[i_max_after]

    def test_non_collocated_variant_differs(self):
        args = ((1.0, 1.0), (100.0, 100.0), (0.2, 0.2))
        col = make_example_plant(
            ExamplePlantSpec(ExamplePlantKind.DOUBLE_MASS_SPRING_COLLOCATED, *args)
        )
        non = make_example_plant(ExamplePlantSpec(ExamplePlantKind.DOUBLE_MASS_SPRING, *args))
        assert col.num.degree == 2 and non.num.degree == 1
        assert col.den.coeffs == non.den.coeffs

    def test_strictly_proper_with_positive_leading_den(self):
        for spec in (
            ExamplePlantSpec(ExamplePlantKind.MASS_SPRING_DAMPER, (2.0,), (50.0,), (0.1,)),
            ExamplePlantSpec(
                ExamplePlantKind.DOUBLE_MASS_SPRING_COLLOCATED,
                (1.0, 0.2), (4e4, 4e3), (20.0, 2.0),
            ),
        ):
            tf = make_example_plant(spec)
            assert tf.num.degree < tf.den.degree
            assert tf.den.coeffs[-1] > 0

    def test_parameter_count_validation(self):
        with pytest.raises(ValueError):
            ExamplePlantSpec(ExamplePlantKind.MASS_SPRING_DAMPER, (1.0, 2.0), (1.0,), (1.0,))


class TestControllerExport:
    def test_constant_gain(self):
        doc = export_controller(RationalTF.constant(0.163))
        assert doc["num"] == [0.163] and doc["den"] == [1.0]
        assert doc["domain"] == "s" and doc["order"] == 0

    def test_classic_pid_den_degree(self):
        cdef = integer_controller()
        doc = export_controller(assemble_controller(cdef), cdef.filters)
        assert len(doc["den"]) - 1 == 3
        assert len(doc["filters"]) == 4

    def test_discrete_export(self):
        cdef = integer_controller()
        doc = export_controller(assemble_controller(cdef), cdef.filters, sample_period_s=1e-4)
        assert doc["domain"] == "z" and doc["sample_period_s"] == 1e-4

    def test_improper_discrete_export_rejected(self):
        with pytest.raises(ImproperTransferFunction):
            export_controller(RationalTF.differentiator(), sample_period_s=1e-3)


class TestResolvePlant:
    def test_example_source_resolves(self):
        src = ExamplePlantSource(
            ExamplePlantSpec(ExamplePlantKind.MASS_SPRING_DAMPER, (1.0,), (1.0,), (2.0,))
        )
        plant = resolve_plant(src)
        assert not plant.is_frd
        assert plant.tf.den.coeffs == (1.0, 2.0, 1.0)

    def test_discrete_tf_source(self):
        src = TfPlantSource((1.0,), (0.5, 1.0), sample_period_s=0.01)
        plant = resolve_plant(src)
        assert plant.tf.sample_period_s == 0.01


class TestSimConfigDocument:
    def test_round_trip(self):
        cfg = SimConfig(
            2.0, 1e-3,
            SignalSpec(SignalShape.SINE, amplitude=0.5, frequency_hz=3.0, start_time_s=0.1),
            disturbance=SignalSpec(SignalShape.GAUSSIAN, std_dev=0.01, seed=7),
            use_prefilter=True,
        )
        assert simconfig_from_document(simconfig_to_document(cfg)) == cfg

    def test_bad_shape_reports_path(self):
        with pytest.raises(SchemaViolation) as err:
            simconfig_from_document(
                {"duration_s": 1.0, "sample_period_s": 0.01, "reference": {"shape": "warble"}}
            )
        assert "reference.shape" in str(err.value)
