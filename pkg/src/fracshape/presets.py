"""Bundled demo content: the published integer/fractional controller parameter
sets and a synthetic collocated two-mass stage plant to exercise them on.

The stage plant is a grounded chain (flexure-suspended driven mass with a
parasitic second mass) whose stiffness line extends past 10 Hz, so the demo
controllers close a stable loop at a 10 Hz crossover.
"""
from __future__ import annotations

import math

from .filters import ApproxMethod, ControllerDef, FilterKind, FilterSpec, assemble_controller
from .session import (
    ExamplePlantKind,
    ExamplePlantSpec,
    ExamplePlantSource,
    Session,
    make_example_plant,
)

__all__ = [
    "integer_controller",
    "fractional_controller",
    "stage_plant_spec",
    "rescaled_gain",
    "demo_session",
]


def integer_controller(name: str = "ioc", kp: float = 0.163) -> ControllerDef:
    """Gain + PI + tamed PD + first-order low-pass (the classic motion PID)."""
    return ControllerDef(
        name,
        (
            FilterSpec(FilterKind.GAIN, {"Kp": kp}),
            FilterSpec(FilterKind.PI, {"f_i": 10.0}),
            FilterSpec(FilterKind.PD, {"f_d": 33.33, "f_t": 300.0}),
            FilterSpec(FilterKind.LOW_PASS, {"f_cutoff": 1000.0, "order": 1}),
        ),
    )


def fractional_controller(name: str = "foc", kp: float = 0.0023) -> ControllerDef:
    """Gain + PI + fractional PD (alpha 1.1) + fractional lead-lag (alpha 1.8,
    high-frequency roll-off between 1 and 10 kHz) + first-order low-pass."""
    return ControllerDef(
        name,
        (
            FilterSpec(FilterKind.GAIN, {"Kp": kp}),
            FilterSpec(FilterKind.PI, {"f_i": 10.0}),
            FilterSpec(
                FilterKind.FRAC_PD,
                {"f_d": 33.33, "f_t": 300.0, "alpha": 1.1, "n_pairs": 3},
                ApproxMethod.CRONE,
            ),
            FilterSpec(
                FilterKind.FRAC_LEAD_LAG,
                {"f_z": 10000.0, "f_p": 1000.0, "alpha": 1.8, "n_pairs": 3},
                ApproxMethod.CRONE,
            ),
            FilterSpec(FilterKind.LOW_PASS, {"f_cutoff": 10000.0, "order": 1}),
        ),
    )


def stage_plant_spec() -> ExamplePlantSpec:
    """Collocated double mass-spring stage: ground mode near 29 Hz, absorber
    antiresonance near 22.5 Hz, light damping."""
    return ExamplePlantSpec(
        ExamplePlantKind.DOUBLE_MASS_SPRING_COLLOCATED,
        masses_kg=(1.0, 0.2),
        stiffnesses_n_per_m=(4.0e4, 4.0e3),
        dampings_ns_per_m=(20.0, 2.0),
    )


def rescaled_gain(cdef: ControllerDef, f_cross_hz: float = 10.0) -> float:
    """Gain that places the stage-plant loop crossover at f_cross_hz, keeping the
    controller's published shape (published gains belong to the original rig)."""
    plant = make_example_plant(stage_plant_spec())
    ctrl = assemble_controller(cdef)
    s = 2j * math.pi * f_cross_hz
    base = cdef.filters[0].params["Kp"]
    return base / abs(plant(s) * ctrl(s))


def demo_session() -> Session:
    """Ready-made session holding both demo controllers on the stage plant,
    gains rescaled to a 10 Hz loop crossover."""
    ioc = integer_controller(kp=rescaled_gain(integer_controller()))
    foc = fractional_controller("foc", kp=rescaled_gain(fractional_controller()))
    return Session(
        plant=ExamplePlantSource(stage_plant_spec()),
        controllers=(ioc, foc),
        active_controller="ioc",
    )
