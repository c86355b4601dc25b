import numpy as np
import pytest

from fracshape.analysis import FreqGrid, open_loop
from fracshape.filters import assemble_controller
from fracshape.presets import fractional_controller, integer_controller, stage_plant_spec
from fracshape.session import make_example_plant
from fracshape.tfcore import PlantModel, RationalTF


@pytest.fixture(scope="session")
def stage_plant() -> PlantModel:
    return PlantModel.from_tf(make_example_plant(stage_plant_spec()))


def rescale_to_crossover(
    plant: PlantModel, controller: RationalTF, f_cross_hz: float
) -> RationalTF:
    """Scale the controller gain so |P*C| = 1 at f_cross_hz."""
    s = 2j * np.pi * f_cross_hz
    g = abs(plant.tf(s) * controller(s))
    return controller.scaled(1.0 / g)


@pytest.fixture(scope="session")
def stage_loops(stage_plant):
    """Both demo controllers rescaled to a common 10 Hz crossover on the stage."""
    out = {}
    for name, cdef in (("ioc", integer_controller()), ("foc", fractional_controller())):
        tf = rescale_to_crossover(stage_plant, assemble_controller(cdef), 10.0)
        loop = open_loop(stage_plant, tf, FreqGrid(0.01, 10000.0, 100))
        out[name] = (tf, loop)
    return out
