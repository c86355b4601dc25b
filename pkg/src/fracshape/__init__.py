"""fracshape: loop-shaping toolkit for integer- and fractional-order controllers.

Design controllers against transfer-function or measured frequency-response
plants: realize loop-shaping filters (including fractional-order variants backed
by six approximation methods), inspect margins and sensitivity functions, run
closed-loop time simulations, and persist whole design sessions.
"""

from .errors import FracshapeError
from .tfcore import (
    ComposeOp,
    Domain,
    FrdData,
    FreqResponse,
    PlantModel,
    PolyOp,
    Polynomial,
    RationalTF,
    SensitivityKind,
    eval_response,
    poly_arith,
    sensitivity,
    tf_compose,
)
from .fracapprox import (
    CfeConfig,
    CfeMethod,
    CroneConfig,
    carlson,
    cfe_discretize,
    crone,
    gamma_fn,
    matsuda,
    reciprocal_gamma,
)
from .filters import (
    ApproxMethod,
    ControllerDef,
    FilterKind,
    FilterSpec,
    assemble_controller,
    realize_filter,
)
from .analysis import (
    FreqGrid,
    MarginReport,
    PlotSeries,
    PlotView,
    Requirements,
    Subsystem,
    margins,
    open_loop,
    plot_data,
)
from .timesim import SignalShape, SignalSpec, SimConfig, SimResult, discretize, simulate
from .session import (
    ExamplePlantKind,
    ExamplePlantSpec,
    Session,
    export_controller,
    import_frd,
    load_session,
    make_example_plant,
    save_session,
    serialize_frd,
)

__version__ = "0.1.0"
