"""liact: integrate infinitesimal (super) Lie algebra actions into global
group actions, and detect the obstructions when none exists.

Given structure constants, a group model, and vector fields realizing the
algebra on a chart, the package reconstructs the group action whose
one-parameter flows the fields generate (when the fields are complete and
the group simply connected), verifies it (group law, field recovery,
route independence), and otherwise diagnoses the failure: incompleteness
escape times or nontrivial loop holonomy.

Sign convention: the default ``sign=-1`` lift is the one for which the
reconstruction is a genuine left action and word routes compose right to
left; ``sign=+1`` reconstructs the companion right action g -> act(g^-1).
"""

from .action import (
    ActionResult,
    act,
    act_local,
    path_independence,
    recover_rho,
    sign_duality_residual,
    verify_group_law,
)
from .algebra import (
    AlgebraElement,
    StructureConstants,
    bracket,
    check_antisymmetry,
    check_jacobi,
)
from .backends import backend_name
from .fields import (
    Chart,
    Representation,
    VectorField,
    eval_rho,
    fundamental_field_from_action,
    graded_bracket_fields,
    validate_representation,
)
from .flows import (
    CompletenessReport,
    FlowProblem,
    HolonomyResult,
    LeafSample,
    Trajectory,
    completeness_probe,
    holonomy,
    integrate_flow,
    lift_path,
)
from .grassmann import EVEN, ODD, Supernumber, body_soul, gr_mul, taylor_eval
from .group import (
    CircleModel,
    EuclideanModel,
    GroupElement,
    GroupPath,
    MatrixModel,
    NilpotentExpModel,
    right_log_derivative,
)

__version__ = "0.1.0"

__all__ = [
    "ActionResult", "act", "act_local", "path_independence", "recover_rho",
    "sign_duality_residual", "verify_group_law",
    "AlgebraElement", "StructureConstants", "bracket", "check_antisymmetry",
    "check_jacobi",
    "backend_name",
    "Chart", "Representation", "VectorField", "eval_rho",
    "fundamental_field_from_action", "graded_bracket_fields",
    "validate_representation",
    "CompletenessReport", "FlowProblem", "HolonomyResult", "LeafSample",
    "Trajectory", "completeness_probe", "holonomy", "integrate_flow",
    "lift_path",
    "EVEN", "ODD", "Supernumber", "body_soul", "gr_mul", "taylor_eval",
    "CircleModel", "EuclideanModel", "GroupElement", "GroupPath",
    "MatrixModel", "NilpotentExpModel", "right_log_derivative",
    "__version__",
]
