"""Riemannian gradient descent on the sphere: solvers and landscape probes."""

from .datagen import DictionaryInstance, gen_bg_matrix, gen_instance, haar_orthogonal
from .descent import (
    BallStop,
    DescentConfig,
    DescentTrace,
    recovery_error,
    riemannian_gd,
    section_map,
)
from .landscape import (
    CriticalPoint,
    NegCurvDirection,
    enumerate_critical_points,
    fluctuation_probe,
    predict_flow_limit,
    stable_manifold_membership,
    u_direction,
    volume_curve,
    volume_estimate,
)
from .objectives import (
    default_dl_eta,
    default_sep_eta,
    default_sep_mu,
    dl_euclid_grad,
    dl_objective,
    dl_pop_grad_estimate,
    dl_pop_projected_grad_estimate,
    dl_projected_grad,
    dl_riem_grad,
    dl_value,
    log_cosh,
    sep_euclid_grad,
    sep_objective,
    sep_projected_grad,
    sep_riem_grad,
    sep_value,
)
from .phase_retrieval import (
    PRDecomposition,
    pr_decompose,
    pr_descend,
    pr_dist_to_solutions,
    pr_experiment,
    pr_gradient,
    pr_reconstruct,
    pr_region,
    pr_step,
    pr_value,
)
from .sphere import (
    chart_to_sphere,
    exp_map,
    in_c_zeta,
    sample_uniform_sphere,
    sphere_to_chart,
    tangent_project,
    zeta,
)

__version__ = "0.1.0"
