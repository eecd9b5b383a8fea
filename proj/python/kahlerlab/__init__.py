"""K-stability and canonical Kahler metric computations.

Thin re-export of the compiled module; exact rationals cross the boundary
as "p/q" strings.
"""

try:  # wheel layout: the extension lives inside the package
    from ._kahlerlab import (  # type: ignore  # noqa: F401
        ValidationError,
        SolverError,
        ObstructionSuspectedError,
        lattice_point_count,
        ehrhart_coefficients,
        barycenter,
        toric_degrees,
        donaldson_futaki,
        eta_constant,
        cm_degree,
        lelong_number,
        integrability_threshold,
        eval_conical_model,
        eval_fibrewise_model,
        ke_solve,
        soliton_solve,
        flow_run,
        continuity_run,
        wp_density,
        foliation_rank,
        horizontal_c_residual,
        relative_ke_residual_torus,
        run_job,
        __version__,
    )
except ImportError:  # build-tree layout: the extension sits on sys.path
    from _kahlerlab import (  # noqa: F401
    ValidationError,
    SolverError,
    ObstructionSuspectedError,
    lattice_point_count,
    ehrhart_coefficients,
    barycenter,
    toric_degrees,
    donaldson_futaki,
    eta_constant,
    cm_degree,
    lelong_number,
    integrability_threshold,
    eval_conical_model,
    eval_fibrewise_model,
    ke_solve,
    soliton_solve,
    flow_run,
    continuity_run,
    wp_density,
    foliation_rank,
    horizontal_c_residual,
    relative_ke_residual_torus,
    run_job,
    __version__,
)
