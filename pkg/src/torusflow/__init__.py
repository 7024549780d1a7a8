"""torusflow: Fourier-Galerkin simulation and decay-estimate verification
for two fourth-order parabolic equations on the 2-torus."""

from .spectral import (
    ModeSet,
    SpectralField,
    NormVector,
    project,
    wiener_norm,
    norm_vector,
    convolve,
    mode_multiplier,
    laplacian,
    biharmonic,
    derivative,
    to_real_samples,
    from_real_samples,
    scale_modes,
    with_cutoff,
    inner,
    hermitian_asymmetry,
    write_snapshot,
    read_snapshot,
)
from .models import (
    EpitaxialParams,
    ThinFilmParams,
    MeanGauge,
    hessian_det2,
    delta_of_delta_sq,
    epitaxial_rhs,
    power_term,
    grad_dot_grad_lap,
    times_bilap,
    thinfilm_rhs,
    hessian_det2_pointwise,
    delta_of_delta_sq_pointwise,
    grad_dot_grad_lap_pointwise,
    times_bilap_pointwise,
    epitaxial_rhs_pointwise,
    thinfilm_rhs_pointwise,
)
from .integrate import (
    StepperConfig,
    NormTrace,
    RunOutcome,
    step,
    simulate,
    detect_blowup,
)
from .theory import (
    TheoremReport,
    EnvelopeVerdict,
    check_epitaxial_A2,
    check_epitaxial_A0,
    check_thinfilm_A0,
    verify_decay_envelope,
    monitor_apriori_A2,
    TimeProfile,
    weak_residual,
)
from .config import (
    ConfigError,
    InitialDataSpec,
    NormalizeSpec,
    OutputSpec,
    RunConfig,
    parse_config,
    load_config,
    config_to_dict,
    generate_initial,
    prepare_initial,
)
from .output import (
    CSV_HEADER,
    write_trace_csv,
    read_trace_csv,
    write_report_json,
)
from .driver import ExecutionResult, check_only, execute_run, theorem_reports
from .sweep import run_sweep

__version__ = "0.1.0"
