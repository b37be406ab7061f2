"""Rank-test based Bayesian multiple change-point detection.

The detector combines Wilcoxon rank-sum p-values computed on adjacent
segments with a Bernoulli indicator model and Gibbs-type samplers, for
single series and for jointly analyzed multivariate series whose shared
change-point structure is learned along the way.
"""

from .baseline_tv import TVSolution, extract_change_points, tv_denoise
from .calibration import (
    ALPHA_MAX,
    BetaAlternative,
    CalibrationError,
    log_composite_likelihood,
    log_density_p,
    solve_gamma,
)
from .core import (
    AdmissibilityError,
    IndicatorMatrix,
    IndicatorVector,
    Segmentation,
    SegmentPvalues,
    TimeSeriesMatrix,
    config_counts,
    count_change_points,
    locate_neighbors,
    segments_around,
)
from .evaluate import (
    FdrPoint,
    MatchResult,
    fdr_estimate,
    fdr_experiment,
    match_with_tolerance,
    precision,
    recall,
)
from .gibbs_multi import (
    ConfigProbabilities,
    ConfigurationSet,
    MultiSamplerConfig,
    MultiSamplerTrace,
    column_conditional,
    log_posterior_multi,
    run_multi,
    sample_P,
    summarize_P,
)
from .gibbs_uni import (
    SamplerTrace,
    UniSamplerConfig,
    conditional_prob_pseudo,
    log_posterior_uni,
    map_single_cp,
    mmse_single_cp,
    run_blocked,
    run_pseudo,
)
from .ranktest import (
    RankTestResult,
    exact_pvalue,
    normal_pvalue,
    rank_sums,
    u_statistic,
    wilcoxon_pvalue,
)
from .simulate import (
    DependencyStructure,
    PiecewiseSpec,
    gen_dependent,
    gen_piecewise,
    snr_to_sigma,
)

__version__ = "0.1.0"
