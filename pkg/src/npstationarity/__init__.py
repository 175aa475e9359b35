"""Nonparametric tests of stationarity for univariate time series.

CUSUM statistics built on empirical d.f.s, empirical autocopulas and
U-statistics are resampled with a dependent multiplier bootstrap and their
p-values combined into one global test.
"""

from .combiner import (
    CombinationSpec,
    ComponentKey,
    PRESETS,
    TestReport,
    combine,
    component_pvalues,
    compute_component,
    norm_ppf,
    preset,
    psi_fisher,
    psi_stouffer,
    run_presets,
    stationarity_test,
)
from .core import (
    ArgumentError,
    ContractViolation,
    DataError,
    EmbeddingConfig,
    PseudoSample,
    Series,
    autocopula_eval,
    embed,
    marginal_edf,
    pseudo_observations,
)
from .harness import CellSpec, ExperimentSpec, export_table, load_config, run_experiment
from .multiplier import (
    BandwidthChoice,
    MultiplierSet,
    generate_multipliers,
    parzen,
    parzen_weights,
    select_bandwidth,
)
from .rankstats import (
    ComponentResult,
    CusumWeights,
    replicate_autocopula,
    replicate_df,
    replicate_dh,
    stat_autocopula,
    stat_df,
    stat_dh,
)
from .simgen import GeneratorSpec, generate, generate_lsw
from .sostats import KernelSpec, replicate_u, stat_u, ustat

__version__ = "0.1.0"
