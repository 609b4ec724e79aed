"""Bounds on observable multiple-quantum coherence intensities of spin-1/2 ensembles."""

from mqcbound.combinatorics import (
    RankReport,
    binomial_exact,
    degeneracy,
    max_rank,
    max_rank_even,
    rank_report,
)
from mqcbound.spectra import (
    DegenerateSpectrum,
    ExtremeSelection,
    SignedLog,
    aligned_dot,
    paired_diff_norm,
    pz_spectrum,
    select_extremes,
    sigma_spectrum,
)
from mqcbound.bounds import (
    BoundResult,
    TransitionReport,
    asymptotic_bounds,
    bound,
    closed_form_q1,
    closed_form_qN,
    closed_form_qNm1,
    convolution_profile,
    half_decay_order,
    lower_bound,
    observable_cluster_limit,
    one_over_e_crossing,
    snr_requirement,
    transition_report,
    transition_width,
    upper_bound,
)

__version__ = "0.1.0"
