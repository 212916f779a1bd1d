"""Inverse eigenvalue tools for quantum channels.

Decide when a multiset of complex numbers can be the spectrum of a completely
positive trace-preserving map, construct channels realizing admissible
spectra, and analyze channels or observable time series.
"""

from .channel import (
    Channel,
    NormalizationResult,
    PrimitivityReport,
    VerificationReport,
    choi_to_kraus,
    convert_repr,
    is_irreducible,
    is_primitive,
    kraus_span_saturation,
    kraus_to_choi,
    kraus_to_superop,
    moments,
    normalize_trace_preserving,
    random_channel,
    reshuffle,
    stochastic_submatrix,
    verify,
    wielandt_bound,
)
from .classical import (
    MomentReport,
    NonnegRealization,
    lift_to_channel,
    moment_report,
    nniep_optimize,
    suleimanova_companion,
    to_stochastic,
)
from .cycles import (
    CycleBlock,
    CycleSpec,
    PeripheralSpectrum,
    jll_counterexample_channel,
    peripheral_spectrum,
    synth_cycles,
)
from .errors import (
    ChanspecError,
    InfeasibleError,
    NotCompletelyPositive,
    NumericalError,
    SynthesisError,
)
from .linalg import (
    MatchResult,
    SpectrumMultiset,
    companion_matrix,
    eig_multiset,
    multiset_match,
    symmetrize_conjugates,
)
from .qubit import (
    PauliRep,
    PositiveQubitResult,
    PositivityResult,
    QubitSpectrumVerdict,
    TetraPoint,
    check_and_synth_positive_qubit,
    check_qubit_cp_spectrum,
    from_pauli_rep,
    pauli_rep,
    qubit_positivity,
    reduce_to_unital,
    synth_qubit_channel,
    tetra_membership,
)
from .series import (
    RecurrenceModel,
    Series,
    SeriesVerdict,
    fit_recurrence,
    generate_series,
    qubit_series_verdict,
)
from .synthesis import (
    SynthesisResult,
    synth_full_kraus_rank,
    synth_nonzero_spectrum,
    synth_spectral_set,
)

__version__ = "0.1.0"

__all__ = [
    "Channel",
    "ChanspecError",
    "CycleBlock",
    "CycleSpec",
    "InfeasibleError",
    "MatchResult",
    "MomentReport",
    "NonnegRealization",
    "NormalizationResult",
    "NotCompletelyPositive",
    "NumericalError",
    "PauliRep",
    "PeripheralSpectrum",
    "PositiveQubitResult",
    "PositivityResult",
    "PrimitivityReport",
    "QubitSpectrumVerdict",
    "RecurrenceModel",
    "Series",
    "SeriesVerdict",
    "SpectrumMultiset",
    "SynthesisError",
    "SynthesisResult",
    "TetraPoint",
    "VerificationReport",
    "check_and_synth_positive_qubit",
    "check_qubit_cp_spectrum",
    "choi_to_kraus",
    "companion_matrix",
    "convert_repr",
    "eig_multiset",
    "fit_recurrence",
    "from_pauli_rep",
    "generate_series",
    "is_irreducible",
    "is_primitive",
    "jll_counterexample_channel",
    "kraus_span_saturation",
    "kraus_to_choi",
    "kraus_to_superop",
    "lift_to_channel",
    "moment_report",
    "moments",
    "multiset_match",
    "nniep_optimize",
    "normalize_trace_preserving",
    "pauli_rep",
    "peripheral_spectrum",
    "qubit_positivity",
    "qubit_series_verdict",
    "random_channel",
    "reduce_to_unital",
    "reshuffle",
    "stochastic_submatrix",
    "suleimanova_companion",
    "symmetrize_conjugates",
    "synth_cycles",
    "synth_full_kraus_rank",
    "synth_nonzero_spectrum",
    "synth_qubit_channel",
    "synth_spectral_set",
    "tetra_membership",
    "to_stochastic",
    "verify",
    "wielandt_bound",
]
