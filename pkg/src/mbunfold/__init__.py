"""Recovery of multiband signals from modulo (self-reset ADC) samples."""

__version__ = "0.1.0"

from .errors import (AliasCollisionError, DegenerateFilterError, InconsistentPairError,
                     IngestError, InvalidArgumentError, OrderTooSmallError, RateTooSlowError,
                     RecoveryError, WarmupViolationError)
from .filters import (FilterTaps, alias_map, build_psi, carrier_response, normalize_for_recovery,
                      psi_power, recovery_filter, shrinkage_bound, verify_commutation_identity)
from .modulo import (FoldedSeries, ModuloConfig, ResidualSeries, fold, fold_complex, fold_scalar,
                     fold_series, quantize, residual_oracle)
from .planner import (FeasibilityReport, RateWindow, achievability_map, alias_free_check,
                      bandpass_windows, plan, usf_rate_check)
from .recovery import (RecoveryParams, RecoveryResult, choose_beta, choose_order,
                       empirical_order, mse, recover, us_alg_recover)
from .signals import (BandSeed, ComplexSeries, MultibandSpec, TimeGrid, apply_onset,
                      peak_amplitude, scale_to_peak, synth_multiband)
