"""qleak: maximal information leakage of classical data from its quantum
encoding, computed by subgradient ascent over measurements."""

__version__ = "0.1.0"

from .linalg import (
    HermitianEig,
    herm_eig,
    inv_sqrt_psd,
    tensor_product,
    trace_distance,
    trace_product,
)
from .states import (
    DensityOperator,
    Ensemble,
    KrausChannel,
    Povm,
    apply_channel,
    born_distribution,
    depolarizing_global,
    depolarizing_local,
    encode_amplitude_3bit,
    encode_index,
    random_kraus_channel,
    random_povm,
)
from .leakage import (
    AscentConfig,
    ConvergenceTrace,
    LeakageReport,
    PropertyCheck,
    PropertyReport,
    ascent_step,
    brute_force_leakage,
    compute_leakage,
    leakage_objective,
    mutual_information,
    noisy_leakage_global,
    noisy_leakage_local_bound,
    two_state_leakage,
    verify_properties,
)
from .ensemble_io import (
    builtin_names,
    ensemble_to_config,
    parse_channel_config,
    parse_ensemble_config,
    resolve_ensemble,
)
from . import exceptions

__all__ = [
    "AscentConfig",
    "ConvergenceTrace",
    "DensityOperator",
    "Ensemble",
    "HermitianEig",
    "KrausChannel",
    "LeakageReport",
    "Povm",
    "PropertyCheck",
    "PropertyReport",
    "apply_channel",
    "ascent_step",
    "born_distribution",
    "brute_force_leakage",
    "builtin_names",
    "compute_leakage",
    "depolarizing_global",
    "depolarizing_local",
    "encode_amplitude_3bit",
    "encode_index",
    "ensemble_to_config",
    "exceptions",
    "herm_eig",
    "inv_sqrt_psd",
    "leakage_objective",
    "mutual_information",
    "noisy_leakage_global",
    "noisy_leakage_local_bound",
    "parse_channel_config",
    "parse_ensemble_config",
    "random_kraus_channel",
    "random_povm",
    "resolve_ensemble",
    "tensor_product",
    "trace_distance",
    "trace_product",
    "two_state_leakage",
    "verify_properties",
]
