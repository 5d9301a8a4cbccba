"""JSON serialization of ensembles and channels, plus built-in presets.

Ensemble schema::

    { "dimension": int,
      "symbols": [ { "label": str,
                     "prior": number,          # optional, all-or-none
                     "state": one of
                       {"kind": "basis_index", "index": int}
                       {"kind": "pure_vector", "amplitudes": [[re, im], ...],
                        "normalize": bool}
                       {"kind": "density_matrix", "rows": [[[re, im], ...], ...]}
                   }, ... ] }

Channel schema::

    { "kind": "global" | "local" | "kraus",
      "p": number,                       # global / local
      "kraus_ops": [rows of [re, im]]    # kraus: list of matrices
    }

Validation failures raise EnsembleConfigError and always name the offending
symbol label when one is in scope.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .exceptions import (
    EnsembleConfigError,
    QLeakError,
    UnsupportedDimensionError,
)
from .states import (
    DensityOperator,
    Ensemble,
    KrausChannel,
    depolarizing_global,
    depolarizing_local,
    encode_amplitude_3bit,
    encode_index,
)

BUILTIN_PREFIX = "builtin:"


def matrix_to_pairs(matrix: np.ndarray) -> list:
    """Complex matrix -> nested [re, im] pairs (JSON-safe)."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(matrix)]


def pairs_to_matrix(rows, context: str) -> np.ndarray:
    """Nested [re, im] pairs -> complex matrix, with shape validation."""
    try:
        arr = np.asarray(rows, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise EnsembleConfigError(f"{context}: entries must be [re, im] pairs") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise EnsembleConfigError(f"{context}: expected a matrix of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def vector_to_pairs(vec: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(vec)]


def pairs_to_vector(entries, context: str) -> np.ndarray:
    try:
        arr = np.asarray(entries, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise EnsembleConfigError(f"{context}: entries must be [re, im] pairs") from exc
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise EnsembleConfigError(f"{context}: expected a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def _parse_state(spec, dim: int, label: str) -> DensityOperator:
    context = f"symbol {label!r}"
    if not isinstance(spec, dict) or "kind" not in spec:
        raise EnsembleConfigError(f"{context}: state must be an object with a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "basis_index":
            index = spec.get("index")
            if not isinstance(index, int) or not 0 <= index < dim:
                raise EnsembleConfigError(
                    f"{context}: basis index {index!r} out of range for dimension {dim}"
                )
            return DensityOperator.basis_state(dim, index)
        if kind == "pure_vector":
            vec = pairs_to_vector(spec.get("amplitudes"), context)
            if vec.shape[0] != dim:
                raise EnsembleConfigError(
                    f"{context}: amplitude vector has length {vec.shape[0]}, expected {dim}"
                )
            return DensityOperator.from_pure(vec, normalize=bool(spec.get("normalize", False)))
        if kind == "density_matrix":
            mat = pairs_to_matrix(spec.get("rows"), context)
            if mat.shape != (dim, dim):
                raise EnsembleConfigError(
                    f"{context}: matrix has shape {mat.shape}, expected ({dim}, {dim})"
                )
            return DensityOperator(mat)
    except EnsembleConfigError:
        raise
    except QLeakError as exc:
        raise EnsembleConfigError(f"{context}: invalid state ({exc})") from exc
    raise EnsembleConfigError(f"{context}: unknown state kind {kind!r}")


def parse_ensemble_config(cfg) -> Ensemble:
    """Validate a parsed JSON object and build the ensemble it describes."""
    if not isinstance(cfg, dict):
        raise EnsembleConfigError("top-level config must be an object")
    dim = cfg.get("dimension")
    if not isinstance(dim, int) or dim < 1:
        raise EnsembleConfigError(f"'dimension' must be a positive integer, got {dim!r}")
    symbols_cfg = cfg.get("symbols")
    if not isinstance(symbols_cfg, list) or not symbols_cfg:
        raise EnsembleConfigError("'symbols' must be a non-empty list")

    labels, states, priors = [], [], []
    for i, entry in enumerate(symbols_cfg):
        if not isinstance(entry, dict) or "label" not in entry:
            raise EnsembleConfigError(f"symbol #{i}: must be an object with a 'label'")
        label = str(entry["label"])
        if label in labels:
            raise EnsembleConfigError(f"symbol {label!r}: duplicate label")
        labels.append(label)
        if "prior" in entry:
            prior = entry["prior"]
            if not isinstance(prior, (int, float)) or prior <= 0:
                raise EnsembleConfigError(
                    f"symbol {label!r}: prior must be a positive number, got {prior!r}"
                )
            priors.append(float(prior))
        else:
            priors.append(None)
        states.append(_parse_state(entry.get("state"), dim, label))

    given = [p for p in priors if p is not None]
    if given and len(given) != len(priors):
        missing = labels[priors.index(None)]
        raise EnsembleConfigError(
            f"symbol {missing!r}: prior missing while other symbols set one "
            "(priors are all-or-none)"
        )
    try:
        return Ensemble(labels, states, given if given else None)
    except QLeakError as exc:
        raise EnsembleConfigError(f"invalid ensemble: {exc}") from exc


def ensemble_to_config(ensemble: Ensemble) -> dict:
    """Serialize an ensemble to its JSON form (density_matrix states)."""
    return {
        "dimension": ensemble.dim,
        "symbols": [
            {
                "label": label,
                "prior": float(prior),
                "state": {"kind": "density_matrix",
                          "rows": matrix_to_pairs(state.matrix)},
            }
            for label, prior, state in zip(ensemble.symbols, ensemble.priors,
                                           ensemble.states)
        ],
    }


def _index_preset(dim: int) -> dict:
    return {
        "dimension": dim,
        "symbols": [
            {"label": str(x + 1), "state": {"kind": "basis_index", "index": x}}
            for x in range(dim)
        ],
    }


def _amplitude3_preset() -> dict:
    reference = encode_amplitude_3bit()
    symbols = []
    for label in reference.symbols:
        bits = [int(c) for c in label]
        vec = np.zeros(8)
        for i, bit in enumerate(bits):
            vec[2 * i] = bit
            vec[2 * i + 1] = 1 - bit
        symbols.append({
            "label": label,
            "state": {"kind": "pure_vector",
                      "amplitudes": vector_to_pairs(vec.astype(complex)),
                      "normalize": True},
        })
    return {"dimension": 8, "symbols": symbols}


BUILTIN_FACTORIES = {
    "index2": lambda: encode_index(2),
    "index4": lambda: encode_index(4),
    "index8": lambda: encode_index(8),
    "amplitude3": encode_amplitude_3bit,
}

BUILTIN_CONFIGS = {
    "index2": lambda: _index_preset(2),
    "index4": lambda: _index_preset(4),
    "index8": lambda: _index_preset(8),
    "amplitude3": _amplitude3_preset,
}


def builtin_names() -> list[str]:
    return sorted(BUILTIN_FACTORIES)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def resolve_ensemble(source: str) -> tuple[Ensemble, str]:
    """Load an ensemble from a file path or a ``builtin:NAME`` preset.

    Returns the ensemble together with the sha256 of its content (raw file
    bytes, or the canonical JSON of the preset).
    """
    if source.startswith(BUILTIN_PREFIX):
        name = source[len(BUILTIN_PREFIX):]
        if name not in BUILTIN_FACTORIES:
            raise EnsembleConfigError(
                f"unknown builtin {name!r}; available: {', '.join(builtin_names())}"
            )
        digest = hashlib.sha256(canonical_json(BUILTIN_CONFIGS[name]()).encode()).hexdigest()
        return BUILTIN_FACTORIES[name](), digest
    path = Path(source)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise EnsembleConfigError(f"cannot read ensemble file {source!r}: {exc}") from exc
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise EnsembleConfigError(f"{source}: not valid JSON ({exc})") from exc
    return parse_ensemble_config(cfg), hashlib.sha256(raw).hexdigest()


def parse_channel_config(cfg, dim: int) -> KrausChannel:
    """Build a channel from its JSON form, sized for a given input dim."""
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise EnsembleConfigError("channel config must be an object with a 'kind'")
    kind = cfg["kind"]
    if kind == "global":
        return depolarizing_global(_channel_p(cfg), dim)
    if kind == "local":
        qubits = int(round(np.log2(dim)))
        if 2 ** qubits != dim:
            raise UnsupportedDimensionError(
                f"local channel needs a power-of-two dimension, got {dim}"
            )
        return depolarizing_local(_channel_p(cfg), qubits)
    if kind == "kraus":
        ops_cfg = cfg.get("kraus_ops")
        if not isinstance(ops_cfg, list) or not ops_cfg:
            raise EnsembleConfigError("kraus channel needs a non-empty 'kraus_ops' list")
        ops = [pairs_to_matrix(op, f"kraus_ops[{j}]") for j, op in enumerate(ops_cfg)]
        try:
            channel = KrausChannel(ops)
        except QLeakError as exc:
            raise EnsembleConfigError(f"invalid kraus channel: {exc}") from exc
        if channel.dim_in != dim:
            raise EnsembleConfigError(
                f"kraus channel acts on dim {channel.dim_in}, ensemble has dim {dim}"
            )
        return channel
    raise EnsembleConfigError(f"unknown channel kind {kind!r}")


def _channel_p(cfg) -> float:
    p = cfg.get("p")
    if not isinstance(p, (int, float)):
        raise EnsembleConfigError(f"channel 'p' must be a number, got {p!r}")
    return float(p)


def load_channel(path: str, dim: int) -> KrausChannel:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise EnsembleConfigError(f"cannot read channel file {path!r}: {exc}") from exc
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise EnsembleConfigError(f"{path}: not valid JSON ({exc})") from exc
    return parse_channel_config(cfg, dim)
