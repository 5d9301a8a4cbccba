"""Domain layer: density operators, classical-quantum ensembles, POVMs and
Kraus channels, plus the two reference encoders and depolarizing noise models.

Constructors validate every invariant, so no invalid value circulates past
this module; all wrapped arrays are frozen (read-only) and therefore safe to
share across threads.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import linalg
from .exceptions import (
    DegenerateDrawError,
    DimensionMismatchError,
    DimensionOverflowError,
    ImaginaryLeakError,
    InvalidChannelError,
    InvalidProbabilityError,
    NotHermitianError,
    NotPsdError,
    NumericalFailureError,
)

DENSITY_ATOL = 1e-9      # hermiticity / PSD / trace tolerance for states
POVM_ATOL = 1e-8         # per-element PSD and completeness tolerance
CHANNEL_ATOL = 1e-9      # trace-preservation tolerance for Kraus sets

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


class DensityOperator:
    """A d x d Hermitian, PSD, unit-trace operator."""

    def __init__(self, matrix):
        mat = linalg.as_cmatrix(matrix, "density operator")
        if mat.shape[0] != mat.shape[1]:
            raise DimensionMismatchError(f"density operator must be square, got {mat.shape}")
        if linalg.hermiticity_defect(mat) > DENSITY_ATOL:
            raise NotHermitianError(
                f"density operator asymmetry exceeds {DENSITY_ATOL:.0e}"
            )
        mat = linalg.hermitize(mat)
        eigs = np.linalg.eigvalsh(mat)
        if eigs[0] < -DENSITY_ATOL:
            raise NotPsdError(f"density operator eigenvalue {eigs[0]:.3e} is negative")
        tr = float(mat.trace().real)
        if abs(tr - 1.0) > DENSITY_ATOL:
            raise NumericalFailureError(f"density operator trace {tr!r} is not 1")
        self.matrix = _frozen(mat)
        self.dim = mat.shape[0]

    @classmethod
    def from_pure(cls, amplitudes, normalize: bool = False) -> "DensityOperator":
        """Rank-one projector |psi><psi| from a state vector."""
        vec = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(vec)
        if normalize:
            if norm == 0:
                raise NumericalFailureError("cannot normalize the zero vector")
            vec = vec / norm
        return cls(np.outer(vec, vec.conj()))

    @classmethod
    def basis_state(cls, dim: int, index: int) -> "DensityOperator":
        """Computational-basis projector |index><index| in dimension dim."""
        if not 0 <= index < dim:
            raise DimensionMismatchError(f"basis index {index} out of range for dim {dim}")
        vec = np.zeros(dim)
        vec[index] = 1.0
        return cls.from_pure(vec)

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityOperator":
        return cls(np.eye(dim) / dim)

    def __repr__(self) -> str:
        return f"DensityOperator(dim={self.dim})"


class Ensemble:
    """Classical secret support with a prior and one density operator per
    symbol.

    Parameters
    ----------
    symbols : sequence of str
        Labels of the secret alphabet, in order.
    states : sequence of DensityOperator
        One state per symbol, all of equal dimension.
    priors : sequence of float, optional
        Strictly positive, summing to 1. Defaults to uniform.
    """

    def __init__(self, symbols: Sequence[str], states: Sequence[DensityOperator],
                 priors: Sequence[float] | None = None):
        self.symbols = tuple(str(s) for s in symbols)
        self.states = tuple(states)
        if not self.symbols:
            raise DimensionMismatchError("ensemble needs at least one symbol")
        if len(self.symbols) != len(self.states):
            raise DimensionMismatchError(
                f"{len(self.symbols)} symbols but {len(self.states)} states"
            )
        dims = {s.dim for s in self.states}
        if len(dims) != 1:
            raise DimensionMismatchError(f"states have mixed dimensions {sorted(dims)}")
        self.dim = self.states[0].dim
        if priors is None:
            p = np.full(len(self.symbols), 1.0 / len(self.symbols))
        else:
            p = np.asarray(priors, dtype=np.float64)
            if p.shape != (len(self.symbols),):
                raise DimensionMismatchError("one prior per symbol required")
            if np.any(p <= 0.0):
                raise InvalidProbabilityError("priors must be strictly positive")
            if abs(p.sum() - 1.0) > 1e-12:
                raise InvalidProbabilityError(f"priors sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        self.priors = p

    @property
    def size(self) -> int:
        return len(self.symbols)

    def state_stack(self) -> np.ndarray:
        """All states as one (|X|, d, d) array (a fresh, writable copy)."""
        return np.stack([s.matrix for s in self.states])

    def average_state(self) -> DensityOperator:
        """The prior-weighted mixture sum_x p(x) rho^x."""
        avg = np.tensordot(self.priors, self.state_stack(), axes=1)
        return DensityOperator(avg)

    def with_priors(self, priors: Sequence[float]) -> "Ensemble":
        return Ensemble(self.symbols, self.states, priors)

    def transform(self, channel: "KrausChannel") -> "Ensemble":
        """Apply a quantum channel to every state, keeping labels and priors."""
        return Ensemble(
            self.symbols,
            [apply_channel(channel, s) for s in self.states],
            self.priors,
        )

    def is_indistinguishable(self, atol: float = 1e-9) -> bool:
        """True when all states agree entrywise within atol."""
        first = self.states[0].matrix
        return all(np.max(np.abs(s.matrix - first)) <= atol for s in self.states[1:])

    def __repr__(self) -> str:
        return f"Ensemble(|X|={self.size}, dim={self.dim})"


class Povm:
    """Ordered set of PSD operators summing to the identity."""

    def __init__(self, elements: Iterable):
        mats = [linalg.as_cmatrix(e, f"POVM element {i}") for i, e in enumerate(elements)]
        if not mats:
            raise DimensionMismatchError("POVM needs at least one element")
        dim = mats[0].shape[0]
        for i, m in enumerate(mats):
            if m.shape != (dim, dim):
                raise DimensionMismatchError(f"POVM element {i} has shape {m.shape}")
            if linalg.hermiticity_defect(m) > POVM_ATOL:
                raise NotHermitianError(f"POVM element {i} is not Hermitian")
            low = np.linalg.eigvalsh(linalg.hermitize(m))[0]
            if low < -POVM_ATOL:
                raise NotPsdError(f"POVM element {i} has eigenvalue {low:.3e}")
        total = sum(mats)
        defect = np.max(np.abs(total - np.eye(dim)))
        if defect > POVM_ATOL:
            raise NumericalFailureError(
                f"POVM completeness defect {defect:.3e} exceeds {POVM_ATOL:.0e}"
            )
        self.elements = tuple(_frozen(linalg.hermitize(m)) for m in mats)
        self.dim = dim

    @classmethod
    def computational_basis(cls, dim: int) -> "Povm":
        return cls([np.diag(row) for row in np.eye(dim)])

    def element_stack(self) -> np.ndarray:
        """All elements as one (m, d, d) array (a fresh, writable copy)."""
        return np.stack(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.elements)

    def __repr__(self) -> str:
        return f"Povm(m={len(self)}, dim={self.dim})"


class KrausChannel:
    """Quantum channel in Kraus form: rho -> sum_j E_j rho E_j^dag."""

    def __init__(self, kraus_ops: Iterable):
        ops = [linalg.as_cmatrix(e, f"Kraus operator {j}") for j, e in enumerate(kraus_ops)]
        if not ops:
            raise InvalidChannelError("channel needs at least one Kraus operator")
        dim_out, dim_in = ops[0].shape
        for j, op in enumerate(ops):
            if op.shape != (dim_out, dim_in):
                raise DimensionMismatchError(f"Kraus operator {j} has shape {op.shape}")
        total = sum(op.conj().T @ op for op in ops)
        defect = np.max(np.abs(total - np.eye(dim_in)))
        if defect > CHANNEL_ATOL:
            raise InvalidChannelError(
                f"sum E^dag E deviates from identity by {defect:.3e}"
            )
        self.kraus_ops = tuple(_frozen(op) for op in ops)
        self.dim_in = dim_in
        self.dim_out = dim_out

    @classmethod
    def identity(cls, dim: int) -> "KrausChannel":
        return cls([np.eye(dim)])

    def __repr__(self) -> str:
        return f"KrausChannel({self.dim_in}->{self.dim_out}, {len(self.kraus_ops)} ops)"


def born_distribution(ensemble: Ensemble, povm: Povm) -> np.ndarray:
    """Measurement-outcome probabilities P[y|x] for every ensemble symbol.

    Returns an (|X|, m) array whose row x is the outcome distribution of
    measuring state rho^x; each row sums to 1 within POVM tolerance.
    """
    if ensemble.dim != povm.dim:
        raise DimensionMismatchError(
            f"ensemble dim {ensemble.dim} != POVM dim {povm.dim}"
        )
    traces = np.einsum("xij,yji->xy", ensemble.state_stack(), povm.element_stack())
    worst_imag = float(np.max(np.abs(traces.imag)))
    if worst_imag > 1e-9:
        raise ImaginaryLeakError(f"Born probabilities carry imaginary part {worst_imag:.3e}")
    probs = traces.real
    if probs.min() < -1e-9 or probs.max() > 1.0 + 1e-9:
        raise NumericalFailureError(
            f"Born probabilities outside [0,1]: range [{probs.min():.3e}, {probs.max():.3e}]"
        )
    probs = np.clip(probs, 0.0, 1.0)
    row_defect = float(np.max(np.abs(probs.sum(axis=1) - 1.0)))
    if row_defect > POVM_ATOL:
        raise NumericalFailureError(f"outcome distributions sum to 1 +/- {row_defect:.3e}")
    return probs


def apply_channel(channel: KrausChannel, rho: DensityOperator) -> DensityOperator:
    """Push a density operator through a channel: sum_j E_j rho E_j^dag."""
    if channel.dim_in != rho.dim:
        raise DimensionMismatchError(
            f"channel expects dim {channel.dim_in}, state has dim {rho.dim}"
        )
    out = np.zeros((channel.dim_out, channel.dim_out), dtype=np.complex128)
    for op in channel.kraus_ops:
        out += op @ rho.matrix @ op.conj().T
    if abs(out.trace().real - 1.0) > 1e-10:
        raise InvalidChannelError(f"channel changed the trace to {out.trace().real!r}")
    return DensityOperator(out)


def _check_probability(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise InvalidProbabilityError(f"probability parameter {p!r} outside [0, 1]")
    return p


def depolarizing_global(p: float, dim: int) -> KrausChannel:
    """Global depolarizing channel: rho -> (p/d) I + (1-p) rho.

    Realized with Kraus operators {sqrt(1-p) I} and {sqrt(p/d) |i><j|};
    only the action is contractual, not this particular Kraus set.
    """
    p = _check_probability(p)
    if dim < 2:
        raise DimensionMismatchError("depolarizing channel needs dim >= 2")
    ops = [np.sqrt(1.0 - p) * np.eye(dim)]
    if p > 0.0:
        scale = np.sqrt(p / dim)
        for i in range(dim):
            for j in range(dim):
                op = np.zeros((dim, dim))
                op[i, j] = scale
                ops.append(op)
    return KrausChannel(ops)


def depolarizing_local(p: float, qubits: int) -> KrausChannel:
    """Per-qubit depolarizing noise on a register of ``qubits`` qubits.

    Tensor product of single-qubit channels with Kraus set
    {sqrt(1-3p/4) I, sqrt(p/4) X, sqrt(p/4) Y, sqrt(p/4) Z}; the full set is
    all 4^k tensor products, hence the hard cap at k = 6.
    """
    p = _check_probability(p)
    if qubits < 1:
        raise DimensionMismatchError("need at least one qubit")
    if qubits > 6:
        raise DimensionOverflowError(
            f"local depolarizing on {qubits} qubits needs 4^{qubits} Kraus operators"
        )
    single = [
        np.sqrt(1.0 - 0.75 * p) * np.eye(2),
        np.sqrt(p / 4.0) * PAULI_X,
        np.sqrt(p / 4.0) * PAULI_Y,
        np.sqrt(p / 4.0) * PAULI_Z,
    ]
    ops = []
    for combo in itertools.product(single, repeat=qubits):
        op = combo[0]
        for factor in combo[1:]:
            op = np.kron(op, factor)
        ops.append(op)
    # Zero-weight operators (p = 0 or p = 4/3 edge) contribute nothing.
    ops = [op for op in ops if np.any(op)]
    return KrausChannel(ops)


def encode_index(dim: int) -> Ensemble:
    """Index encoding: symbols 1..d mapped to basis projectors |x><x|."""
    if dim < 2:
        raise DimensionMismatchError("index encoding needs dim >= 2")
    symbols = [str(x) for x in range(1, dim + 1)]
    states = [DensityOperator.basis_state(dim, x) for x in range(dim)]
    return Ensemble(symbols, states)


def encode_amplitude_3bit() -> Ensemble:
    """Amplitude-style encoding of 3 bits into a dimension-8 pure state.

    Bit x_i selects one basis vector of the pair (|2i>, |2i+1>); the three
    selected vectors are superposed with equal weight 1/sqrt(3), which
    normalizes the state (basis vectors 6 and 7 stay unused).
    """
    symbols = []
    states = []
    for bits in itertools.product((0, 1), repeat=3):
        vec = np.zeros(8)
        for i, bit in enumerate(bits):
            vec[2 * i] = bit
            vec[2 * i + 1] = 1 - bit
        symbols.append("".join(str(b) for b in bits))
        states.append(DensityOperator.from_pure(vec / np.sqrt(3.0)))
    return Ensemble(symbols, states)


def random_povm(dim: int, size: int, seed: int) -> Povm:
    """Random rank-one POVM: Gaussian vectors g_y, renormalized so that the
    outer products S^(-1/2) g_y g_y^dag S^(-1/2) sum to the identity.

    Deterministic for a given seed. Needs size >= dim for the normalizer
    S = sum g_y g_y^dag to be full rank; rank-deficient draws are retried
    up to 3 times before failing.
    """
    rng = np.random.default_rng(seed)
    for _ in range(4):
        g = (rng.standard_normal((size, dim)) + 1j * rng.standard_normal((size, dim)))
        g /= np.sqrt(2.0)
        s = np.einsum("yi,yj->ij", g, g.conj())
        eigs = np.linalg.eigvalsh(s)
        if eigs[0] > 1e-10 * max(1.0, eigs[-1]):
            w = linalg.inv_sqrt_psd(s)
            h = g @ w.T  # h_y = w @ g_y since w is symmetric under transpose-conj
            return Povm([np.outer(v, v.conj()) for v in h])
    raise DegenerateDrawError(
        f"normalizer stayed rank-deficient after retries (size={size}, dim={dim}; "
        "size >= dim is required)"
    )


def random_kraus_channel(dim: int, n_ops: int, seed: int) -> KrausChannel:
    """Random trace-preserving channel: Gaussian operators renormalized by
    (sum A^dag A)^(-1/2) on the right."""
    rng = np.random.default_rng(seed)
    raw = (rng.standard_normal((n_ops, dim, dim))
           + 1j * rng.standard_normal((n_ops, dim, dim))) / np.sqrt(2.0)
    total = np.einsum("jki,jkl->il", raw.conj(), raw)
    w = linalg.inv_sqrt_psd(total)
    return KrausChannel([a @ w for a in raw])
