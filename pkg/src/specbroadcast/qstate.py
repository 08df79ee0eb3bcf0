"""Dense operator algebra for multipartite density operators.

States are small (a few hundred dimensions at most), so everything here is
plain numpy on dense complex matrices. All entropies are in bits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import unitary_group

DEFAULT_TOL = 1e-9

# Eigenvalues below this are treated as exact zeros when taking square roots.
# eigh noise on unit-trace matrices of size <= a few hundred sits near 1e-15;
# without the floor, sqrt() inflates it to ~1e-8.
SPECTRAL_FLOOR = 1e-13


def _check_dims(dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise ValueError("dims must contain at least one subsystem")
    if any(d < 1 for d in dims):
        raise ValueError(f"every subsystem dimension must be >= 1, got {dims}")
    return dims


@dataclass(frozen=True)
class DensityOperator:
    """A density matrix together with its tensor-factor signature.

    Validated on construction: Hermitian, unit trace and positive
    semidefinite, each within ``tol``.
    """

    dims: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)
    tol: float = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        dims = _check_dims(self.dims)
        m = np.array(self.matrix, dtype=complex)
        n = int(np.prod(dims))
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} does not match dims {dims} (expected {(n, n)})")
        if not np.allclose(m, m.conj().T, atol=self.tol, rtol=0):
            raise ValueError("invariant violated: matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > self.tol:
            raise ValueError(f"invariant violated: trace is {tr!r}, expected 1")
        if np.linalg.eigvalsh(m).min() < -self.tol:
            raise ValueError("invariant violated: matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", m)

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_pure(cls, psi: PureState | np.ndarray, dims: Sequence[int] | None = None) -> DensityOperator:
        if isinstance(psi, PureState):
            dims, vec = psi.dims, psi.amplitudes
        else:
            vec = np.asarray(psi, dtype=complex)
            dims = (vec.size,) if dims is None else dims
        return cls(tuple(dims), np.outer(vec, vec.conj()))

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> DensityOperator:
        n = int(np.prod(dims))
        return cls(tuple(dims), np.eye(n) / n)

    def to_json_dict(self) -> dict:
        flat = self.matrix.reshape(-1)
        return {"dims": list(self.dims), "re": flat.real.tolist(), "im": flat.imag.tolist()}

    @classmethod
    def from_json_dict(cls, data: dict, tol: float = DEFAULT_TOL) -> DensityOperator:
        for key in ("dims", "re", "im"):
            if key not in data:
                raise ValueError(f"missing field {key!r}")
        dims = _check_dims(data["dims"])
        n = int(np.prod(dims))
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data["im"], dtype=float)
        if re.shape != (n * n,) or im.shape != (n * n,):
            raise ValueError(f"'re' and 'im' must each hold {n * n} numbers for dims {list(dims)}")
        return cls(dims, (re + 1j * im).reshape(n, n), tol=tol)


@dataclass(frozen=True)
class PureState:
    dims: tuple[int, ...]
    amplitudes: np.ndarray = field(repr=False)
    tol: float = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        dims = _check_dims(self.dims)
        v = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if v.size != int(np.prod(dims)):
            raise ValueError(f"{v.size} amplitudes do not match dims {dims}")
        if abs(np.linalg.norm(v) - 1.0) > self.tol:
            raise ValueError("invariant violated: state vector is not normalized")
        v.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", v)

    def density(self) -> DensityOperator:
        return DensityOperator.from_pure(self)


@dataclass(frozen=True)
class VonNeumannMeasurement:
    """Orthogonal projectors acting on one tensor factor.

    The family may be incomplete (sum of projectors strictly below identity).
    """

    subsystem: int
    projectors: tuple[np.ndarray, ...]
    tol: float = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        projs = tuple(np.array(p, dtype=complex) for p in self.projectors)
        if not projs:
            raise ValueError("measurement needs at least one projector")
        d = projs[0].shape[0]
        for k, p in enumerate(projs):
            if p.shape != (d, d):
                raise ValueError("projectors must be square and of equal size")
            if not np.allclose(p, p.conj().T, atol=self.tol) or not np.allclose(p @ p, p, atol=self.tol):
                raise ValueError(f"projector {k} is not a Hermitian idempotent")
            for q in projs[k + 1:]:
                if not np.allclose(p @ q, 0, atol=self.tol):
                    raise ValueError("projectors are not mutually orthogonal")
        for p in projs:
            p.setflags(write=False)
        object.__setattr__(self, "projectors", projs)

    @property
    def n_outcomes(self) -> int:
        return len(self.projectors)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @classmethod
    def computational(cls, subsystem: int, dim: int) -> VonNeumannMeasurement:
        eye = np.eye(dim)
        return cls(subsystem, tuple(np.outer(eye[j], eye[j]) for j in range(dim)))

    @classmethod
    def from_vectors(cls, subsystem: int, vectors: Iterable[np.ndarray]) -> VonNeumannMeasurement:
        vecs = [np.asarray(v, dtype=complex) for v in vectors]
        return cls(subsystem, tuple(np.outer(v, v.conj()) for v in vecs))


def _matrix(x) -> np.ndarray:
    if isinstance(x, DensityOperator):
        return x.matrix
    return np.asarray(x, dtype=complex)


def tensor(a, b):
    """Kronecker product of two states of the same kind, concatenating dims."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(a.dims + b.dims, np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator(a.dims + b.dims, np.kron(a.matrix, b.matrix))
    raise TypeError("tensor() needs two PureState or two DensityOperator arguments")


def tensor_all(states: Sequence):
    return reduce(tensor, states)


def _reduce_matrix(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    n = len(dims)
    keep = sorted(keep)
    t = m.reshape(tuple(dims) * 2)
    # einsum letters: row index of factor k -> k, column index -> n + k (or k if traced)
    row = list(range(n))
    col = [n + k if k in keep else k for k in range(n)]
    out = keep + [n + k for k in keep]
    reduced = np.einsum(t, row + col, out)
    d = int(np.prod([dims[k] for k in keep]))
    return reduced.reshape(d, d)


def partial_trace(rho: DensityOperator, keep: Iterable[int]) -> DensityOperator:
    """Reduce ``rho`` to the subsystems in ``keep`` (returned in index order)."""
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    if keep[0] < 0 or keep[-1] >= rho.n_subsystems:
        raise ValueError(f"keep={keep} out of range for {rho.n_subsystems} subsystems")
    if len(keep) == rho.n_subsystems:
        return rho
    m = _reduce_matrix(rho.matrix, rho.dims, keep)
    return DensityOperator(tuple(rho.dims[k] for k in keep), m, tol=rho.tol)


def permute_subsystems(rho: DensityOperator, order: Sequence[int]) -> DensityOperator:
    """Reorder tensor factors; ``order[j]`` is the old index placed at slot j."""
    order = list(order)
    if sorted(order) != list(range(rho.n_subsystems)):
        raise ValueError(f"{order} is not a permutation of the subsystems")
    n = rho.n_subsystems
    if order == list(range(n)):
        return rho
    t = rho.matrix.reshape(rho.dims * 2)
    t = t.transpose(order + [n + k for k in order])
    return DensityOperator(tuple(rho.dims[k] for k in order), t.reshape(rho.size, rho.size), tol=rho.tol)


def partial_transpose(rho: DensityOperator | np.ndarray, subsystem: int, dims: Sequence[int] | None = None) -> np.ndarray:
    """Transpose one tensor factor. Returns a plain Hermitian matrix."""
    m = _matrix(rho)
    dims = tuple(rho.dims) if isinstance(rho, DensityOperator) else tuple(dims)
    n = len(dims)
    if not 0 <= subsystem < n:
        raise ValueError(f"subsystem {subsystem} out of range for {n} subsystems")
    axes = list(range(2 * n))
    axes[subsystem], axes[n + subsystem] = axes[n + subsystem], axes[subsystem]
    return m.reshape(dims * 2).transpose(axes).reshape(m.shape)


def eig_hermitian(m, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and matching orthonormal eigenvectors (columns)."""
    m = _matrix(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.allclose(m, m.conj().T, atol=tol, rtol=0):
        raise ValueError("matrix is not Hermitian")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return w[::-1], v[:, ::-1]


def psd_sqrt(m) -> np.ndarray:
    w, v = eig_hermitian(m)
    w = np.where(w > SPECTRAL_FLOOR, w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def shannon_entropy(probs) -> float:
    p = np.asarray(probs, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def spectrum_entropy(eigenvalues, tol: float = DEFAULT_TOL) -> float:
    """Entropy of a (numerically noisy) spectrum: clamp [-tol, 0) to 0 and renormalize."""
    w = np.asarray(eigenvalues, dtype=float)
    if w.min(initial=0.0) < -tol:
        raise ValueError(f"spectrum has eigenvalue {w.min()} below -tol")
    w = np.clip(w, 0.0, None)
    return shannon_entropy(w / w.sum())


def vn_entropy(rho: DensityOperator | np.ndarray) -> float:
    """Von Neumann entropy in bits."""
    m = _matrix(rho)
    tol = rho.tol if isinstance(rho, DensityOperator) else DEFAULT_TOL
    return spectrum_entropy(np.linalg.eigvalsh((m + m.conj().T) / 2), tol)


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    return shannon_entropy([p, 1.0 - p])


def trace_norm(m) -> float:
    """Sum of singular values."""
    m = _matrix(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("trace norm needs a square matrix")
    return float(np.linalg.svd(m, compute_uv=False).sum())


def generalized_overlap(rho, sigma) -> float:
    """Generalized overlap Tr sqrt(sqrt(rho) sigma sqrt(rho)).

    Evaluated as the nuclear norm of sqrt(rho) sqrt(sigma), which is the same
    quantity but never takes a square root of a rounding-level eigenvalue.
    """
    a, b = _matrix(rho), _matrix(sigma)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if isinstance(rho, DensityOperator) and isinstance(sigma, DensityOperator) and rho.dims != sigma.dims:
        raise ValueError(f"dims mismatch: {rho.dims} vs {sigma.dims}")
    val = np.linalg.svd(psd_sqrt(a) @ psd_sqrt(b), compute_uv=False).sum()
    return float(min(max(val, 0.0), 1.0))


def _label_projectors(dims, system: int, system_basis, measurements) -> list[np.ndarray]:
    basis = [np.asarray(getattr(v, "amplitudes", v), dtype=complex) for v in system_basis]
    n_labels = len(basis)
    per_factor: list[list[np.ndarray] | None] = [None] * len(dims)
    per_factor[system] = [np.outer(v, v.conj()) for v in basis]
    for meas in measurements:
        k = meas.subsystem
        if k == system or not 0 <= k < len(dims):
            raise ValueError(f"measurement on invalid subsystem {k}")
        if meas.n_outcomes != n_labels:
            raise ValueError(
                f"subsystem {k} has {meas.n_outcomes} projectors but the system basis has {n_labels} labels"
            )
        if meas.dim != dims[k]:
            raise ValueError(f"projectors on subsystem {k} have size {meas.dim}, expected {dims[k]}")
        per_factor[k] = list(meas.projectors)
    projs = []
    for i in range(n_labels):
        factors = [np.eye(d) if pf is None else pf[i] for d, pf in zip(dims, per_factor)]
        projs.append(reduce(np.kron, factors))
    return projs


def pinch(
    rho: DensityOperator,
    measurements: Sequence[VonNeumannMeasurement],
    system_basis: Sequence,
    system: int = 0,
) -> DensityOperator:
    """Apply sum_i P_i rho P_i with P_i = |i><i| (x) Pi_i^(1) (x) ... (x) Pi_i^(k).

    Subsystems without a measurement are left untouched. The output trace
    can drop below one when the projector families are incomplete, so the
    result carries a relaxed trace tolerance.
    """
    if len(system_basis) == 0:
        raise ValueError("system basis is empty")
    projs = _label_projectors(rho.dims, system, system_basis, measurements)
    out = sum(p @ rho.matrix @ p for p in projs)
    tr = np.trace(out).real
    if tr > 1 + rho.tol:
        raise ValueError("pinching increased the trace; projectors are not orthogonal")
    return _unnormalized(rho.dims, out)


def _unnormalized(dims, m) -> DensityOperator:
    # bypass the trace check for sub-normalized CP outputs
    obj = object.__new__(DensityOperator)
    m = np.array(m, dtype=complex)
    m.setflags(write=False)
    object.__setattr__(obj, "dims", tuple(dims))
    object.__setattr__(obj, "matrix", m)
    object.__setattr__(obj, "tol", DEFAULT_TOL)
    return obj


def random_density(dims: Sequence[int], rng: np.random.Generator, rank: int | None = None) -> DensityOperator:
    """Ginibre-distributed density matrix, optionally of fixed rank."""
    n = int(np.prod(dims))
    k = n if rank is None else rank
    g = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    m = g @ g.conj().T
    return DensityOperator(tuple(dims), m / np.trace(m).real)


def random_pure(dims: Sequence[int], rng: np.random.Generator) -> PureState:
    n = int(np.prod(dims))
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return PureState(tuple(dims), v / np.linalg.norm(v))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    if dim == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
    return unitary_group.rvs(dim, random_state=rng)


def load_density_operator(path, tol: float = DEFAULT_TOL) -> DensityOperator:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("density-operator file must hold a JSON object")
    return DensityOperator.from_json_dict(data, tol=tol)


def save_density_operator(rho: DensityOperator, path) -> None:
    with open(path, "w") as fh:
        json.dump(rho.to_json_dict(), fh)
