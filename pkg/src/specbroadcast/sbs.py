"""Spectrum broadcast states: construction, certification and condition checks.

A spectrum broadcast state of a system S and environments E_1..E_n is

    sum_i p_i |i><i| (x) rho_i^(1) (x) ... (x) rho_i^(n),   rho_i^(k) rho_j^(k) = 0 for i != j.

:func:`check_sbs` certifies an arbitrary state against that form by
extracting the pointer basis from the system marginal and measuring how far
the state is from each ingredient (coherences, distinguishability, product
form of the conditional states) plus the entropic consequence I(S:F) = H_S.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import qstate
from .info import mutual_information
from .qstate import (
    DensityOperator,
    VonNeumannMeasurement,
    eig_hermitian,
    generalized_overlap,
    partial_trace,
    partial_transpose,
    permute_subsystems,
    pinch,
    shannon_entropy,
    tensor_all,
    trace_norm,
    vn_entropy,
)

RESIDUAL_TOL = 1e-9
DEGENERACY_GAP = 1e-8
NULL_BRANCH = 1e-12
MAX_FULL_SWEEP = 12


class DegeneratePointerBasisError(ValueError):
    """The system marginal has a (near-)degenerate spectrum, so no unique pointer basis exists."""


def _basis_matrix(basis) -> np.ndarray:
    if isinstance(basis, np.ndarray) and basis.ndim == 2:
        return basis.astype(complex)
    return np.column_stack([np.asarray(getattr(v, "amplitudes", v), dtype=complex) for v in basis])


@dataclass(frozen=True)
class SBSSpec:
    """Constructive description of a spectrum broadcast state.

    Attributes:
        probabilities: pointer probabilities p_i.
        pointer_basis: orthonormal system basis, one column per label.
        branches: ``branches[i][k]`` is the state of environment k given label i.
    """

    probabilities: tuple[float, ...]
    pointer_basis: np.ndarray = field(repr=False)
    branches: tuple[tuple[DensityOperator, ...], ...] = field(repr=False)
    tol: float = field(default=RESIDUAL_TOL, repr=False, compare=False)

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.min() < -self.tol or abs(p.sum() - 1) > self.tol:
            raise ValueError("pointer probabilities must be non-negative and sum to 1")
        basis = _basis_matrix(self.pointer_basis)
        if basis.shape[1] != len(p):
            raise ValueError(f"{basis.shape[1]} basis vectors for {len(p)} probabilities")
        if not np.allclose(basis.conj().T @ basis, np.eye(len(p)), atol=self.tol):
            raise ValueError("pointer basis is not orthonormal")
        branches = tuple(tuple(b) for b in self.branches)
        if len(branches) != len(p) or len({len(b) for b in branches}) != 1 or not branches[0]:
            raise ValueError("need the same nonzero number of environment states for every label")
        n_env = len(branches[0])
        for k in range(n_env):
            if len({branches[i][k].dims for i in range(len(p))}) != 1:
                raise ValueError(f"environment {k} branch states have mismatched dims")
            for i, j in itertools.combinations(range(len(p)), 2):
                if np.abs(branches[i][k].matrix @ branches[j][k].matrix).max() > self.tol:
                    raise ValueError(f"branch states {i} and {j} on environment {k} are not orthogonal")
        basis.setflags(write=False)
        object.__setattr__(self, "probabilities", tuple(float(x) for x in p))
        object.__setattr__(self, "pointer_basis", basis)
        object.__setattr__(self, "branches", branches)

    @property
    def n_labels(self) -> int:
        return len(self.probabilities)

    @property
    def n_env(self) -> int:
        return len(self.branches[0])

    @property
    def system_dim(self) -> int:
        return self.pointer_basis.shape[0]

    @property
    def env_dims(self) -> tuple[int, ...]:
        return tuple(b.size for b in self.branches[0])


def build_sbs(spec: SBSSpec) -> DensityOperator:
    """The broadcast state of ``spec``, with the system as subsystem 0."""
    dims = (spec.system_dim,) + tuple(d for b in spec.branches[0] for d in b.dims)
    m = 0
    for i, p in enumerate(spec.probabilities):
        x = spec.pointer_basis[:, i]
        m = m + p * np.kron(np.outer(x, x.conj()), tensor_all(spec.branches[i]).matrix)
    return DensityOperator(dims, m)


def random_sbs_spec(
    rng: np.random.Generator,
    system_dim: int,
    env_dims: Sequence[int],
    mixed: bool = True,
) -> SBSSpec:
    """Random spec: Dirichlet pointer weights, Haar pointer basis, and for each
    environment a Haar-random split of the space into orthogonal branch supports."""
    if min(env_dims) < system_dim:
        raise ValueError("every environment needs dimension >= number of labels")
    probs = rng.dirichlet(np.ones(system_dim))
    basis = qstate.random_unitary(system_dim, rng)
    branches = [[None] * len(env_dims) for _ in range(system_dim)]
    for k, d in enumerate(env_dims):
        u = qstate.random_unitary(d, rng)
        # every label gets at least one column, the rest are dealt at random
        owner = np.concatenate([np.arange(system_dim), rng.integers(0, system_dim, d - system_dim)])
        rng.shuffle(owner)
        for i in range(system_dim):
            cols = u[:, owner == i]
            w = rng.dirichlet(np.ones(cols.shape[1])) if mixed else np.eye(cols.shape[1])[0]
            m = (cols * w) @ cols.conj().T
            branches[i][k] = DensityOperator((d,), m)
    return SBSSpec(tuple(probs), basis, tuple(tuple(b) for b in branches))


@dataclass
class SBSReport:
    pointer_basis: np.ndarray
    spectrum: np.ndarray
    coherence_residual: float
    distinguishability: np.ndarray
    product_deviation: np.ndarray
    entropic_sweep: list[tuple[tuple[int, ...], float]]
    flags: dict[str, bool]
    tol: float

    @property
    def verdict(self) -> bool:
        return all(self.flags.values())

    @property
    def distinguishability_residual(self) -> float:
        off = self.distinguishability[~np.eye(len(self.distinguishability), dtype=bool)]
        off = off[~np.isnan(off)]
        return float(off.max()) if off.size else 0.0

    @property
    def product_residual(self) -> float:
        dev = self.product_deviation[~np.isnan(self.product_deviation)]
        return float(dev.max()) if dev.size else 0.0

    @property
    def entropic_residual(self) -> float:
        return max((gap for _, gap in self.entropic_sweep), default=0.0)

    def to_json_dict(self) -> dict:
        def clean(a):
            return [None if np.isnan(x) else float(x) for x in np.ravel(a)]

        n = len(self.distinguishability)
        return {
            "verdict": self.verdict,
            "criteria": dict(self.flags),
            "tolerance": self.tol,
            "spectrum": [float(x) for x in self.spectrum],
            "pointer_basis": {
                "re": self.pointer_basis.real.tolist(),
                "im": self.pointer_basis.imag.tolist(),
            },
            "coherence_residual": self.coherence_residual,
            "distinguishability": [clean(self.distinguishability[i]) for i in range(n)],
            "product_deviation": clean(self.product_deviation),
            "entropic_sweep": [{"environments": list(s), "gap": g} for s, g in self.entropic_sweep],
        }


def _env_subsets(env: list[int]):
    if len(env) <= MAX_FULL_SWEEP:
        for r in range(1, len(env) + 1):
            yield from itertools.combinations(env, r)
    else:
        for r in range(1, len(env) + 1):
            yield tuple(env[:r])


def check_sbs(rho: DensityOperator, system: int = 0, tol: float = RESIDUAL_TOL) -> SBSReport:
    """Certify ``rho`` against the spectrum broadcast form.

    Raises:
        DegeneratePointerBasisError: two eigenvalues of the system marginal
            are closer than ``DEGENERACY_GAP``.
    """
    n = rho.n_subsystems
    if not 0 <= system < n:
        raise ValueError(f"system index {system} out of range")
    if n < 2:
        raise ValueError("need at least one environment besides the system")
    env = [k for k in range(n) if k != system]
    rho_s = partial_trace(rho, [system])
    spectrum, basis = eig_hermitian(rho_s.matrix)
    if np.any(np.abs(np.diff(spectrum)) < DEGENERACY_GAP):
        raise DegeneratePointerBasisError(
            f"system spectrum {spectrum.tolist()} is degenerate; pointer basis is ill-defined"
        )
    d_s = len(spectrum)

    ordered = permute_subsystems(rho, [system] + env)
    env_dims = ordered.dims[1:]
    d_e = int(np.prod(env_dims))
    rot = np.kron(basis, np.eye(d_e))
    w = rot.conj().T @ ordered.matrix @ rot

    def block(i, j):
        return w[i * d_e:(i + 1) * d_e, j * d_e:(j + 1) * d_e]

    coherence = sum(trace_norm(block(i, j)) for i in range(d_s) for j in range(d_s) if i != j)

    probs = np.array([np.trace(block(i, i)).real for i in range(d_s)])
    live = [i for i in range(d_s) if probs[i] >= NULL_BRANCH]
    marginals: dict[int, list[DensityOperator]] = {}
    product_dev = np.full(d_s, np.nan)
    for i in live:
        branch = _normalized(env_dims, block(i, i) / probs[i])
        marginals[i] = [partial_trace(branch, [k]) for k in range(len(env_dims))]
        prod = tensor_all(marginals[i]).matrix
        product_dev[i] = trace_norm(branch.matrix - prod)

    dist = np.full((d_s, d_s), np.nan)
    for i in live:
        dist[i, i] = 1.0
    for i, j in itertools.combinations(live, 2):
        dist[i, j] = dist[j, i] = max(
            generalized_overlap(marginals[i][k], marginals[j][k]) for k in range(len(env_dims))
        )

    h_s = shannon_entropy(np.clip(spectrum, 0, None))
    sweep = []
    for subset in _env_subsets(env):
        reduced = partial_trace(rho, (system,) + subset)
        sys_pos = sorted((system,) + subset).index(system)
        gap = abs(mutual_information(reduced, [sys_pos]) - h_s)
        sweep.append((subset, gap))

    report = SBSReport(
        pointer_basis=basis,
        spectrum=spectrum,
        coherence_residual=float(coherence),
        distinguishability=dist,
        product_deviation=product_dev,
        entropic_sweep=sweep,
        flags={},
        tol=tol,
    )
    report.flags.update(
        coherence=report.coherence_residual < tol,
        distinguishability=report.distinguishability_residual < tol,
        product=report.product_residual < tol,
        entropic=report.entropic_residual < tol,
    )
    return report


def _normalized(dims, m) -> DensityOperator:
    m = (m + m.conj().T) / 2
    return DensityOperator(tuple(dims), m / np.trace(m).real, tol=1e-7)


def bohr_residual(
    rho: DensityOperator,
    system_basis,
    env_measurements: Sequence[VonNeumannMeasurement],
    system: int = 0,
) -> float:
    """Trace-norm distance between ``rho`` and its pinching by the joint local measurements.

    Zero exactly for classical-quantum states whose branches sit inside the
    matching projectors.
    """
    basis = _basis_matrix(system_basis)
    vectors = [basis[:, i] for i in range(basis.shape[1])]
    return trace_norm(pinch(rho, env_measurements, vectors, system=system).matrix - rho.matrix)


@dataclass(frozen=True)
class JointOutcomeTensor:
    """p[i, j_1, ..., j_n]: system outcome i and observer outcomes j_k."""

    probs: np.ndarray = field(repr=False)
    tol: float = field(default=1e-9, repr=False, compare=False)

    def __post_init__(self):
        t = np.array(self.probs, dtype=float)
        if t.ndim < 2:
            raise ValueError("need a system axis and at least one observer axis")
        if t.min() < -self.tol or abs(t.sum() - 1) > self.tol:
            raise ValueError("joint outcome tensor must be non-negative and sum to 1")
        t = np.clip(t, 0, None)
        t.setflags(write=False)
        object.__setattr__(self, "probs", t)

    @property
    def n_observers(self) -> int:
        return self.probs.ndim - 1


def joint_outcome_tensor(
    rho: DensityOperator,
    system_basis,
    measurements: Sequence[VonNeumannMeasurement],
    system: int = 0,
) -> JointOutcomeTensor:
    """Outcome statistics of measuring the system in ``system_basis`` and each
    observer with its projectors; outcomes outside an incomplete family are dropped,
    so the tensor is renormalized."""
    basis = _basis_matrix(system_basis)
    rows = [np.outer(basis[:, i], basis[:, i].conj()) for i in range(basis.shape[1])]
    shape = [len(rows)] + [m.n_outcomes for m in measurements]
    out = np.zeros(shape)
    for idx in itertools.product(*(range(s) for s in shape)):
        factors = [np.eye(d) for d in rho.dims]
        factors[system] = rows[idx[0]]
        for meas, j in zip(measurements, idx[1:]):
            factors[meas.subsystem] = meas.projectors[j]
        op = factors[0]
        for f in factors[1:]:
            op = np.kron(op, f)
        out[idx] = np.trace(op @ rho.matrix).real
    return JointOutcomeTensor(out / out.sum())


@dataclass
class AgreementResult:
    passed: bool
    relabeling: list[np.ndarray]
    witness: tuple[tuple[int, ...], float] | None = None


def agreement_check(t: JointOutcomeTensor, tol: float = 1e-12) -> AgreementResult:
    """Do all observers agree with the system after relabeling their outcomes?

    For each observer, outcomes are greedily matched to system labels in order
    of decreasing conditional probability p(i | j). The tensor passes when its
    whole support then lies on i = j_1 = ... = j_n; otherwise the heaviest
    entry off that diagonal is returned as the witness.
    ``relabeling[k][j]`` is the system label assigned to outcome j of observer
    k, or -1 if none is left.
    """
    p = t.probs
    n_s = p.shape[0]
    relabel = []
    for k in range(1, p.ndim):
        other = tuple(a for a in range(1, p.ndim) if a != k)
        joint = p.sum(axis=other) if other else p
        col = joint.sum(axis=0)
        cond = np.divide(joint, col, out=np.zeros_like(joint), where=col > 0)
        mapping = np.full(joint.shape[1], -1)
        used: set[int] = set()
        pairs = sorted(
            ((cond[i, j], col[j], i, j) for i in range(n_s) for j in range(joint.shape[1]) if col[j] > tol),
            key=lambda x: (-x[0], -x[1], x[2], x[3]),
        )
        for _, _, i, j in pairs:
            if mapping[j] < 0 and i not in used:
                mapping[j] = i
                used.add(i)
        free = iter(i for i in range(n_s) if i not in used)
        for j in range(len(mapping)):
            if mapping[j] < 0 and col[j] <= tol:
                mapping[j] = next(free, -1)
        relabel.append(mapping)

    worst = None
    for idx in zip(*np.nonzero(p > tol)):
        i = idx[0]
        if any(relabel[k][j] != i for k, j in enumerate(idx[1:])):
            val = float(p[idx])
            if worst is None or val > worst[1]:
                worst = (tuple(int(x) for x in idx), val)
    return AgreementResult(passed=worst is None, relabeling=relabel, witness=worst)


def cc_broadcast_channel(rho_s: DensityOperator | np.ndarray, spec: SBSSpec) -> DensityOperator:
    """Measure the system in the pointer basis and broadcast the outcome:
    rho -> sum_i <x_i|rho|x_i> rho_i^(1) (x) ... (x) rho_i^(n)."""
    m = rho_s.matrix if isinstance(rho_s, DensityOperator) else np.asarray(rho_s, dtype=complex)
    if m.shape != (spec.system_dim, spec.system_dim):
        raise ValueError(f"input has shape {m.shape}, spec system dimension is {spec.system_dim}")
    dims = tuple(d for b in spec.branches[0] for d in b.dims)
    out = 0
    for i in range(spec.n_labels):
        x = spec.pointer_basis[:, i]
        weight = (x.conj() @ m @ x).real
        out = out + weight * tensor_all(spec.branches[i]).matrix
    return DensityOperator(dims, out)


def witness_state(p: float, system: str = "second") -> DensityOperator:
    """p P(a|00> + b|11>) + (1-p) P(a|01> + b|10>) with a = sqrt(p), b = sqrt(1-p).

    The system qubit is the factor whose marginal is diag(p~, 1-p~) with
    p~ = p^2 + (1-p)^2; in the state as written that is the second factor.
    ``system`` chooses where the system sits in the returned ordering.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p={p} must lie strictly between 0 and 1")
    a, b = np.sqrt(p), np.sqrt(1 - p)
    v1 = np.array([a, 0, 0, b])
    v2 = np.array([0, a, b, 0])
    rho = DensityOperator((2, 2), p * np.outer(v1, v1) + (1 - p) * np.outer(v2, v2))
    if system == "second":
        return rho
    if system == "first":
        return permute_subsystems(rho, [1, 0])
    raise ValueError("system must be 'first' or 'second'")


@dataclass
class WitnessReport:
    p: float
    p_tilde: float
    mutual_information: float
    system_entropy: float
    joint_entropy: float
    h_s: float
    gap: float
    ppt_min_eigenvalue: float
    entropic_condition: bool
    entangled: bool

    @property
    def verdict(self) -> str:
        if self.entropic_condition and self.entangled:
            return "entropic condition satisfied; state entangled"
        return (
            f"entropic condition {'satisfied' if self.entropic_condition else 'violated'}; "
            f"state {'entangled' if self.entangled else 'PPT'}"
        )


def witness_report(p: float, tol: float = 1e-10, ppt_tol: float = 1e-12) -> WitnessReport:
    """Evaluate the entropic objectivity condition and the PPT test on :func:`witness_state`."""
    if abs(p - 0.5) < 1e-12:
        raise ValueError("p = 1/2 is excluded: the state is then an equal Bell mixture and separable")
    rho = witness_state(p, system="first")
    rho_s = partial_trace(rho, [0])
    info = mutual_information(rho, [0])
    s_s = vn_entropy(rho_s)
    h_s = shannon_entropy(np.clip(eig_hermitian(rho_s.matrix)[0], 0, None))
    ppt = float(np.linalg.eigvalsh(partial_transpose(rho, 1)).min())
    gap = abs(info - h_s)
    return WitnessReport(
        p=p,
        p_tilde=p**2 + (1 - p) ** 2,
        mutual_information=info,
        system_entropy=s_s,
        joint_entropy=vn_entropy(rho),
        h_s=h_s,
        gap=gap,
        ppt_min_eigenvalue=ppt,
        entropic_condition=gap < tol and abs(s_s - h_s) < tol,
        entangled=ppt < -ppt_tol,
    )

