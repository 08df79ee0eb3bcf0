"""Entropic functionals and scalar continuity/Holevo bound evaluators (bits)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qstate import (
    DEFAULT_TOL,
    DensityOperator,
    binary_entropy,
    partial_trace,
    shannon_entropy,
    vn_entropy,
)


@dataclass(frozen=True)
class Ensemble:
    probabilities: tuple[float, ...]
    states: tuple[DensityOperator, ...]

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if len(p) != len(self.states) or len(p) == 0:
            raise ValueError("need one probability per state")
        if p.min() < -DEFAULT_TOL or abs(p.sum() - 1) > DEFAULT_TOL:
            raise ValueError("probabilities must be non-negative and sum to 1")
        if len({s.dims for s in self.states}) != 1:
            raise ValueError("ensemble states have mismatched dims")
        object.__setattr__(self, "probabilities", tuple(float(x) for x in p))
        object.__setattr__(self, "states", tuple(self.states))

    def average(self) -> np.ndarray:
        return sum(p * s.matrix for p, s in zip(self.probabilities, self.states))


@dataclass(frozen=True)
class JointPMF:
    """Joint distribution p[i, j] of two parties' outcomes."""

    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.ndim != 2:
            raise ValueError("joint PMF must be a 2-d table")
        if t.min() < -DEFAULT_TOL:
            raise ValueError("joint PMF has negative entries")
        if abs(t.sum() - 1) > DEFAULT_TOL:
            raise ValueError(f"joint PMF sums to {t.sum()}, not 1")
        t = np.clip(t, 0, None)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)


def _check_cut(n: int, a: Sequence[int], b: Sequence[int] | None) -> tuple[list[int], list[int]]:
    a = sorted(set(a))
    b = sorted(set(range(n)) - set(a)) if b is None else sorted(set(b))
    if not a or not b:
        raise ValueError("both sides of the cut must be nonempty")
    if set(a) & set(b) or set(a) | set(b) != set(range(n)):
        raise ValueError(f"cut {a} | {b} is not a bipartition of {n} subsystems")
    return a, b


def mutual_information(rho: DensityOperator, a: Sequence[int], b: Sequence[int] | None = None) -> float:
    """I(A:B) = S(A) + S(B) - S(AB); ``b`` defaults to the complement of ``a``."""
    a, b = _check_cut(rho.n_subsystems, a, b)
    return (
        vn_entropy(partial_trace(rho, a))
        + vn_entropy(partial_trace(rho, b))
        - vn_entropy(rho)
    )


def conditional_vn_entropy(rho: DensityOperator, conditioning: Sequence[int]) -> float:
    """S(AB) - S(B) with B the ``conditioning`` subsystems."""
    cond = sorted(set(conditioning))
    if not cond or cond[0] < 0 or cond[-1] >= rho.n_subsystems or len(cond) == rho.n_subsystems:
        raise ValueError(f"invalid conditioning set {list(conditioning)}")
    return vn_entropy(rho) - vn_entropy(partial_trace(rho, cond))


def holevo_chi(e: Ensemble) -> float:
    return vn_entropy(e.average()) - sum(p * vn_entropy(s) for p, s in zip(e.probabilities, e.states))


def classical_mutual_information(j: JointPMF | np.ndarray) -> float:
    t = j.table if isinstance(j, JointPMF) else JointPMF(j).table
    return shannon_entropy(t.sum(axis=1)) + shannon_entropy(t.sum(axis=0)) - shannon_entropy(t.ravel())


def measured_pmf(e: Ensemble, povm: Sequence[np.ndarray]) -> JointPMF:
    """p[i, j] = p_i Tr(E_j rho_i)."""
    table = np.array(
        [[p * np.trace(E @ s.matrix).real for E in povm] for p, s in zip(e.probabilities, e.states)]
    )
    return JointPMF(table)


def _check_eps(eps: float, d: int) -> None:
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps={eps} outside [0, 1]")
    if d < 2:
        raise ValueError(f"dimension d={d} must be >= 2")


def fannes_audenaert_rhs(eps: float, d: int) -> float:
    """(eps/2) log(d-1) + h(eps/2), with ``eps`` an (unhalved) trace-norm distance."""
    _check_eps(eps, d)
    return float(0.5 * eps * np.log2(d - 1) + binary_entropy(eps / 2))


def alicki_fannes_rhs(eps: float, d: int) -> float:
    """4 eps log d + 2 h(eps), with ``eps`` an (unhalved) trace-norm distance."""
    _check_eps(eps, d)
    return float(4 * eps * np.log2(d) + 2 * binary_entropy(eps))


def distinguishability_lower_bound(p1: float, p2: float, b: float, copies: int = 1) -> float:
    """H(p1, p2) - 2 sqrt(p1 p2) b**copies, clamped at zero."""
    if min(p1, p2) < 0 or abs(p1 + p2 - 1) > DEFAULT_TOL:
        raise ValueError(f"({p1}, {p2}) is not a probability pair")
    if not 0.0 <= b <= 1.0:
        raise ValueError(f"overlap {b} outside [0, 1]")
    if copies < 1:
        raise ValueError("copies must be >= 1")
    return float(max(0.0, shannon_entropy([p1, p2]) - 2 * np.sqrt(p1 * p2) * b**copies))
