"""Illuminated dielectric sphere decohered by a photon environment.

The sphere sits at one of two positions x_1, x_2; each scattered photon
leaves the environment in S_i|k0> depending on the position. Everything the
model needs is the single-photon overlap z = <k0|S_2^dag S_1|k0>, known as a
series in 1/L^2 for box normalization of edge L. With pure photons the
state of the system and an observed fraction f of the photons has rank 2,

    rho_{S:fE} = sum_ij c_ij kappa_ij |x_i><x_j| (x) |Psi_i><Psi_j|,
    kappa_12 = z^{(1-f) N_t},   <Psi_2|Psi_1> = z^{f N_t},

so every entropy reduces to a 2x2 eigenproblem and the mutual information
is exact at any photon number.

Two evaluation modes are offered: ``"finite"`` keeps the box edge L and the
complex phase of z; ``"thermodynamic"`` takes L -> infinity at fixed photon
density, where |z|^{N_t} -> exp(-t / tau_D).

Units are SI throughout; times are in seconds.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import qstate
from .info import alicki_fannes_rhs, fannes_audenaert_rhs, mutual_information
from .qstate import DensityOperator, binary_entropy, shannon_entropy, spectrum_entropy

SPEED_OF_LIGHT = 299_792_458.0
REGIME_LIMIT = 0.1
MODES = ("finite", "thermodynamic")


class RegimeWarning(UserWarning):
    """Parameters leave the soft-scattering or dipole regime of the overlap series."""


@dataclass(frozen=True)
class SphereParams:
    """Physical parameters (SI units).

    Attributes:
        radius: sphere radius a.
        permittivity: relative permittivity, > 1.
        displacement: separation |x_2 - x_1|.
        k0: photon wavenumber.
        theta: angle between the photon direction and the displacement.
        density: photon number density N/V.
        c: speed of light.
        box_edge: quantization box edge L (finite-L mode only).
    """

    radius: float
    permittivity: float
    displacement: float
    k0: float
    theta: float = 0.0
    density: float = 1.0
    c: float = SPEED_OF_LIGHT
    box_edge: float = 1.0

    def __post_init__(self):
        for name in ("radius", "displacement", "k0", "density", "c", "box_edge"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if not self.permittivity > 1:
            raise ValueError(f"permittivity must exceed 1, got {self.permittivity!r}")
        if self.k0 * self.displacement > REGIME_LIMIT:
            warnings.warn(
                f"k0*displacement = {self.k0 * self.displacement:.3g} is not small; "
                "photons start resolving the displacement individually",
                RegimeWarning,
                stacklevel=3,
            )
        if self.k0 * self.radius > REGIME_LIMIT:
            warnings.warn(
                f"k0*radius = {self.k0 * self.radius:.3g} leaves the dipole regime",
                RegimeWarning,
                stacklevel=3,
            )

    @property
    def effective_radius(self) -> float:
        """a [(eps - 1) / (eps + 2)]^(1/3)."""
        return self.radius * ((self.permittivity - 1) / (self.permittivity + 2)) ** (1 / 3)

    @property
    def angular_factor(self) -> float:
        return 3 + 11 * math.cos(self.theta) ** 2

    def with_box_edge(self, box_edge: float) -> SphereParams:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RegimeWarning)
            return dataclasses.replace(self, box_edge=box_edge)


@dataclass(frozen=True)
class FractionPartition:
    """Coarse-graining of the photons: macro-fractions of size m, observed fraction f,
    plus ``mu`` extra photons that do not scale with the photon number."""

    m: float = 0.1
    f: float = 0.5
    mu: float = 0.0

    def __post_init__(self):
        if not 0 < self.m <= 1:
            raise ValueError(f"macro-fraction size m={self.m} outside (0, 1]")
        if abs(self.m * round(1 / self.m) - 1) > 1e-9:
            raise ValueError(f"1/m must be an integer, got m={self.m}")
        if not 0 <= self.f <= 1:
            raise ValueError(f"observed fraction f={self.f} outside [0, 1]")
        if self.mu < 0:
            raise ValueError("micro-count mu must be non-negative")

    @property
    def n_macro(self) -> int:
        return round(1 / self.m)


@dataclass(frozen=True)
class InitialSystemState:
    """Sphere state on span{|x_1>, |x_2>}."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = DensityOperator((2,), self.matrix)
        object.__setattr__(self, "matrix", rho.matrix)

    @classmethod
    def pure(cls, p1: float = 0.5, phase: float = 0.0) -> InitialSystemState:
        if not 0 <= p1 <= 1:
            raise ValueError(f"p1={p1} outside [0, 1]")
        v = np.array([math.sqrt(p1), math.sqrt(1 - p1) * np.exp(1j * phase)])
        return cls(np.outer(v, v.conj()))

    @classmethod
    def from_populations(cls, p1: float, c12: complex = 0.0) -> InitialSystemState:
        return cls(np.array([[p1, c12], [np.conj(c12), 1 - p1]]))

    @property
    def populations(self) -> tuple[float, float]:
        return float(self.matrix[0, 0].real), float(self.matrix[1, 1].real)

    @property
    def c12(self) -> complex:
        return complex(self.matrix[0, 1])

    @property
    def h_s(self) -> float:
        return shannon_entropy(self.populations)


def _check_time(t: float) -> None:
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def photons_scattered(params: SphereParams, t: float) -> float:
    """N_t = L^2 (N/V) c t, kept real-valued."""
    _check_time(t)
    return params.box_edge**2 * params.density * params.c * t


def _series_coefficients(params: SphereParams) -> tuple[float, float]:
    """(first-order imaginary coefficient, second-order real deficit) of z."""
    a6 = params.effective_radius**6
    dx, k0, l2 = params.displacement, params.k0, params.box_edge**2
    first = 8 * math.pi * dx * k0**5 * a6 / (3 * l2) * math.cos(params.theta)
    second = 2 * math.pi * dx**2 * k0**6 * a6 / (15 * l2) * params.angular_factor
    return first, second


def single_photon_overlap(params: SphereParams) -> complex:
    """<k0|S_2^dag S_1|k0> to second order in the displacement."""
    first, second = _series_coefficients(params)
    return complex(1 - second, first)


def log_single_photon_overlap(params: SphereParams) -> complex:
    """ln z without forming z: the real part is ln|z| = log1p(-2b + b^2 + a^2) / 2."""
    first, second = _series_coefficients(params)
    real = 0.5 * math.log1p(-2 * second + second**2 + first**2)
    return complex(real, math.atan2(first, 1 - second))


def decoherence_time(params: SphereParams) -> float:
    """tau_D with 1/tau_D = (2 pi / 15) (N/V) dx^2 c k0^6 a~^6 (3 + 11 cos^2 theta)."""
    rate = (
        2 * math.pi / 15 * params.density * params.displacement**2 * params.c
        * params.k0**6 * params.effective_radius**6 * params.angular_factor
    )
    return 1 / rate


def _overlap_power(params: SphereParams, photons: float) -> complex:
    """z**photons in log space, modulus capped at 1."""
    lz = log_single_photon_overlap(params)
    if lz.real > 0:
        warnings.warn(
            "|z| > 1: the truncated overlap series is not valid at this box size; capping at 1",
            RegimeWarning,
            stacklevel=3,
        )
        lz = complex(0.0, lz.imag)
    return complex(np.exp(photons * lz))


def decoherence_factor(params: SphereParams, t: float, f: float, mode: str = "thermodynamic") -> float:
    """|Tr S_1 rho S_2^dag|^{(1-f) N_t}: damping of the system coherence from the
    untraced photons."""
    _check_time(t)
    _check_mode(mode)
    if not 0 <= f <= 1:
        raise ValueError(f"f={f} outside [0, 1]")
    if mode == "thermodynamic":
        return math.exp(-(1 - f) * t / decoherence_time(params))
    return abs(_overlap_power(params, (1 - f) * photons_scattered(params, t)))


def macro_overlap(params: SphereParams, t: float, m: float, mode: str = "thermodynamic") -> float:
    """|<Psi_2^mac|Psi_1^mac>| for one macro-fraction of m N_t photons."""
    _check_time(t)
    _check_mode(mode)
    if not 0 < m <= 1:
        raise ValueError(f"m={m} outside (0, 1]")
    if mode == "thermodynamic":
        return math.exp(-m * t / decoherence_time(params))
    return abs(_overlap_power(params, m * photons_scattered(params, t)))


@dataclass(frozen=True)
class Rank2JointState:
    """Closed-form rho_{S:fE}: initial coefficients, damping from the traced
    photons (kappa12) and overlap of the observed environment states (g).

    ``g`` is <Psi_2|Psi_1>, so the system coherence is c12 * kappa12 * g.
    """

    coefficients: np.ndarray = field(repr=False)
    kappa12: complex
    g: complex
    macro: complex = 1.0

    def __post_init__(self):
        if abs(self.kappa12) > 1 + 1e-12 or abs(self.g) > 1 + 1e-12:
            raise ValueError("overlaps must have modulus at most 1")

    @classmethod
    def from_overlap(
        cls,
        rho0: InitialSystemState,
        log_z: complex,
        n_observed: float,
        n_traced: float,
        n_per_macro: float | None = None,
    ) -> Rank2JointState:
        macro = np.exp(n_per_macro * log_z) if n_per_macro is not None else 1.0
        return cls(
            rho0.matrix,
            complex(np.exp(n_traced * log_z)),
            complex(np.exp(n_observed * log_z)),
            complex(macro),
        )

    @property
    def joint_matrix(self) -> np.ndarray:
        c = self.coefficients
        return np.array([[c[0, 0], c[0, 1] * self.kappa12], [c[1, 0] * np.conj(self.kappa12), c[1, 1]]])

    @property
    def system_matrix(self) -> np.ndarray:
        c = self.coefficients
        off = c[0, 1] * self.kappa12 * self.g
        return np.array([[c[0, 0], off], [np.conj(off), c[1, 1]]])

    @property
    def env_gram_matrix(self) -> np.ndarray:
        """Nonzero spectrum of sum_i c_ii |Psi_i><Psi_i| is that of this 2x2 matrix."""
        w1, w2 = self.coefficients[0, 0].real, self.coefficients[1, 1].real
        off = math.sqrt(w1 * w2) * np.conj(self.g)
        return np.array([[w1, off], [np.conj(off), w2]])

    @property
    def eps_system(self) -> float:
        """||rho_S - dephased rho_S||_tr."""
        return 2 * abs(self.coefficients[0, 1] * self.kappa12 * self.g)

    @property
    def eps_joint(self) -> float:
        """||rho_{S:fE} - dephased rho_{S:fE}||_tr."""
        return 2 * abs(self.coefficients[0, 1] * self.kappa12)


def _entropy2(m: np.ndarray) -> float:
    return spectrum_entropy(np.linalg.eigvalsh(m))


def exact_mutual_information(state: Rank2JointState) -> float:
    """I(S : fE) in bits from the three 2x2 spectra."""
    return _entropy2(state.system_matrix) + _entropy2(state.env_gram_matrix) - _entropy2(state.joint_matrix)


def _photon_split(part: FractionPartition, n_t: float) -> tuple[float, float]:
    if part.f >= 1:
        return n_t, 0.0
    observed = min(n_t, part.f * n_t + part.mu)
    return observed, n_t - observed


def exact_joint_state(
    params: SphereParams,
    rho0: InitialSystemState,
    part: FractionPartition,
    t: float,
    mode: str = "thermodynamic",
) -> Rank2JointState:
    _check_time(t)
    _check_mode(mode)
    if mode == "thermodynamic":
        tau = decoherence_time(params)
        # micro-count photons carry overlap z^mu -> 1
        return Rank2JointState(
            rho0.matrix,
            complex(math.exp(-(1 - part.f) * t / tau)),
            complex(math.exp(-part.f * t / tau)),
            complex(math.exp(-part.m * t / tau)),
        )
    n_t = photons_scattered(params, t)
    observed, traced = _photon_split(part, n_t)
    lz = log_single_photon_overlap(params)
    if lz.real > 0:
        warnings.warn("|z| > 1 at this box size; capping at 1", RegimeWarning, stacklevel=2)
        lz = complex(0.0, lz.imag)
    return Rank2JointState.from_overlap(rho0, lz, observed, traced, part.m * n_t)


def limit_bound(rho0: InitialSystemState, t_over_tau: float, f: float) -> float:
    """L -> infinity estimate of |H_S - I|:
    h(|c12| e^{-t}) + 2 h(2|c12| e^{-(1-f)t}) + 8 |c12| e^{-(1-f)t} + 2 sqrt(p1 p2) e^{-f t},
    with t in units of tau_D."""
    c = abs(rho0.c12)
    p1, p2 = rho0.populations
    decay = math.exp(-(1 - f) * t_over_tau)
    return (
        binary_entropy(c * math.exp(-t_over_tau))
        + 2 * binary_entropy(min(1.0, 2 * c * decay))
        + 8 * c * decay
        + 2 * math.sqrt(p1 * p2) * math.exp(-f * t_over_tau)
    )


@dataclass(frozen=True)
class SweepPoint:
    """One (t, f, L) evaluation: exact information and every bound term."""

    t: float
    t_over_tau: float
    f: float
    mu: float
    box_edge: float
    mode: str
    i_bits: float
    h_s: float
    eps_system: float
    eps_joint: float
    overlap_observed: float
    fannes_audenaert_term: float
    alicki_fannes_term: float
    holevo_term: float
    limit_rhs: float
    decoh_factor: float
    macro_overlap: float

    @property
    def gap(self) -> float:
        return abs(self.h_s - self.i_bits)

    @property
    def bound_rhs(self) -> float:
        return self.fannes_audenaert_term + self.alicki_fannes_term + self.holevo_term

    @property
    def slack(self) -> float:
        return self.bound_rhs - self.gap

    @property
    def applicable(self) -> bool:
        return bool(0 < self.f < 1 and self.eps_system <= 0.5 and self.eps_joint <= 0.5)

    def as_row(self) -> dict:
        return {
            "t_over_tau": self.t_over_tau,
            "f": self.f,
            "L": self.box_edge,
            "I_bits": self.i_bits,
            "H_S": self.h_s,
            "bound_rhs": self.bound_rhs,
            "decoh_factor": self.decoh_factor,
            "macro_overlap": self.macro_overlap,
            "applicable": self.applicable,
        }

    def as_record(self) -> dict:
        rec = self.as_row()
        rec.update(
            t=self.t,
            mu=self.mu,
            mode=self.mode,
            gap=self.gap,
            eps_E=self.eps_system,
            eps_fE=self.eps_joint,
            B_fM=self.overlap_observed,
            fannes_audenaert_term=self.fannes_audenaert_term,
            alicki_fannes_term=self.alicki_fannes_term,
            holevo_term=self.holevo_term,
            limit_rhs=self.limit_rhs,
            slack=self.slack,
        )
        return rec


def evaluate_point(
    params: SphereParams,
    rho0: InitialSystemState,
    part: FractionPartition,
    t: float,
    mode: str = "thermodynamic",
) -> SweepPoint:
    state = exact_joint_state(params, rho0, part, t, mode)
    p1, p2 = rho0.populations
    tau = decoherence_time(params)
    eps_e, eps_fe = state.eps_system, state.eps_joint
    overlap = abs(state.g)
    return SweepPoint(
        t=t,
        t_over_tau=t / tau,
        f=part.f,
        mu=part.mu,
        box_edge=math.inf if mode == "thermodynamic" else params.box_edge,
        mode=mode,
        i_bits=exact_mutual_information(state),
        h_s=rho0.h_s,
        eps_system=eps_e,
        eps_joint=eps_fe,
        overlap_observed=overlap,
        fannes_audenaert_term=fannes_audenaert_rhs(min(eps_e, 1.0), 2),
        alicki_fannes_term=alicki_fannes_rhs(min(eps_fe, 1.0), 2),
        holevo_term=2 * math.sqrt(p1 * p2) * overlap,
        limit_rhs=limit_bound(rho0, t / tau, part.f),
        decoh_factor=abs(state.kappa12),
        macro_overlap=abs(state.macro),
    )


def default_fractions(m: float) -> list[float]:
    n = round(1 / m)
    return [k / n for k in range(1, n)]


def phase_diagram(
    params: SphereParams,
    rho0: InitialSystemState,
    t: float,
    fractions: Sequence[float] | None = None,
    m: float = 0.1,
    mu: float = 1.0,
    mode: str = "thermodynamic",
) -> list[SweepPoint]:
    """I(S : fE) against f at fixed t, framed by the micro-only point
    (f = 0 plus ``mu`` photons) and the full-environment point f = 1."""
    fractions = default_fractions(m) if fractions is None else list(fractions)
    rows = [evaluate_point(params, rho0, FractionPartition(m, 0.0, mu), t, mode)]
    rows += [evaluate_point(params, rho0, FractionPartition(m, f), t, mode) for f in sorted(fractions) if 0 < f < 1]
    rows.append(evaluate_point(params, rho0, FractionPartition(m, 1.0), t, mode))
    return rows


def information_curve(
    params: SphereParams,
    rho0: InitialSystemState,
    part: FractionPartition,
    times: Iterable[float],
    mode: str = "thermodynamic",
) -> list[SweepPoint]:
    return [evaluate_point(params, rho0, part, t, mode) for t in sorted(times)]


@dataclass(frozen=True)
class RedundancyResult:
    t: float
    delta: float
    f_star: float | None

    @property
    def reached(self) -> bool:
        return self.f_star is not None

    @property
    def value(self) -> float | None:
        """R_delta = 1 / f*, or None when no grid fraction reaches (1 - delta) H_S."""
        return None if self.f_star is None else 1 / self.f_star


def redundancy(
    params: SphereParams,
    rho0: InitialSystemState,
    t: float,
    delta: float,
    fractions: Sequence[float] | None = None,
    m: float = 0.1,
    mode: str = "thermodynamic",
) -> RedundancyResult:
    """Smallest grid fraction f* with I(S : f*E) >= (1 - delta) H_S; default grid is k m."""
    if not 0 < delta < 1:
        raise ValueError(f"delta={delta} outside (0, 1)")
    grid = sorted(f for f in (default_fractions(m) + [1.0] if fractions is None else fractions) if 0 < f <= 1)
    target = (1 - delta) * rho0.h_s
    for f in grid:
        if exact_mutual_information(exact_joint_state(params, rho0, FractionPartition(m, f), t, mode)) >= target:
            return RedundancyResult(t, delta, f)
    return RedundancyResult(t, delta, None)


@dataclass
class BoundReport:
    points: list[SweepPoint]

    @property
    def applicable_points(self) -> list[SweepPoint]:
        return [p for p in self.points if p.applicable]

    @property
    def min_slack(self) -> float:
        return min((p.slack for p in self.applicable_points), default=math.inf)

    def holds(self, slack_tol: float = 1e-10) -> bool:
        return bool(self.min_slack >= -slack_tol)


def bound_suite(
    params: SphereParams,
    rho0: InitialSystemState,
    times: Iterable[float],
    fractions: Iterable[float],
    box_edges: Iterable[float | None] = (None,),
    m: float = 0.1,
) -> BoundReport:
    """Evaluate |H_S - I| against its decoherence/distinguishability bound on a grid.

    ``None`` (or ``inf``) in ``box_edges`` selects the thermodynamic limit.
    Points where either trace-norm distance exceeds 1/2 are flagged as not
    applicable rather than failed.
    """
    points = []
    for edge, t, f in itertools.product(list(box_edges), sorted(times), sorted(fractions)):
        if edge is None or math.isinf(edge):
            points.append(evaluate_point(params, rho0, FractionPartition(m, f), t, "thermodynamic"))
        else:
            points.append(evaluate_point(params.with_box_edge(edge), rho0, FractionPartition(m, f), t, "finite"))
    points.sort(key=lambda p: (p.t_over_tau, p.f, p.box_edge))
    return BoundReport(points)


@dataclass
class Lemma1Record:
    n_env: int
    env_dim: int
    n_observed: int
    p: tuple[float, float]
    info: float
    lhs: float
    eps_system: float
    eps_joint: float
    overlap: float
    rhs: float
    seed: int | None = None

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def applicable(self) -> bool:
        return bool(self.eps_system <= 0.5 and self.eps_joint <= 0.5)

    def holds(self, slack_tol: float = 1e-10) -> bool:
        return bool(self.slack >= -slack_tol)


MAX_DENSE_DIM = 2048


def lemma1_check(
    rho_s: DensityOperator,
    rho_e: DensityOperator,
    unitaries: tuple[np.ndarray, np.ndarray],
    n_env: int,
    f: float,
) -> Lemma1Record:
    """Brute-force check of the qubit/controlled-unitary bound on a dense state.

    Builds U = sum_i |i><i| (x) U_i^{(x)N}, evolves rho_s (x) rho_e^{(x)N},
    keeps the first round(f N) environments and compares |H(p) - I| with
    h(eps_E/2) + 2h(eps_fE) + 4 eps_fE + 2 sqrt(p1 p2) B(U_1 rho_e U_1^dag, U_2 rho_e U_2^dag)^{fN}.
    """
    if rho_s.dims != (2,):
        raise ValueError("system must be a qubit")
    d = rho_e.size
    total = 2 * d**n_env
    if total > MAX_DENSE_DIM:
        raise ValueError(f"dense dimension {total} exceeds {MAX_DENSE_DIM}")
    n_obs = int(round(f * n_env))
    if not 0 < n_obs < n_env:
        raise ValueError(f"f={f} with N={n_env} leaves no observed or no traced environment")

    u1, u2 = (np.asarray(u, dtype=complex) for u in unitaries)
    big = [u1, u2]
    for k in range(2):
        for _ in range(n_env - 1):
            big[k] = np.kron(big[k], unitaries[k])
    env0 = rho_e.matrix
    for _ in range(n_env - 1):
        env0 = np.kron(env0, rho_e.matrix)
    dim_e = env0.shape[0]
    u = np.zeros((total, total), dtype=complex)
    u[:dim_e, :dim_e] = big[0]
    u[dim_e:, dim_e:] = big[1]
    rho0 = np.kron(rho_s.matrix, env0)
    evolved = DensityOperator((2,) + (d,) * n_env, u @ rho0 @ u.conj().T, tol=1e-8)

    joint = qstate.partial_trace(evolved, range(n_obs + 1))
    sys = qstate.partial_trace(evolved, [0])
    d_obs = d**n_obs
    dephased = joint.matrix.copy()
    dephased[:d_obs, d_obs:] = 0
    dephased[d_obs:, :d_obs] = 0
    eps_joint = qstate.trace_norm(joint.matrix - dephased)
    eps_system = qstate.trace_norm(sys.matrix - np.diag(np.diag(sys.matrix)))

    p1, p2 = float(rho_s.matrix[0, 0].real), float(rho_s.matrix[1, 1].real)
    info = mutual_information(joint, [0])
    lhs = abs(shannon_entropy([p1, p2]) - info)
    overlap = qstate.generalized_overlap(u1 @ rho_e.matrix @ u1.conj().T, u2 @ rho_e.matrix @ u2.conj().T)
    rhs = (
        fannes_audenaert_rhs(min(eps_system, 1.0), 2)
        + alicki_fannes_rhs(min(eps_joint, 1.0), 2)
        + 2 * math.sqrt(p1 * p2) * overlap**n_obs
    )
    return Lemma1Record(n_env, d, n_obs, (p1, p2), info, lhs, eps_system, eps_joint, overlap, rhs)


def random_lemma1_instance(seed: int, n_env: int, env_dim: int, f: float) -> Lemma1Record:
    """Haar unitaries, random (pure or mixed) system and environment states."""
    rng = np.random.default_rng(seed)
    rank_s = 1 if rng.random() < 0.5 else None
    rank_e = 1 if rng.random() < 0.5 else None
    rho_s = qstate.random_density((2,), rng, rank=rank_s)
    rho_e = qstate.random_density((env_dim,), rng, rank=rank_e)
    unitaries = (qstate.random_unitary(env_dim, rng), qstate.random_unitary(env_dim, rng))
    record = lemma1_check(rho_s, rho_e, unitaries, n_env, f)
    record.seed = seed
    return record


def lemma1_batch(
    seed: int,
    n_instances: int,
    env_counts: Sequence[int] = (2, 3, 4),
    fractions: Sequence[float] = (0.25, 0.5, 0.75),
    env_dim: int = 2,
) -> list[Lemma1Record]:
    """Seeded batch; instance k uses child seed ``seed * 100003 + k``."""
    out = []
    for k in range(n_instances):
        n_env = env_counts[k % len(env_counts)]
        f = fractions[(k // len(env_counts)) % len(fractions)]
        # snap f to a whole number of observed environments in [1, N-1]
        n_obs = min(max(round(f * n_env), 1), n_env - 1)
        out.append(random_lemma1_instance(seed * 100003 + k, n_env, env_dim, n_obs / n_env))
    return out
