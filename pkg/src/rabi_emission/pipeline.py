"""Per-point pipeline: truncation control, generator assembly, rates, spectra, gauge audits."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq

from .dressed import (EigenSystem, FieldOperatorSpec, TransitionTable, align_phases, diagonalize,
                      field_operator_plus, transition_table, wrong_field_operator_plus)
from .errors import ConvergenceError, UnknownChannelError
from .hilbert import HilbertSpace, annihilation, number, pauli
from .master import (BathSpec, Superoperator, decay_rates, liouvillian_dressed_rwa, liouvillian_gme,
                     liouvillian_standard)
from .models import COULOMB, DIPOLE, ModelParams, gauge_rotation, hamiltonian, hamiltonian_jc
from .spectra import SpectrumResult, emission_rate, emission_spectrum, steady_state

log = logging.getLogger(__name__)

MODELS = ("gme", "dressed_rwa", "standard_jc")
N_MAX_START = 20
N_MAX_CAP = 320
LEVEL_RTOL = 1e-10
OBSERVABLE_RTOL = 1e-6
JC_WARN_ETA = 0.3

Truncation = Union[int, str]


def default_levels(T_q: float) -> int:
    return 40 if T_q >= 0.5 else 20


def relative_level_shift(e1: np.ndarray, e2: np.ndarray, scale: float) -> float:
    """Largest ``|e1 - e2| / max(|e|, scale)`` over two aligned level lists."""
    denom = np.maximum(np.maximum(np.abs(e1), np.abs(e2)), scale)
    return float(np.max(np.abs(e1 - e2) / denom))


def converged_eigensystem(params: ModelParams, M: int, gauge: str = COULOMB, n_max: Truncation = "auto",
                          n_start: int = N_MAX_START, n_cap: int = N_MAX_CAP,
                          rtol: float = LEVEL_RTOL) -> tuple[HilbertSpace, EigenSystem]:
    """Diagonalize, doubling ``n_max`` until the lowest ``M`` levels move less than ``rtol``."""
    if n_max != "auto":
        space = HilbertSpace(int(n_max))
        return space, diagonalize(hamiltonian(space, params, gauge), M, space, gauge=gauge)
    n = max(n_start, M)
    space = HilbertSpace(n)
    eig = diagonalize(hamiltonian(space, params, gauge), M, space, gauge=gauge)
    while True:
        n2 = 2 * n
        if n2 > n_cap:
            raise ConvergenceError(f"levels not converged below n_max={n_cap} at eta={params.eta}")
        space2 = HilbertSpace(n2)
        eig2 = diagonalize(hamiltonian(space2, params, gauge), M, space2, gauge=gauge)
        if relative_level_shift(eig.energies, eig2.energies, params.omega_q) < rtol:
            return space2, eig2
        n, space, eig = n2, space2, eig2


@dataclass
class SolvedPoint:
    """Everything computed at one parameter point.

    For the dressed-basis models ``eig`` and ``table`` are set and ``rho`` lives
    on the lowest ``M`` levels; for ``standard_jc`` the generator and state are
    in the bare product basis.
    """

    params: ModelParams
    bath: BathSpec
    model: str
    gauge: str
    space: HilbertSpace
    L: Superoperator
    rho: np.ndarray
    eig: Optional[EigenSystem] = None
    table: Optional[TransitionTable] = None
    warnings: list = field(default_factory=list)

    @property
    def M(self) -> int:
        return self.eig.M if self.eig is not None else self.space.dim

    def operator(self, channel: str, weighting: str = "linear") -> np.ndarray:
        """Positive-frequency detection operator for ``channel`` on this point's basis."""
        if self.model == "standard_jc":
            if channel in ("cavity", "cavity_wrong"):
                return np.array(annihilation(self.space))
            if channel == "qubit":
                return np.array(pauli(self.space, "lowering"))
            raise UnknownChannelError(channel)
        if channel == "cavity_wrong" and self.gauge == DIPOLE:
            return wrong_field_operator_plus(self.space, self.eig)
        if channel == "cavity_wrong":
            channel = "cavity"
        return field_operator_plus(self.table, FieldOperatorSpec(channel, weighting))

    def rate(self, channel: str) -> float:
        return emission_rate(self.rho, self.operator(channel))

    def spectrum(self, channel: str, grid: Sequence[float], form: str = "replaced",
                 method: str = "schur") -> SpectrumResult:
        """Emission spectrum; ``form="replaced"`` uses flat operators with the
        ``(w/omega_ref)^2`` factor, ``"weighted"`` uses frequency-weighted operators.

        The standard model always uses the bare operators without extra factors.
        """
        ref = self.params.omega_q if channel == "qubit" else self.params.omega_c
        if self.model == "standard_jc":
            op, pref = self.operator(channel), False
        elif form == "replaced":
            op, pref = self.operator(channel, "flat"), True
        elif form == "weighted":
            op, pref = self.operator(channel, "linear"), False
        else:
            raise ValueError(f"unknown spectrum form {form!r}")
        ch = "qubit" if channel == "qubit" else "cavity"
        return emission_spectrum(self.L, self.rho, op.conj().T, op, ref, grid,
                                 prefactor=pref, channel=ch, method=method)


def _solve_standard(params, bath, n_max, coupling_prefactor, check_unique):
    def build(n):
        space = HilbertSpace(n)
        L = liouvillian_standard(hamiltonian_jc(space, params, coupling_prefactor), bath, space,
                                 sparse=space.dim > 40)
        return space, L, steady_state(L, check_unique=check_unique)

    if n_max != "auto":
        return build(int(n_max))
    n = 4
    space, _, rho = build(n)
    obs = np.trace(number(space) @ rho).real
    while True:
        n2 = 2 * n
        if n2 > N_MAX_CAP:
            raise ConvergenceError(f"standard model not converged below n_max={N_MAX_CAP}")
        space2, L2, rho2 = build(n2)
        obs2 = np.trace(number(space2) @ rho2).real
        if abs(obs2 - obs) <= OBSERVABLE_RTOL * max(abs(obs2), 1e-300):
            return space2, L2, rho2
        n, space, rho, obs = n2, space2, rho2, obs2


def solve_point(params: ModelParams, bath: BathSpec, model: str = "gme", gauge: str = COULOMB,
                n_max: Truncation = "auto", M: Truncation = "auto",
                coupling_prefactor: float = 0.5, check_unique: Optional[bool] = None) -> SolvedPoint:
    """Build the generator for ``model`` at one point and solve for its steady state."""
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
    warnings = []
    if model == "standard_jc":
        if params.eta > JC_WARN_ETA:
            msg = f"standard_jc used at eta={params.eta} > {JC_WARN_ETA}; the model is unreliable there"
            log.warning(msg)
            warnings.append(msg)
        space, L, rho = _solve_standard(params, bath, n_max, coupling_prefactor, check_unique)
        return SolvedPoint(params, bath, model, gauge, space, L, rho, warnings=warnings)

    levels = default_levels(bath.T_q) if M == "auto" else int(M)
    space, eig = converged_eigensystem(params, levels, gauge, n_max)
    table = transition_table(eig, space, params)
    rates = decay_rates(table, bath, params)
    build = liouvillian_gme if model == "gme" else liouvillian_dressed_rwa
    L = build(eig, rates)
    rho = steady_state(L, check_unique=check_unique)
    return SolvedPoint(params, bath, model, gauge, space, L, rho, eig, table, warnings)


@dataclass(frozen=True)
class GaugeAudit:
    """Coulomb-vs-dipole residuals at one coupling."""

    eta: float
    n_max: int
    level_residual: float
    element_residual: float
    rate_residual: float
    wrong_operator_deviation: float

    def passed(self, level_tol: float = 1e-8, element_tol: float = 1e-6, rate_tol: float = 1e-6) -> bool:
        return (self.level_residual < level_tol and self.element_residual < element_tol
                and self.rate_residual < rate_tol)


def gauge_audit(params: ModelParams, bath: BathSpec, M: int = 20, n_max: Truncation = "auto") -> GaugeAudit:
    """Compare levels, matrix elements and cavity rates between the two gauges.

    Matrix elements compared are ``<j|(A + A^dag)|k>`` and ``<j|(A - A^dag)|k>``
    with the gauge-appropriate photon operator ``A``, after rephasing the
    dipole-gauge eigenvectors onto the rotated Coulomb-gauge ones.
    """
    space, eig_c = converged_eigensystem(params, M, COULOMB, n_max)
    eig_d = diagonalize(hamiltonian(space, params, DIPOLE), M, space, gauge=DIPOLE)
    eig_d = align_phases(eig_c, eig_d, gauge_rotation(space, params))
    tab_c = transition_table(eig_c, space, params)
    tab_d = transition_table(eig_d, space, params)

    level_res = relative_level_shift(eig_c.energies, eig_d.energies, params.omega_q)
    scale = max(1.0, np.max(np.abs(tab_c.x)))
    elem_res = max(np.max(np.abs(tab_c.x - tab_d.x)), np.max(np.abs(tab_c.v - tab_d.v))) / scale

    rho_c = steady_state(liouvillian_gme(eig_c, decay_rates(tab_c, bath, params)))
    rho_d = steady_state(liouvillian_gme(eig_d, decay_rates(tab_d, bath, params)))
    spec = FieldOperatorSpec("cavity")
    w_c = emission_rate(rho_c, field_operator_plus(tab_c, spec))
    w_d = emission_rate(rho_d, field_operator_plus(tab_d, spec))
    w_wrong = emission_rate(rho_d, wrong_field_operator_plus(space, eig_d))
    # a vanishing cavity rate is compared on the scale of the qubit rate
    w_q = emission_rate(rho_c, field_operator_plus(tab_c, FieldOperatorSpec("qubit")))
    denom = max(abs(w_c), abs(w_q), np.finfo(float).tiny)
    return GaugeAudit(
        eta=params.eta, n_max=space.n_max, level_residual=level_res,
        element_residual=float(elem_res), rate_residual=abs(w_c - w_d) / denom,
        wrong_operator_deviation=abs(w_wrong - w_c) / denom,
    )


def level_gap(params: ModelParams, upper: str, lower: str, M: int = 10, n_max: int = 60) -> float:
    """``E(upper) - E(lower)`` for two labeled dressed levels."""
    space = HilbertSpace(n_max)
    eig = diagonalize(hamiltonian(space, params), M, space)
    return float(eig.energies[eig.index_of(upper)] - eig.energies[eig.index_of(lower)])


def find_level_crossing(upper: str, lower: str, eta_lo: float, eta_hi: float, delta: float = 0.0,
                        omega_q: float = 1.0, M: int = 10, n_max: int = 60, xtol: float = 1e-10) -> float:
    """Coupling at which two labeled levels cross, by bracketing root search on their gap.

    Raises
    ------
    ValueError
        If the gap has the same sign at both ends of the bracket.
    """
    def gap(eta):
        return level_gap(ModelParams.from_detuning(eta, delta, omega_q), upper, lower, M, n_max)

    g_lo, g_hi = gap(eta_lo), gap(eta_hi)
    if np.sign(g_lo) == np.sign(g_hi):
        raise ValueError(f"levels {upper} and {lower} do not cross in [{eta_lo}, {eta_hi}] "
                         f"(gaps {g_lo:.4g}, {g_hi:.4g})")
    return float(brentq(gap, eta_lo, eta_hi, xtol=xtol))
