"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``;
the lines are also repeated in the pytest terminal summary.
"""
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.signal import find_peaks

from rabi_emission.cli import main as cli_main
from rabi_emission.dressed import FieldOperatorSpec, diagonalize, field_operator_plus, transition_table
from rabi_emission.hilbert import HilbertSpace, number
from rabi_emission.master import (BathSpec, RateTable, decay_rates, liouvillian_dressed_rwa, liouvillian_gme,
                                  liouvillian_standard)
from rabi_emission.models import ModelParams, hamiltonian, hamiltonian_dipole
from rabi_emission.pipeline import converged_eigensystem, find_level_crossing, gauge_audit, solve_point
from rabi_emission.spectra import emission_spectrum, reference_rate_eta0, steady_state, two_level_ratio

KAPPA, GAMMA = 1e-3, 1e-4
RESULTS = {}


def report(n, ok, detail, seconds):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {detail} ({seconds:.1f}s)"
    RESULTS[n] = line
    print(line)
    return ok


def timed(fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    return ok, detail, time.perf_counter() - t0


# 1 -------------------------------------------------------------------------

def check_gauge_invariance():
    bath = BathSpec(KAPPA, GAMMA, 0.0, 0.05)
    worst_level = worst_elem = 0.0
    for eta in (0.1, 0.5, 1.0, 2.0):
        a = gauge_audit(ModelParams(1, 1, eta), bath, M=20)
        worst_level = max(worst_level, a.level_residual)
        worst_elem = max(worst_elem, a.element_residual)
    ok = worst_level < 1e-8 and worst_elem < 1e-6
    return ok, f"gauge invariance: level residual {worst_level:.1e} < 1e-8, element residual {worst_elem:.1e} < 1e-6"


# 2 -------------------------------------------------------------------------

def check_correct_vs_wrong_operator():
    bath = BathSpec(KAPPA, GAMMA, 0.0, 0.05)
    rate_res = gauge_audit(ModelParams(1, 1, 0.5), bath, M=20).rate_residual
    pt = solve_point(ModelParams(1, 1, 2.0), bath, "gme", "dipole")
    excess = pt.rate("cavity_wrong") / pt.rate("cavity")
    ok = rate_res < 1e-6 and excess > 100
    return ok, f"W_c vs W'_c at eta=0.5 rel. diff {rate_res:.1e} < 1e-6; wrong/correct at eta=2 = {excess:.1e} > 100"


# 3 -------------------------------------------------------------------------

def check_no_ground_state_emission():
    bath = BathSpec(KAPPA, GAMMA, 0.0, 0.0)
    params = ModelParams(1, 1, 1.0)
    pt = solve_point(params, bath, "gme")
    i0 = pt.eig.index_of("0")
    fidelity = pt.rho[i0, i0].real
    w_c, w_q = pt.rate("cavity"), pt.rate("qubit")
    # standard master equation: same Rabi Hamiltonian, dissipators built from bare a and sigma_-
    space = HilbertSpace(30)
    L = liouvillian_standard(hamiltonian_dipole(space, params), bath, space)
    rho = steady_state(L, check_unique=False)
    w_std = float(np.trace(number(space) @ rho).real)
    ok = fidelity > 1 - 1e-6 and abs(w_c) < 1e-10 * KAPPA and abs(w_q) < 1e-10 * KAPPA and w_std > 1e-4 * KAPPA
    return ok, (f"GME ground fidelity 1-{1 - fidelity:.1e}, W_c={w_c:.1e}, W_q={w_q:.1e} (< {1e-10 * KAPPA:.0e}); "
                f"standard ME W_c={w_std:.2e} > {1e-4 * KAPPA:.0e}")


# 4 -------------------------------------------------------------------------

PLATEAU_WINDOW = (2e-3, 3e-2)


def check_plateau_and_ratio():
    bath = BathSpec(KAPPA, GAMMA, 0.0, 0.05)
    w0 = reference_rate_eta0(bath, ModelParams())
    etas = np.logspace(-4, np.log10(2.0), 40)
    plateau, ratio_err = [], []
    for eta in etas:
        pt = solve_point(ModelParams(1, 1, eta), bath)
        wc, wq = pt.rate("cavity") / w0, pt.rate("qubit") / w0
        if PLATEAU_WINDOW[0] <= eta <= PLATEAU_WINDOW[1]:
            plateau.append(wc)
        if eta > 5e-3:
            ratio_err.append(abs((wc / wq) / two_level_ratio(pt.eig, pt.table) - 1))
    plateau = np.array(plateau)
    plateau_ok = bool(np.all(np.abs(plateau - 0.5) <= 0.2 * 0.5))
    ratio_ok = max(ratio_err) < 0.05
    return plateau_ok and ratio_ok, (
        f"plateau W_c in [{plateau.min():.3f}, {plateau.max():.3f}] vs 0.5+-20% "
        f"({'ok' if plateau_ok else 'MISS'}); max |ratio/two-level - 1| for eta>5e-3 = {max(ratio_err):.1e} < 0.05")


# 5 -------------------------------------------------------------------------

def check_deep_strong_decoupling():
    params = ModelParams(1, 1, 3.0)
    space, eig = converged_eigensystem(params, 20)
    t = transition_table(eig, space, params)
    i0, i1 = eig.index_of("0"), eig.index_of("1-")
    s2, x2 = abs(t.s[i1, i0]) ** 2, abs(t.x[i1, i0]) ** 2
    g_ratio = decay_rates(t, BathSpec(KAPPA, GAMMA, 0.0, 0.05), params).Gamma_q[i1, i0] / GAMMA
    ok = s2 > 0.95 and x2 < 0.05 and g_ratio < 0.05
    return ok, f"eta=3: |s|^2={s2:.4f} > 0.95, |x|^2={x2:.1e} < 0.05, Gamma_q/gamma={g_ratio:.1e} < 0.05"


# 6 -------------------------------------------------------------------------

def check_level_crossing():
    try:
        eta = find_level_crossing("2-", "1-", 0.2, 0.8)
        ok = abs(eta - 0.43) <= 0.02
        detail = f"crossing of levels 2- and 1- at eta={eta:.4f} (target 0.43+-0.02)"
    except ValueError as exc:
        ok = False
        other = find_level_crossing("2-", "1+", 0.2, 0.8)
        detail = f"{exc}; the crossing near the target is 2-/1+ at eta={other:.6f}"
    return ok, detail


# 7 -------------------------------------------------------------------------

def _two_peaks(S):
    idx, _ = find_peaks(S.values, prominence=1e-6 * S.values.max())
    return idx


def check_weak_coupling_doublet():
    bath = BathSpec(KAPPA, GAMMA, 0.0, 0.05)
    params = ModelParams(1, 1, 0.01)
    step = 2e-4
    grid = np.arange(0.97, 1.03 + step / 2, step)
    S = solve_point(params, bath, "gme").spectrum("cavity", grid)
    pk = _two_peaks(S)
    two = len(pk) == 2
    sym = two and abs(0.5 * (grid[pk[0]] + grid[pk[1]]) - 1.0) <= step
    asym = two and S.values[pk[0]] > S.values[pk[1]]
    Sj = solve_point(params, bath, "standard_jc").spectrum("cavity", grid)
    pj = _two_peaks(Sj)
    hj = Sj.values[pj]
    equal = len(pj) == 2 and abs(hj[0] - hj[1]) / hj.max() <= 0.02
    ok = two and sym and asym and equal
    peaks = ", ".join(f"{grid[i]:.4f}" for i in pk)
    return ok, (f"GME peaks at [{peaks}], lower/upper height {S.values[pk[0]] / S.values[pk[-1]]:.3f}; "
                f"standard-ME height mismatch {abs(hj[0] - hj[-1]) / hj.max():.1e} <= 0.02")


# 8 -------------------------------------------------------------------------

def check_flat_qubit_background():
    bath = BathSpec(KAPPA, GAMMA, 0.0, 0.2)
    grid = np.logspace(-2, -1, 200)
    S = solve_point(ModelParams(1, 1, 2.0), bath).spectrum("qubit", grid)
    shape = grid**2 * GAMMA**2 / (grid**2 + GAMMA**2)
    r = S.values / shape
    spread = r.max() / r.min() - 1
    return spread <= 0.25, f"eta=2 qubit background / Lorentzian tail over omega in [0.01, 0.1]: spread {spread:.3f} <= 0.25"


# 9 -------------------------------------------------------------------------

def _gme_without_cross_terms(eig, rates):
    """Sum of single-transition GME generators: every cross term removed by construction."""
    M = eig.M
    total = liouvillian_gme(eig, _only(rates, None)).dense()
    for k in range(M):
        for j in range(k):
            for bath in ("c", "q"):
                total += liouvillian_gme(eig, _only(rates, (bath, j, k))).dense()
                total -= liouvillian_gme(eig, _only(rates, None)).dense()
    return total


def _only(rates, keep):
    amp_c = np.zeros_like(rates.amp_c)
    amp_q = np.zeros_like(rates.amp_q)
    if keep is not None:
        bath, j, k = keep
        src, dst = (rates.amp_c, amp_c) if bath == "c" else (rates.amp_q, amp_q)
        dst[j, k] = src[j, k]
    return RateTable(**{**rates.__dict__, "amp_c": amp_c, "amp_q": amp_q})


def check_oracle_equivalences():
    # eta = 0: GME equals the standard master equation
    bath = BathSpec(KAPPA, GAMMA, 0.3, 0.5)
    s = HilbertSpace(5)
    p0 = ModelParams(1, 1, 0.0)
    eig = diagonalize(hamiltonian(s, p0), s.dim, s)
    Lg = liouvillian_gme(eig, decay_rates(transition_table(eig, s, p0), bath, p0)).dense()
    V = eig.states
    U = np.kron(V.T, V.conj().T)
    Ls = liouvillian_standard(hamiltonian(s, p0), bath, s, sparse=False).dense()
    d_std = np.max(np.abs(Lg - U @ Ls @ U.conj().T))

    # dressed RWA equals the GME with all cross terms removed
    p = ModelParams(1, 1, 0.4)
    s = HilbertSpace(30)
    eig = diagonalize(hamiltonian(s, p), 6, s)
    rates = decay_rates(transition_table(eig, s, p), bath, p)
    L_rwa = liouvillian_dressed_rwa(eig, rates).dense()
    L_diag = _gme_without_cross_terms(eig, rates)
    pattern = np.array_equal(np.abs(L_rwa) > 1e-300, np.abs(L_diag) > 1e-18)
    d_rwa = np.max(np.abs(L_rwa - L_diag)) / np.max(np.abs(L_rwa))

    # eta = 0 qubit line: analytic Lorentzian centre and half-width
    tq = 0.5
    b2 = BathSpec(KAPPA, GAMMA, 0.0, tq)
    s = HilbertSpace(1)
    eig = diagonalize(hamiltonian(s, p0), 4, s)
    t = transition_table(eig, s, p0)
    L = liouvillian_gme(eig, decay_rates(t, b2, p0))
    rho = steady_state(L)
    op = field_operator_plus(t, FieldOperatorSpec("qubit", "flat"))
    n_q = 1 / np.expm1(1 / tq)
    hw = GAMMA * (2 * n_q + 1) / 2
    grid = 1.0 + hw * np.linspace(-5, 5, 2001)
    Sv = emission_spectrum(L, rho, op.conj().T, op, 1.0, grid, prefactor=False).values
    centre = grid[np.argmax(Sv)]
    half = grid[Sv >= 0.5 * Sv.max()]
    width = 0.5 * (half[-1] - half[0])
    ok = d_std < 1e-10 and pattern and d_rwa < 1e-12 and centre == 1.0 and abs(width / hw - 1) < 0.01
    return ok, (f"eta=0 GME-standard {d_std:.1e} < 1e-10; RWA vs cross-free GME {d_rwa:.1e} "
                f"(pattern {'same' if pattern else 'DIFFERS'}); line centre {centre:.6f}, width error {abs(width / hw - 1):.1e}")


# 10 ------------------------------------------------------------------------

def check_determinism():
    with tempfile.TemporaryDirectory() as tmp:
        bodies = []
        for run in ("a", "b"):
            out = Path(tmp) / run
            code = cli_main(["rates", "--config", "paper_defaults", "--out", str(out), "--workers", "1", "--seedless"])
            if code != 0:
                return False, f"cmd_rates exited with {code}"
            bodies.append((out / "rates.csv").read_bytes())
    same = bodies[0] == bodies[1]
    return same, f"two paper_defaults rates runs byte-identical: {same} ({len(bodies[0])} bytes)"


CHECKS = {
    1: (check_gauge_invariance, 60),
    2: (check_correct_vs_wrong_operator, 60),
    3: (check_no_ground_state_emission, 60),
    4: (check_plateau_and_ratio, 300),
    5: (check_deep_strong_decoupling, 60),
    6: (check_level_crossing, 60),
    7: (check_weak_coupling_doublet, 120),
    8: (check_flat_qubit_background, 120),
    9: (check_oracle_equivalences, 30),
    10: (check_determinism, 300),
}


@pytest.mark.parametrize("n", sorted(CHECKS))
def test_criterion(n):
    fn, budget = CHECKS[n]
    ok, detail, seconds = timed(fn)
    report(n, ok and seconds < budget, f"{detail}; runtime budget {budget}s", seconds)
    assert ok, detail
    assert seconds < budget, f"runtime {seconds:.1f}s exceeds {budget}s"


if __name__ == "__main__":
    failures = 0
    for n in sorted(CHECKS):
        fn, budget = CHECKS[n]
        ok, detail, seconds = timed(fn)
        failures += not report(n, ok and seconds < budget, f"{detail}; runtime budget {budget}s", seconds)
    sys.exit(1 if failures else 0)
