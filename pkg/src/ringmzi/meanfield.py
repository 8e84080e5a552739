"""Mean-field validation of the linearized pair-generation model.

Tracks the minimal moment set {<a_p>, <a_p a_p>, <a_p^+ a_p>, <a_s^+ a_s>,
<a_i^+ a_i>, <a_s a_i>} of the driven three-mode cavity in the co-rotating
frame. Mixed pump-pair moments are factorized (e.g. <a_p^+ a_p a_s a_i> ->
<a_p^+ a_p><a_s a_i>), which keeps the pump dynamical and exhibits pump
depletion at threshold, while the signal/idler sector stays linear:

    d<a_p>/dt   = sqrt(k) a_l - (G/2)<a_p> - 2 g <a_p>* <a_s a_i>
    d<a_p^2>/dt = 2 sqrt(k) a_l <a_p> - G <a_p^2> - g (4<n_p>+2) <a_s a_i>
    d<n_p>/dt   = 2 sqrt(k) Re(a_l* <a_p>) - G <n_p> - 4 g Re(<a_p^2><a_s a_i>*)
    d<n_s>/dt   = 2 g Re(<a_p^2><a_s a_i>*) - G <n_s>        (same for n_i)
    d<a_s a_i>/dt = g <a_p^2> (<n_s>+<n_i>+1) - G <a_s a_i>

The linearized counterpart replaces 2 g <a_p^2> by the externally fixed
injection sigma and drops the pump equations; its steady state
n_s = sigma^2/(2(Gamma^2 - sigma^2)) exists only below threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConvergenceError, DivergenceError, DomainError, ThresholdError
from .params import CavityRates

DIVERGENCE_LIMIT = 1e30


@dataclass(frozen=True)
class MomentState:
    """Tracked intracavity moments (co-rotating frame)."""

    a_p: complex = 0.0
    a_pp: complex = 0.0
    n_p: float = 0.0
    n_s: float = 0.0
    n_i: float = 0.0
    m_si: complex = 0.0


VACUUM = MomentState()


@dataclass(frozen=True)
class SolverConfig:
    """Integration settings for the steady-state search.

    rate_scale sets the time unit for the convergence test: the solver is
    converged when every moment changes relatively less than
    convergence_tol per 1/rate_scale of integration time.
    """

    dt: float
    t_max: float
    convergence_tol: float = 1e-9
    method: str = "adaptive"
    rate_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise DomainError(f"dt must be positive, got {self.dt}")
        if self.t_max <= 0:
            raise DomainError(f"t_max must be positive, got {self.t_max}")
        if self.convergence_tol <= 0:
            raise DomainError(f"convergence_tol must be positive, got {self.convergence_tol}")
        if self.method not in ("adaptive", "fixed"):
            raise DomainError(f"method must be 'adaptive' or 'fixed', got {self.method!r}")
        if self.rate_scale <= 0:
            raise DomainError(f"rate_scale must be positive, got {self.rate_scale}")

    @classmethod
    def for_rates(cls, rates: CavityRates, **overrides) -> "SolverConfig":
        """Defaults tied to the only relevant timescale 1/Gamma."""
        gamma_total = rates.gamma_total
        settings = {"dt": 0.01 / gamma_total, "t_max": 200.0 / gamma_total,
                    "rate_scale": gamma_total}
        settings.update(overrides)
        return cls(**settings)


def _pack(state: MomentState) -> np.ndarray:
    return np.array([
        state.a_p.real, state.a_p.imag,
        state.a_pp.real, state.a_pp.imag,
        state.n_p, state.n_s, state.n_i,
        state.m_si.real, state.m_si.imag,
    ])


def _unpack(y: np.ndarray) -> MomentState:
    return MomentState(
        a_p=complex(y[0], y[1]),
        a_pp=complex(y[2], y[3]),
        n_p=float(y[4]),
        n_s=float(y[5]),
        n_i=float(y[6]),
        m_si=complex(y[7], y[8]),
    )


def mf_derivatives(state: MomentState, rates: CavityRates, gain: float,
                   alpha_l: complex) -> MomentState:
    """Time derivative of the mean-field moment set."""
    gamma_total = rates.gamma_total
    sqk = math.sqrt(rates.kappa)
    pair_rate = 2.0 * gain * (state.a_pp * np.conj(state.m_si)).real
    return MomentState(
        a_p=sqk * alpha_l - gamma_total / 2 * state.a_p - 2 * gain * np.conj(state.a_p) * state.m_si,
        a_pp=2 * sqk * alpha_l * state.a_p - gamma_total * state.a_pp
        - gain * (4 * state.n_p + 2) * state.m_si,
        n_p=2 * sqk * (np.conj(alpha_l) * state.a_p).real - gamma_total * state.n_p - 2 * pair_rate,
        n_s=pair_rate - gamma_total * state.n_s,
        n_i=pair_rate - gamma_total * state.n_i,
        m_si=gain * state.a_pp * (state.n_s + state.n_i + 1) - gamma_total * state.m_si,
    )


def lin_derivatives(state: MomentState, rates: CavityRates, sigma: complex) -> MomentState:
    """Time derivative of the linearized signal/idler moments (pump frozen)."""
    gamma_total = rates.gamma_total
    pair_rate = (np.conj(sigma) * state.m_si).real
    return MomentState(
        a_p=0.0,
        a_pp=0.0,
        n_p=0.0,
        n_s=pair_rate - gamma_total * state.n_s,
        n_i=pair_rate - gamma_total * state.n_i,
        m_si=sigma / 2 * (state.n_s + state.n_i + 1) - gamma_total * state.m_si,
    )


def _max_rel_rate(y: np.ndarray, dy: np.ndarray, rate_scale: float) -> float:
    scale = np.maximum(np.abs(y), 1e-6)
    return float(np.max(np.abs(dy) / scale)) / rate_scale


def steady_state(derivative_fn: Callable[[MomentState], MomentState],
                 initial: MomentState, cfg: SolverConfig) -> MomentState:
    """Integrate the moment equations until a fixed point is reached.

    Raises
    ------
    DivergenceError
        When any moment exceeds the divergence limit (no steady state).
    ConvergenceError
        When t_max is reached before the convergence criterion is met.
    """

    def rhs(_t: float, y: np.ndarray) -> np.ndarray:
        return _pack(derivative_fn(_unpack(y)))

    y0 = _pack(initial)
    if _max_rel_rate(y0, rhs(0.0, y0), cfg.rate_scale) < cfg.convergence_tol:
        return initial

    if cfg.method == "fixed":
        return _steady_state_fixed(rhs, y0, cfg)

    def converged(_t: float, y: np.ndarray) -> float:
        return _max_rel_rate(y, rhs(0.0, y), cfg.rate_scale) - cfg.convergence_tol

    converged.terminal = True
    converged.direction = -1

    def diverged(_t: float, y: np.ndarray) -> float:
        return float(np.max(np.abs(y))) - DIVERGENCE_LIMIT

    diverged.terminal = True
    diverged.direction = 1

    sol = solve_ivp(rhs, (0.0, cfg.t_max), y0, method="LSODA",
                    events=(converged, diverged), rtol=1e-10, atol=1e-12,
                    first_step=min(cfg.dt, cfg.t_max / 100))
    if sol.status == 1:
        if len(sol.t_events[1]):
            raise DivergenceError("moments grew beyond the divergence limit")
        return _unpack(sol.y[:, -1])
    if sol.status == 0:
        raise ConvergenceError(f"no steady state within t_max={cfg.t_max}")
    raise ConvergenceError(f"integration failed: {sol.message}")


def _steady_state_fixed(rhs, y0: np.ndarray, cfg: SolverConfig) -> MomentState:
    """Classic RK4 with step dt; convergence checked once per 1/rate_scale."""
    steps_per_check = max(1, int(round(1.0 / (cfg.rate_scale * cfg.dt))))
    y = y0.copy()
    t = 0.0
    while t < cfg.t_max:
        for _ in range(steps_per_check):
            k1 = rhs(t, y)
            k2 = rhs(t, y + cfg.dt / 2 * k1)
            k3 = rhs(t, y + cfg.dt / 2 * k2)
            k4 = rhs(t, y + cfg.dt * k3)
            y = y + cfg.dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += cfg.dt
        if np.max(np.abs(y)) > DIVERGENCE_LIMIT:
            raise DivergenceError("moments grew beyond the divergence limit")
        if _max_rel_rate(y, rhs(t, y), cfg.rate_scale) < cfg.convergence_tol:
            return _unpack(y)
    raise ConvergenceError(f"no steady state within t_max={cfg.t_max}")


def lin_steady_state(rates: CavityRates, sigma: complex) -> MomentState:
    """Analytic fixed point of the linearized moment equations.

    n_s = n_i = |sigma|^2/(2(Gamma^2-|sigma|^2)),
    m_si = sigma*Gamma/(2(Gamma^2-|sigma|^2)); requires |sigma| < Gamma.
    """
    gamma_total = rates.gamma_total
    mag2 = abs(sigma) ** 2
    if abs(sigma) >= gamma_total:
        raise ThresholdError(f"no linearized steady state at |sigma|={abs(sigma)} >= {gamma_total}")
    denom = 2.0 * (gamma_total**2 - mag2)
    return MomentState(n_s=mag2 / denom, n_i=mag2 / denom, m_si=sigma * gamma_total / denom)


def drive_for_sigma(rates: CavityRates, gain: float, sigma_mag: float) -> float:
    """Waveguide drive amplitude |alpha_l| producing a given on-resonance sigma.

    Inverts sigma = 8*g*kappa*|alpha_l|^2/Gamma^2 [sqrt(Hz)].
    """
    if gain <= 0 or rates.kappa <= 0:
        raise DomainError("gain and kappa must be positive")
    return math.sqrt(sigma_mag * rates.gamma_total**2 / (8.0 * gain * rates.kappa))


def mf_steady_state(rates: CavityRates, gain: float, alpha_l: complex,
                    cfg: SolverConfig | None = None) -> MomentState:
    """Mean-field steady state reached from vacuum under a constant drive."""
    if cfg is None:
        cfg = SolverConfig.for_rates(rates, t_max=3e6 / rates.gamma_total)
    return steady_state(lambda s: mf_derivatives(s, rates, gain, alpha_l), VACUUM, cfg)


def validity_bound(rates: CavityRates, gain: float, error_tol: float,
                   cfg: SolverConfig | None = None) -> float:
    """Largest sigma_n at which the linearized n_s stays within error_tol of mean field.

    Bisects the relative deviation |n_s,lin - n_s,MF|/n_s,MF, which grows
    monotonically towards threshold as pump depletion sets in.
    """
    if not 0.0 < error_tol <= 0.5:
        raise DomainError(f"error_tol must lie in (0, 0.5], got {error_tol}")
    if cfg is None:
        cfg = SolverConfig.for_rates(rates, t_max=5e6 / rates.gamma_total)
    gamma_total = rates.gamma_total

    def deviation(sigma_n: float) -> float:
        if sigma_n == 0.0:
            return 0.0
        sigma = sigma_n * gamma_total
        ns_lin = lin_steady_state(rates, sigma).n_s
        ns_mf = steady_state(
            lambda s: mf_derivatives(s, rates, gain, drive_for_sigma(rates, gain, sigma)),
            VACUUM, cfg).n_s
        return abs(ns_lin - ns_mf) / ns_mf

    lo, hi = 0.0, 1.0 - 1e-9
    if deviation(hi) <= error_tol:
        return hi
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if deviation(mid) <= error_tol:
            lo = mid
        else:
            hi = mid
    return lo


def comparison_curve(rates: CavityRates, gain: float, sigma_ns, cfg: SolverConfig | None = None):
    """Linearized vs mean-field steady-state records over a sigma_n grid.

    Returns one dict per grid point with keys sigma_n, ns_lin, ns_mf,
    np_lin, np_mf; above threshold the linearized entries are inf.
    """
    if cfg is None:
        cfg = SolverConfig.for_rates(rates, t_max=3e6 / rates.gamma_total)
    gamma_total = rates.gamma_total
    records = []
    for sigma_n in sigma_ns:
        sigma = sigma_n * gamma_total
        alpha_l = drive_for_sigma(rates, gain, sigma)
        np_lin = 4.0 * rates.kappa * alpha_l**2 / gamma_total**2
        if sigma_n < 1.0:
            ns_lin = lin_steady_state(rates, sigma).n_s
        else:
            ns_lin = math.inf
        mf = steady_state(lambda s: mf_derivatives(s, rates, gain, alpha_l), VACUUM, cfg)
        records.append({
            "sigma_n": sigma_n,
            "ns_lin": ns_lin,
            "ns_mf": mf.n_s,
            "np_lin": np_lin,
            "np_mf": mf.n_p,
        })
    return records
