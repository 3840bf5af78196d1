"""Full Newton-Raphson AC power flow in polar form.

All non-slack buses are PQ (PV plants are power-setpoint devices). The
solver doubles as the label generator for the voltage approximations and
as the post-optimization validation oracle, so the default tolerance is
essentially machine accuracy. LV feeders have high r/x, which rules out
fast-decoupled shortcuts.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import NetworkModel, build_ybus

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 30


class NonConvergence(RuntimeError):
    """Mismatch above tolerance after max_iter Newton steps; usually an
    out-of-range operating point."""

    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"power flow did not converge in {iterations} iterations "
            f"(residual {residual:.3e})"
        )


class SingularJacobian(RuntimeError):
    """Degenerate network or absurd injections."""


@dataclass(eq=False)
class InjectionVector:
    """Net nodal injections, pu; indices follow the non-slack bus order."""

    p: np.ndarray
    q: np.ndarray


@dataclass(eq=False)
class PowerFlowSolution:
    v_mag: np.ndarray  # pu, all buses
    v_ang: np.ndarray  # rad, all buses
    iterations: int
    residual: float  # final infinity-norm mismatch


@lru_cache(maxsize=8)
def _ybus(net: NetworkModel) -> np.ndarray:
    return build_ybus(net)


def solve_pf(
    net: NetworkModel,
    inj: InjectionVector,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> PowerFlowSolution:
    """Solve the AC power flow for the given injections (flat start)."""
    if tol <= 0:
        raise ValueError("tol must be > 0")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    nb = net.n_bus
    ns = net.nonslack_ids
    if len(inj.p) != nb - 1 or len(inj.q) != nb - 1:
        raise ValueError("injection length must be N_b - 1")

    Y = _ybus(net)
    s_spec = np.zeros(nb, dtype=complex)
    s_spec[ns] = np.asarray(inj.p, float) + 1j * np.asarray(inj.q, float)

    v = np.ones(nb)
    th = np.zeros(nb)
    residual = np.inf
    for it in range(1, max_iter + 1):
        vc = v * np.exp(1j * th)
        i_inj = Y @ vc
        s_calc = vc * np.conj(i_inj)
        ds = s_spec[ns] - s_calc[ns]
        f = np.concatenate([ds.real, ds.imag])
        residual = float(np.max(np.abs(f))) if f.size else 0.0
        if residual <= tol:
            return PowerFlowSolution(v.copy(), th.copy(), it, residual)

        # dS/dtheta and dS/d|V| in complex matrix form, then restrict to PQ.
        dV = np.diag(vc)
        dI = np.diag(i_inj)
        dE = np.diag(vc / v)
        ds_dth = 1j * dV @ np.conj(dI - Y @ dV)
        ds_dvm = dV @ np.conj(Y @ dE) + np.conj(dI) @ dE
        J = np.block(
            [
                [ds_dth[np.ix_(ns, ns)].real, ds_dvm[np.ix_(ns, ns)].real],
                [ds_dth[np.ix_(ns, ns)].imag, ds_dvm[np.ix_(ns, ns)].imag],
            ]
        )
        try:
            step = np.linalg.solve(J, f)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from exc
        k = len(ns)
        th[ns] += step[:k]
        v[ns] += step[k:]
        if np.any(v[ns] <= 0):
            raise NonConvergence(it, residual)

    raise NonConvergence(max_iter, residual)


def check_mismatch(net: NetworkModel, sol: PowerFlowSolution, inj: InjectionVector) -> float:
    """Independent residual audit: recompute S = V conj(YV) and return the
    infinity-norm of the active/reactive mismatch over non-slack buses."""
    ns = net.nonslack_ids
    vc = sol.v_mag * np.exp(1j * sol.v_ang)
    s_calc = vc * np.conj(_ybus(net) @ vc)
    ds = (np.asarray(inj.p) + 1j * np.asarray(inj.q)) - s_calc[ns]
    return float(max(np.max(np.abs(ds.real)), np.max(np.abs(ds.imag))))
