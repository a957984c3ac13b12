"""Single-site TDVP with Lanczos exponentials.

One step is the symmetric composition of a left-to-right and a
right-to-left half-step sweep.  In each sweep the center tensor is
propagated forward with ``H_eff``, split by QR, and the bond matrix is
propagated backward with ``K_eff`` before being absorbed into the next
site.  Bond dimensions never change.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .envs import Environments
from .mps import MPS

__all__ = ["KrylovParams", "TdvpStepReport", "krylov_expm_apply", "tdvp_sweep", "tdvp_step"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KrylovParams:
    tolerance: float = 1e-12
    max_dim: int = 30
    min_dim: int = 3

    def __post_init__(self):
        if not (1 <= self.min_dim <= self.max_dim):
            raise ValueError("need 1 <= min_dim <= max_dim")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


@dataclass
class TdvpStepReport:
    max_krylov_dim_used: int = 0
    norm_drift: float = 0.0
    energy_before: float = float("nan")
    energy_after: float = float("nan")
    unconverged: int = 0


class KrylovConvergenceWarning(RuntimeWarning):
    pass


def _as_operator(op):
    if isinstance(op, np.ndarray):
        return (lambda v: op @ v), op.shape[0]
    dim = getattr(op, "dimension", None)
    return op, dim


def _lanczos_expm(op, v, tau, params: KrylovParams):
    """Return ``(exp(-1j*tau*op) v, subspace size, converged)``."""
    apply, dim = _as_operator(op)
    v = np.asarray(v, dtype=complex).reshape(-1)
    dim = v.shape[0] if dim is None else dim
    beta0 = np.linalg.norm(v)
    if beta0 == 0:
        return v.copy(), 0, True
    if tau == 0:
        return v.copy(), 0, True
    max_dim = min(params.max_dim, dim)
    basis = np.empty((max_dim, v.shape[0]), complex)
    basis[0] = v / beta0
    alpha = np.zeros(max_dim)
    beta = np.zeros(max_dim)
    for j in range(max_dim):
        w = apply(basis[j])
        alpha[j] = np.vdot(basis[j], w).real
        # full reorthogonalization, twice; subspaces are small
        for _ in range(2):
            w = w - basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
        b = np.linalg.norm(w)
        if not np.isfinite(b):
            raise FloatingPointError("non-finite value in Lanczos recursion")
        m = j + 1
        t = np.diag(alpha[:m]) + np.diag(beta[: m - 1], 1) + np.diag(beta[: m - 1], -1)
        evals, evecs = np.linalg.eigh(t)
        coef = evecs @ (np.exp(-1j * tau * evals) * evecs[0].conj())
        happy = b < 1e-13 * max(1.0, abs(alpha[: m]).max())
        converged = happy or m == dim or (m >= params.min_dim and b * abs(coef[-1]) < params.tolerance)
        if converged or m == max_dim:
            return beta0 * (coef @ basis[:m]), m, bool(converged)
        beta[j] = b
        basis[j + 1] = w / b
    raise AssertionError("unreachable")


def krylov_expm_apply(op, v, tau, params: KrylovParams = KrylovParams()) -> np.ndarray:
    """Approximate ``exp(-1j * tau * op) @ v`` for a Hermitian ``op``.

    ``op`` is a dense matrix or a callable with a ``dimension`` attribute
    (e.g. :class:`~clifford_tdvp.envs.EffectiveOperator`).
    """
    w, _, converged = _lanczos_expm(op, v, tau, params)
    if not converged:
        warnings.warn("Krylov exponential hit max_dim before converging", KrylovConvergenceWarning)
    return w


def _evolve(op, x, tau, params, report):
    w, m, ok = _lanczos_expm(op, x.reshape(-1), tau, params)
    report.max_krylov_dim_used = max(report.max_krylov_dim_used, m)
    if not ok:
        report.unconverged += 1
    return w.reshape(x.shape)


def tdvp_sweep(
    state: MPS,
    envs: Environments,
    dt_half: float,
    direction: str = "left_to_right",
    params: KrylovParams = KrylovParams(),
    report: TdvpStepReport | None = None,
) -> TdvpStepReport:
    """One half-step sweep; mutates ``state`` and ``envs`` in place."""
    report = TdvpStepReport() if report is None else report
    n = state.n_sites
    if direction == "left_to_right":
        if state.center != 0:
            raise ValueError("left-to-right sweep must start with the center at site 0")
        for i in range(n):
            a = _evolve(envs.effective_site(i), state.tensors[i], dt_half, params, report)
            if i == n - 1:
                state.tensors[i] = a
                break
            l, _, r = a.shape
            q, c = np.linalg.qr(a.reshape(l * 2, r))
            state.tensors[i] = q.reshape(l, 2, q.shape[1])
            envs.update_left(state, i)
            c = _evolve(envs.effective_bond(i), c, -dt_half, params, report)
            state.tensors[i + 1] = np.tensordot(c, state.tensors[i + 1], axes=(1, 0))
            state.center = i + 1
    elif direction == "right_to_left":
        if state.center != n - 1:
            raise ValueError("right-to-left sweep must start with the center at the last site")
        for i in range(n - 1, -1, -1):
            a = _evolve(envs.effective_site(i), state.tensors[i], dt_half, params, report)
            if i == 0:
                state.tensors[i] = a
                break
            l, _, r = a.shape
            q, c = np.linalg.qr(a.reshape(l, 2 * r).T)
            state.tensors[i] = q.T.reshape(q.shape[1], 2, r)
            envs.update_right(state, i)
            c = _evolve(envs.effective_bond(i - 1), c.T, -dt_half, params, report)
            state.tensors[i - 1] = np.tensordot(state.tensors[i - 1], c, axes=(2, 0))
            state.center = i - 1
    else:
        raise ValueError(f"unknown sweep direction {direction!r}")
    return report


def tdvp_step(
    state: MPS,
    envs: Environments,
    dt: float,
    params: KrylovParams = KrylovParams(),
    measure_energy: bool = False,
) -> TdvpStepReport:
    """Second-order step: left-to-right then right-to-left at ``dt / 2`` each."""
    report = TdvpStepReport()
    norm0 = state.norm()
    if measure_energy:
        report.energy_before = envs.energy(state)
    tdvp_sweep(state, envs, dt / 2, "left_to_right", params, report)
    tdvp_sweep(state, envs, dt / 2, "right_to_left", params, report)
    report.norm_drift = abs(state.norm() - norm0)
    if measure_energy:
        report.energy_after = envs.energy(state)
    if report.unconverged:
        logger.warning("%d local exponentials did not converge within max_dim", report.unconverged)
    return report
