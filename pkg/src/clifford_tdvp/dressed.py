"""Clifford-dressed TDVP evolution.

The state is evolved under a Hamiltonian ``H_m`` that is rotated by every
cooling event, ``H_m = C_m H_{m-1} C_m^dagger``, while the accumulated
Clifford ``C_m ... C_1`` is kept as a tableau.  Observables are measured
by pushing the bare Pauli through the accumulated tableau, so the physical
state is never reconstructed.
"""
from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .disentangler import RNG_ALGORITHM, CoolingConfig, CoolingReport, cooling_sweep
from .envs import Environments
from .mps import MPS, product_state
from .pauli import ModelParams, PauliString, PauliSum, build_model_hamiltonian
from .tableau import CliffordTableau, compose, conjugate_bits, conjugate_pauli
from .tdvp import KrylovParams, tdvp_step

__all__ = [
    "ModelParams",
    "ObservableSpec",
    "EvolutionConfig",
    "TrajectoryRecord",
    "ErrorSeries",
    "conjugate_hamiltonian",
    "transform_observable",
    "run_dressed_evolution",
    "integrated_error",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ObservableSpec:
    """A Pauli observable, or the site average of a single-site Pauli.

    For ``mode="site_average"`` the label is a single letter (``"Z"``) and
    the recorded value is ``(1/N) sum_j <P_j>``.
    """

    name: str
    label: str
    mode: str = "single"

    def __post_init__(self):
        if self.mode not in ("single", "site_average"):
            raise ValueError(f"unknown observable mode {self.mode!r}")
        if self.mode == "site_average" and self.label.lstrip("+-") not in ("X", "Y", "Z"):
            raise ValueError("site_average observables take a single Pauli letter")

    def paulis(self, n: int) -> list[PauliString]:
        if self.mode == "single":
            p = PauliString.from_label(self.label)
            if p.n_qubits != n:
                raise ValueError(f"observable {self.name!r} has {p.n_qubits} qubits, chain has {n}")
            return [p]
        sign = -1 if self.label.startswith("-") else 1
        letter = self.label.lstrip("+-")
        return [PauliString.single(n, j, letter, sign) for j in range(n)]


@dataclass(frozen=True)
class EvolutionConfig:
    n: int
    model: ModelParams
    chi_max: int = 128
    svd_cutoff: float = 0.0
    dt: float = 0.05
    t_final: float = 8.0
    cool_every: int = 10
    d_layers: int = 1
    initial_state: tuple[int, ...] | None = None
    observables: tuple[ObservableSpec, ...] = (ObservableSpec("mz_avg", "Z", "site_average"),)
    rng_seed: int = 0
    oracle_compare: bool = False
    krylov: KrylovParams = KrylovParams()
    record_profile: bool = False
    tie_tolerance: float = 1e-12
    entropy_floor: float = 1e-14

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_final < self.dt:
            raise ValueError("t_final must be at least dt")
        if self.cool_every < 0:
            raise ValueError("cool_every must be nonnegative")
        if self.chi_max < 1:
            raise ValueError("chi_max must be positive")
        if self.initial_state is not None and len(self.initial_state) != self.n:
            raise ValueError(f"initial_state has {len(self.initial_state)} bits, n is {self.n}")

    @property
    def n_steps(self) -> int:
        # guard against t_final/dt landing just below an integer
        return int(math.floor(self.t_final / self.dt + 1e-9))

    @property
    def plain_tdvp(self) -> bool:
        return self.cool_every == 0

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(self.initial_state) if self.initial_state is not None else (0,) * self.n

    def cooling(self) -> CoolingConfig:
        return CoolingConfig(self.d_layers, self.rng_seed, self.tie_tolerance, self.entropy_floor)


@dataclass
class TrajectoryRecord:
    times: list[float] = field(default_factory=list)
    observables: dict[str, list[float]] = field(default_factory=dict)
    entropy_mid: list[float] = field(default_factory=list)
    entropy_profile: list[np.ndarray] = field(default_factory=list)
    max_chi: list[int] = field(default_factory=list)
    discarded_weight: list[float] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)
    norm: list[float] = field(default_factory=list)
    cooled: list[bool] = field(default_factory=list)
    wall_ms: list[float] = field(default_factory=list)
    cooling_reports: list[tuple[int, CoolingReport]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.times)

    def series(self, name: str) -> np.ndarray:
        return np.asarray(self.observables[name])


@dataclass
class ErrorSeries:
    times: np.ndarray
    epsilon_t: np.ndarray

    @property
    def epsilon_T(self) -> float:
        return float(self.epsilon_t[-1])


def conjugate_hamiltonian(h: PauliSum, c: CliffordTableau) -> PauliSum:
    """``C h C^dagger`` term by term."""
    if h.n_qubits != c.n_qubits:
        raise ValueError(f"size mismatch: Hamiltonian on {h.n_qubits} qubits, tableau on {c.n_qubits}")
    if len(h) == 0:
        return PauliSum(h.n_qubits, [])
    xo, zo, neg = conjugate_bits(c, h.x_bits(), h.z_bits(), np.zeros(len(h), np.int64))
    coeffs = h.coeffs * (1 - 2 * neg.astype(float))
    out = PauliSum(h.n_qubits, [(cf, PauliString(x, z)) for cf, x, z in zip(coeffs, xo, zo)])
    if len(out) != len(h):
        raise AssertionError("conjugation merged distinct terms")
    return out


def transform_observable(p: PauliString, accumulated: CliffordTableau) -> PauliString:
    """Image of a bare observable in the dressed frame."""
    return conjugate_pauli(accumulated, p)


def _measure(state, specs, paulis, acc):
    out = {}
    for spec in specs:
        vals = [state.expect_pauli(transform_observable(p, acc)) for p in paulis[spec.name]]
        out[spec.name] = float(np.mean(vals)) if spec.mode == "site_average" else vals[0]
    return out


def run_dressed_evolution(
    config: EvolutionConfig,
    callback=None,
) -> tuple[TrajectoryRecord, MPS, CliffordTableau]:
    """Run the dressed evolution; ``cool_every=0`` gives plain 1-TDVP.

    Entries are recorded at ``t = 0`` and after every step.  ``callback``,
    if given, is called as ``callback(m, state, accumulated, record)`` after
    every step (and with ``m = 0`` before the first one).
    """
    n = config.n
    names = [s.name for s in config.observables]
    if len(set(names)) != len(names):
        raise ValueError("observable names must be unique")
    h = build_model_hamiltonian(config.model, n)
    paulis = {s.name: s.paulis(n) for s in config.observables}
    state = product_state(config.bits, config.chi_max, config.svd_cutoff)
    state.pad_bonds(config.chi_max)
    envs = Environments(state, h)
    acc = CliffordTableau.identity(n)
    rng = np.random.Generator(np.random.PCG64(config.rng_seed))
    cooling = config.cooling()
    logger.info("rng %s seed %d", RNG_ALGORITHM, config.rng_seed)

    rec = TrajectoryRecord(observables={name: [] for name in names})
    discarded = 0.0

    def record(t, cooled, wall):
        for name, v in _measure(state, config.observables, paulis, acc).items():
            rec.observables[name].append(v)
        rec.times.append(t)
        rec.entropy_mid.append(state.midpoint_entropy())
        if config.record_profile:
            rec.entropy_profile.append(state.entropy_profile())
        rec.max_chi.append(max(state.bond_dims))
        rec.discarded_weight.append(discarded)
        rec.energy.append(envs.energy(state))
        rec.norm.append(state.norm())
        rec.cooled.append(cooled)
        rec.wall_ms.append(wall)

    record(0.0, False, 0.0)
    if callback is not None:
        callback(0, state, acc, rec)
    for m in range(1, config.n_steps + 1):
        start = time.perf_counter()
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            step = tdvp_step(state, envs, config.dt, config.krylov)
        if step.unconverged:
            rec.warnings.append(f"step {m}: {step.unconverged} unconverged Krylov exponentials")
        rec.warnings.extend(f"step {m}: {w.message}" for w in caught)
        cooled = config.cool_every > 0 and m % config.cool_every == 0
        if cooled:
            state.move_center(0)
            c_m, report = cooling_sweep(state, cooling, rng)
            discarded += report.discarded_weight
            rec.cooling_reports.append((m, report))
            h = conjugate_hamiltonian(h, c_m)
            acc = compose(c_m, acc)
            envs = Environments(state, h)
        else:
            # the next sweep starts from site 0
            state.move_center(0)
        record(m * config.dt, cooled, 1e3 * (time.perf_counter() - start))
        if not np.isfinite(rec.energy[-1]):
            raise FloatingPointError(f"non-finite energy at step {m}")
        if callback is not None:
            callback(m, state, acc, rec)
    return rec, state, acc


def integrated_error(approx, exact, times=None, dt: float | None = None) -> ErrorSeries:
    """Running time-average of ``|approx - exact|``.

    ``eps(t) = (1/t) * integral_0^t |approx - exact| ds`` by the trapezoid
    rule, with ``eps(0) = |approx(0) - exact(0)|``.  Supply either ``times``
    (uniform, starting at 0) or ``dt``.
    """
    a = np.asarray(approx, dtype=float)
    b = np.asarray(exact, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"grid mismatch: {a.shape} vs {b.shape}")
    if times is None:
        if dt is None:
            raise ValueError("need times or dt")
        times = dt * np.arange(a.size)
    times = np.asarray(times, dtype=float)
    if times.shape != a.shape:
        raise ValueError("grid mismatch: times do not match the series")
    if abs(times[0]) > 1e-12:
        raise ValueError("time grid must start at 0")
    if a.size > 1:
        steps = np.diff(times)
        if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * max(1.0, abs(steps[0])):
            raise ValueError("time grid must be uniform and increasing")
    diff = np.abs(a - b)
    eps = np.empty_like(diff)
    eps[0] = diff[0]
    if a.size > 1:
        eps[1:] = cumulative_trapezoid(diff, times)[:] / times[1:]
    return ErrorSeries(times, eps)
