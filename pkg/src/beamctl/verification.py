"""End-to-end verification of synthesized controls.

A synthesis is only trusted after two independent evaluations agree that the
state actually reaches rest.  The closed-form route evaluates the forced
response through the exponential-part calculus at extended precision; the
oracle route integrates the same modal system with a classical fixed-step
scheme in float64 that shares no code with the closed forms.  Both final
states are measured in the pair norm natural to the boundary condition:
displacement at scale 3 with velocity at scale 1 for Dirichlet control,
scales 4 and 2 for Neumann.

The cost sweep quantifies the price of haste: shrinking the horizon can only
grow the minimum curvature norm (a control on [0, T1] extends by zero to any
[0, T2] with T2 > T1, its moments against the longer kernels being exactly
the shorter ones), and near T = 0 the growth is violent.  The sweep checks
the monotonicity numerically and fits log cost against 1/T to expose the
blow-up rate.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import mpmath as mp
import numpy as np

from ._numutil import to_mpf
from .kernels import ControlSignal
from .modal_dynamics import (
    ModalState,
    Trajectory,
    forced_state_at,
    free_coefficients,
    free_state_at,
    forcing_resolution_steps,
    simulate_oracle,
    state_pair_norm,
)
from .moment_problem import assemble
from .spectrum import BeamConfig, Boundary, mode_eigenvalues
from .synthesis import SynthesisReport, solve_min_norm

__all__ = [
    "Verdict",
    "VerificationReport",
    "CostSweep",
    "pair_norm_scale",
    "closed_form_final_state",
    "null_control_experiment",
    "cost_sweep",
    "crosscheck_suite",
]

_GUARD_BITS = 64


class Verdict(str, Enum):
    CONTROLLED = "controlled"
    RESIDUAL_TOO_LARGE = "residual-too-large"


def pair_norm_scale(boundary) -> int:
    """Displacement scale of the verification norm: 3 Dirichlet, 4 Neumann."""
    return 3 if Boundary(boundary) is Boundary.DIRICHLET else 4


def closed_form_final_state(config: BeamConfig, state0: ModalState,
                            control: ControlSignal) -> ModalState:
    """Physical state at the horizon: free flow plus forced response."""
    bits = config.precision_bits
    eigs = tuple(mode_eigenvalues(config.rho, n, bits)
                 for n in range(1, config.n_modes + 1))
    free = free_coefficients(state0, eigs, bits)
    with mp.workprec(bits + _GUARD_BITS):
        T = to_mpf(config.horizon)
        free_T = free_state_at(free, T)
        forced_T = forced_state_at(config, control, T)
        vals = tuple(a + b for a, b in zip(free_T.values, forced_T.values))
        vels = tuple(a + b for a, b in zip(free_T.velocities, forced_T.velocities))
        return ModalState(config.boundary, vals, vels)


def _max_componentwise_gap(a: ModalState, b: ModalState) -> float:
    gap = 0.0
    for x, y in zip(a.values, b.values):
        gap = max(gap, abs(float(x) - float(y)))
    for x, y in zip(a.velocities, b.velocities):
        gap = max(gap, abs(float(x) - float(y)))
    return gap


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one null-control experiment, both evaluation routes."""

    config: BeamConfig
    state0: ModalState
    synthesis: SynthesisReport
    tolerance: float
    norm_scale: int
    initial_norm: float
    final_norm: float                   # closed-form route
    oracle_final_norm: float            # independent integrator route
    oracle_deviation: float             # max componentwise gap between routes
    verdict: Verdict
    trajectory: Trajectory

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "tolerance": repr(self.tolerance),
            "norm_scale": self.norm_scale,
            "initial_norm": repr(self.initial_norm),
            "final_norm": repr(self.final_norm),
            "oracle_final_norm": repr(self.oracle_final_norm),
            "oracle_deviation": repr(self.oracle_deviation),
            "synthesis": self.synthesis.to_json_dict(),
        }


def null_control_experiment(config: BeamConfig, state0: ModalState,
                            tolerance: float = 1e-6,
                            steps: Optional[int] = None,
                            autoscale: bool = True,
                            ridge_fallback: bool = False,
                            samples: int = 201) -> VerificationReport:
    """Synthesize a null control and verify it along both evaluation routes.

    The verdict is CONTROLLED only if both the closed-form and the oracle
    final states are small: pair norm at most `tolerance` times the initial
    pair norm.  Data the control cannot act on raises before any synthesis
    happens (see the moment assembly), so a returned report always carries
    an actual control.
    """
    if tolerance <= 0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    system = assemble(config, state0)
    report = solve_min_norm(system, autoscale=autoscale, ridge_fallback=ridge_fallback)
    solved_config = report.system.config
    control = report.control

    final = closed_form_final_state(solved_config, state0, control)
    p = pair_norm_scale(config.boundary)
    initial_norm = state_pair_norm(state0, p)
    if steps is None:
        # size the oracle so its truncation cannot eat the verdict margin
        target = tolerance * max(initial_norm, 1e-300) / 20.0
        steps = forcing_resolution_steps(solved_config, control, target)
    trajectory = simulate_oracle(solved_config, state0, control,
                                 steps=steps, samples=samples)
    oracle_final = trajectory.final_state()

    final_norm = state_pair_norm(final, p)
    oracle_final_norm = state_pair_norm(oracle_final, p)
    deviation = _max_componentwise_gap(final, oracle_final)

    floor = tolerance * max(initial_norm, 1e-300)
    verdict = (Verdict.CONTROLLED
               if final_norm <= floor and oracle_final_norm <= floor
               else Verdict.RESIDUAL_TOO_LARGE)
    return VerificationReport(
        config=solved_config,
        state0=state0,
        synthesis=report,
        tolerance=tolerance,
        norm_scale=p,
        initial_norm=initial_norm,
        final_norm=final_norm,
        oracle_final_norm=oracle_final_norm,
        oracle_deviation=deviation,
        verdict=verdict,
        trajectory=trajectory,
    )


@dataclass(frozen=True)
class CostSweep:
    """Minimum control cost across horizons, shortest first."""

    horizons: Tuple          # Fractions, ascending
    costs: Tuple[float, ...]
    monotone_nonincreasing: bool
    fit_slope: Optional[float]          # log cost ~ slope / T + intercept
    fit_intercept: Optional[float]
    fit_r_squared: Optional[float]

    def to_json_dict(self) -> dict:
        return {
            "horizons": [str(T) for T in self.horizons],
            "costs": [repr(c) for c in self.costs],
            "monotone_nonincreasing": self.monotone_nonincreasing,
            "fit_slope": None if self.fit_slope is None else repr(self.fit_slope),
            "fit_intercept": None if self.fit_intercept is None else repr(self.fit_intercept),
            "fit_r_squared": None if self.fit_r_squared is None else repr(self.fit_r_squared),
        }


def cost_sweep(config: BeamConfig, state0: ModalState, horizons: Sequence,
               autoscale: bool = True) -> CostSweep:
    """Solve the same data across several horizons and track the cost.

    Horizons are deduplicated and sorted ascending.  Monotonicity is checked
    with a relative slack of 1e-9 (independent solves at different horizons
    agree on the shared structure only to roundoff).  With three or more
    horizons the sweep also fits log cost against 1/T and reports the least
    squares exponent and its r^2.
    """
    uniq = sorted({as_horizon(h) for h in horizons})
    if not uniq:
        raise ValueError("at least one horizon is required")
    costs = []
    for T in uniq:
        cfg = replace(config, horizon=T)
        report = solve_min_norm(assemble(cfg, state0), autoscale=autoscale)
        costs.append(report.cost)
    monotone = all(costs[i] >= costs[i + 1] * (1 - 1e-9)
                   for i in range(len(costs) - 1))
    slope = intercept = r2 = None
    positive = [(float(T), c) for T, c in zip(uniq, costs) if c > 0]
    if len(positive) >= 3:
        x = np.array([1.0 / T for T, _ in positive])
        y = np.log(np.array([c for _, c in positive]))
        coeffs = np.polyfit(x, y, 1)
        pred = np.polyval(coeffs, x)
        ss_res = float(np.sum((y - pred) ** 2))
        ss_tot = float(np.sum((y - np.mean(y)) ** 2))
        slope = float(coeffs[0])
        intercept = float(coeffs[1])
        r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return CostSweep(tuple(uniq), tuple(costs), monotone, slope, intercept, r2)


def as_horizon(h) -> Fraction:
    """Exact horizon from int, float, Fraction or decimal string."""
    if isinstance(h, Fraction):
        return h
    if isinstance(h, (int, float, str)):
        return Fraction(h if not isinstance(h, str) else h.strip())
    raise TypeError(f"horizon must be numeric, got {type(h).__name__}")


def crosscheck_suite(precision_bits: int = 192, tolerance: float = 1e-6) -> dict:
    """A fixed battery of experiments spanning all regimes and both boundaries.

    Returns per-case relative final norms and route deviations plus their
    maxima over the battery; intended as a quick integrity check that the
    closed forms and the independent integrator still agree after any change.
    """
    cases = [
        ("dirichlet-underdamped", Boundary.DIRICHLET, Fraction(1), 4,
         (1, 0, "0.3", 0), (0, "0.2", 0, 0)),
        ("dirichlet-critical", Boundary.DIRICHLET, Fraction(2), 3,
         (1, 0, "0.2"), (0, "0.1", 0)),
        ("dirichlet-overdamped", Boundary.DIRICHLET, Fraction(5, 2), 4,
         (0, 0, 1, 0), (0, 0, "0.1", 0)),
        ("neumann-underdamped", Boundary.NEUMANN, Fraction(3, 2), 3,
         (0, 1, 0, "0.2"), (0, 0, 0, 0)),
    ]
    out = {"cases": [], "max_deviation": 0.0, "max_final_rel": 0.0}
    for label, boundary, rho, n_modes, values, velocities in cases:
        config = BeamConfig(boundary=boundary, rho=rho, n_modes=n_modes,
                            horizon=Fraction(1), precision_bits=precision_bits)
        with mp.workprec(precision_bits + _GUARD_BITS):
            state0 = ModalState(boundary,
                                tuple(to_mpf(Fraction(v)) for v in values),
                                tuple(to_mpf(Fraction(v)) for v in velocities))
        report = null_control_experiment(config, state0, tolerance=tolerance)
        rel = report.final_norm / max(report.initial_norm, 1e-300)
        rel_oracle = report.oracle_final_norm / max(report.initial_norm, 1e-300)
        out["cases"].append({
            "label": label,
            "verdict": report.verdict.value,
            "final_rel": rel,
            "oracle_final_rel": rel_oracle,
            "deviation": report.oracle_deviation,
            "cost": report.synthesis.cost,
        })
        out["max_deviation"] = max(out["max_deviation"], report.oracle_deviation)
        out["max_final_rel"] = max(out["max_final_rel"], rel, rel_oracle)
    return out
