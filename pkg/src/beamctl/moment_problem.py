"""Assembly of the trigonometric moment system that a null control must solve.

Driving every mode of the initial data to rest at time T is equivalent to a
finite family of L2(0, T) constraints on the curvature f'' of the boundary
signal: two flatness rows (so f and f' vanish at both endpoints once f is
rebuilt by double integration) plus, per controllable mode, one row for each
characteristic root.  A mode's pair of complex rows is realified in the
underdamped regime and replaced by the confluent exp/polyexp pair at the
critical damping value.

Writing gamma1 = -(free value at T) and gamma2 = -(free velocity at T), the
row targets for a mode with simple roots are

    <f'', e^(l+ (T-s))> = (l- gamma1 - gamma2) / x_n,
    <f'', e^(l- (T-s))> = (l+ gamma1 - gamma2) / x_n,

where x_n is the mode's boundary trace coefficient; the confluent limit
l+- -> -n^2 sends the pair to exp and polyexp targets
-(n^2 gamma1 + gamma2)/x_n and -gamma1/x_n.

Overdamped beams with a rational branch ratio r = p/q collide: the slow root
of mode pk equals the fast root of mode qk for every k.  Colliding rows are
detected by exact rational arithmetic on the decay rates and merged when
their targets agree to within 1e-9 of the data's l2 size; disagreement means
the data pair is outside the reachable set and raises ResonanceDefect.

Neumann data additionally must be mean free in both components, since the
zero mode's physical evolution is an affine drift no admissible control can
touch, and even cosine modes carry a vanishing trace coefficient: such modes
are uncontrollable unless their data is negligibly small.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import mpmath as mp

from ._numutil import decimal_str, to_mpf
from .errors import ResonanceDefect, UncontrollableMode
from .kernels import Kernel
from .modal_dynamics import ModalState, free_coefficients, free_state_at
from .spectrum import (
    BeamConfig,
    Boundary,
    DampingRegime,
    ModeEigenvalues,
    boundary_trace_coefficients,
    branch_ratio_exact,
    mode_eigenvalues,
)

__all__ = [
    "MomentRHS",
    "MomentSystem",
    "data_l2_norm",
    "neumann_admissibility",
    "moment_rhs",
    "assemble",
]

_GUARD_BITS = 64

# relative thresholds, all against the l2 size of the data
MEAN_FREE_RTOL = mp.mpf("1e-12")        # Neumann zero-mode admissibility
INVISIBLE_RTOL = mp.mpf("1e-14")        # even cosine modes, against max amplitude
COLLISION_RTOL = mp.mpf("1e-9")         # target agreement on merged rows


def data_l2_norm(state: ModalState) -> float:
    """Plain l2 size of the data: all modal values and velocities together."""
    total = mp.mpf(0)
    for v in state.values:
        total += to_mpf(v) ** 2
    for v in state.velocities:
        total += to_mpf(v) ** 2
    return float(mp.sqrt(total))


def neumann_admissibility(state0: ModalState, precision_bits: int = 256) -> Tuple[float, float]:
    """Mean of the initial displacement and velocity, as integrals over (0, pi).

    The constant eigenfunction is 1/sqrt(pi), so a zero-mode coefficient c
    corresponds to the integral sqrt(pi) c.  Both must vanish for the data
    to be reachable from rest; the pair is returned for reporting.
    """
    if state0.boundary is not Boundary.NEUMANN:
        raise ValueError("admissibility residuals only apply to Neumann data")
    with mp.workprec(precision_bits + _GUARD_BITS):
        root_pi = mp.sqrt(mp.pi)
        return (float(root_pi * to_mpf(state0.values[0])),
                float(root_pi * to_mpf(state0.velocities[0])))


@dataclass(frozen=True)
class MomentRHS:
    """Per-mode targets feeding the moment rows, kept for reports and checks.

    zeta1/zeta2 follow the row order of the mode's kernel pair: cos/sin
    components underdamped, exp/polyexp targets critical, slow/fast branch
    targets overdamped (before any collision merge).
    """

    modes: Tuple[int, ...]
    gamma1: Tuple
    gamma2: Tuple
    zeta1: Tuple
    zeta2: Tuple


def moment_rhs(eig: ModeEigenvalues, trace_coeff, gamma1, gamma2):
    """Kernel/target pairs for one mode, realified and ready for assembly.

    Returns a tuple of (suffix, Kernel, target) triples; targets are real
    mpf values at the current working precision.
    """
    x = to_mpf(trace_coeff)
    if x == 0:
        raise ValueError(f"mode {eig.n} has zero trace coefficient; no row exists")
    g1 = to_mpf(gamma1)
    g2 = to_mpf(gamma2)
    if eig.regime is DampingRegime.UNDERDAMPED:
        zeta_plus = (eig.lambda_minus * g1 - g2) / x
        return (
            ("cos", Kernel("expcos", decay=eig.beta, freq=eig.alpha), zeta_plus.real),
            ("sin", Kernel("expsin", decay=eig.beta, freq=eig.alpha), zeta_plus.imag),
        )
    if eig.regime is DampingRegime.CRITICAL:
        n2 = mp.mpf(eig.n) ** 2
        return (
            ("decay", Kernel("exp", rate=-n2), -(n2 * g1 + g2) / x),
            ("drift", Kernel("polyexp", rate=-n2), -g1 / x),
        )
    return (
        ("slow", Kernel("exp", rate=eig.lambda_plus), (eig.lambda_minus * g1 - g2) / x),
        ("fast", Kernel("exp", rate=eig.lambda_minus), (eig.lambda_plus * g1 - g2) / x),
    )


@dataclass(frozen=True)
class MomentSystem:
    """A fully assembled moment problem: kernels, targets, and provenance.

    Rows 0 and 1 are always the flatness constraints with zero target.  Each
    remaining row belongs to the modes listed in row_modes (more than one
    after a collision merge).  The originating config and data ride along so
    the whole system can be rebuilt bit-for-bit at a different precision.
    """

    config: BeamConfig
    state0: ModalState
    kernels: Tuple[Kernel, ...]
    targets: Tuple
    labels: Tuple[str, ...]
    row_modes: Tuple[Tuple[int, ...], ...]
    rhs: MomentRHS
    dropped_modes: Tuple[int, ...] = ()
    collisions: Tuple = ()              # (rate, (m, n)) per merged pair

    @property
    def n_rows(self) -> int:
        return len(self.kernels)

    def with_precision(self, precision_bits: int) -> "MomentSystem":
        """The same moment problem reassembled at a different precision."""
        if precision_bits == self.config.precision_bits:
            return self
        return assemble(replace(self.config, precision_bits=precision_bits), self.state0)

    def to_json_dict(self) -> dict:
        bits = self.config.precision_bits
        cfg = self.config
        return {
            "config": {
                "boundary": cfg.boundary.value,
                "rho": str(cfg.rho),
                "n_modes": cfg.n_modes,
                "horizon": str(cfg.horizon),
                "precision_bits": cfg.precision_bits,
                "regularization": repr(cfg.regularization),
            },
            "state0": {
                "values": [decimal_str(v, bits) for v in self.state0.values],
                "velocities": [decimal_str(v, bits) for v in self.state0.velocities],
            },
            "rows": [
                {
                    "label": lab,
                    "kernel": ker.descriptor(bits),
                    "target": decimal_str(tgt, bits),
                    "modes": list(modes),
                }
                for lab, ker, tgt, modes in zip(self.labels, self.kernels,
                                                self.targets, self.row_modes)
            ],
            "dropped_modes": list(self.dropped_modes),
            "collisions": [
                {"rate": decimal_str(rate, bits), "modes": list(pair)}
                for rate, pair in self.collisions
            ],
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "MomentSystem":
        """Rebuild an equivalent system from its serialized form.

        The rows are reassembled from config and data rather than trusted
        verbatim, which keeps deserialization honest; a corrupted document
        that no longer matches its own rows is detectable by comparing
        against the stored row targets.
        """
        c = doc["config"]
        config = BeamConfig(
            boundary=Boundary(c["boundary"]),
            rho=Fraction(c["rho"]),
            n_modes=int(c["n_modes"]),
            horizon=Fraction(c["horizon"]),
            precision_bits=int(c["precision_bits"]),
            regularization=float(c["regularization"]),
        )
        with mp.workprec(config.precision_bits + _GUARD_BITS):
            s = doc["state0"]
            state0 = ModalState(config.boundary,
                                tuple(mp.mpf(v) for v in s["values"]),
                                tuple(mp.mpf(v) for v in s["velocities"]))
        return assemble(config, state0)


def assemble(config: BeamConfig, state0: ModalState) -> MomentSystem:
    """Build the moment system for the given beam and initial data.

    Raises UncontrollableMode for data with energy on a mode the control
    cannot see (the Neumann zero mode and even cosine modes), and
    ResonanceDefect when an overdamped collision carries incompatible
    targets.  Dirichlet data never triggers either: every sine mode has a
    nonzero trace coefficient and collisions only merge compatible rows or
    fail, which is decided here and nowhere downstream.
    """
    if state0.boundary is not config.boundary:
        raise ValueError("data boundary does not match configuration")
    if state0.n_modes != config.n_modes:
        raise ValueError(
            f"data carries {state0.n_modes} modes, configuration wants {config.n_modes}")

    bits = config.precision_bits
    norm = data_l2_norm(state0)
    with mp.workprec(bits + _GUARD_BITS):
        traces = boundary_trace_coefficients(config.boundary, config.n_modes, bits)

        if config.boundary is Boundary.NEUMANN:
            zero_amp = max(abs(to_mpf(state0.values[0])), abs(to_mpf(state0.velocities[0])))
            if zero_amp > MEAN_FREE_RTOL * norm:
                raise UncontrollableMode(0, float(zero_amp), float(MEAN_FREE_RTOL * norm))

        max_amp = max(state0.amplitude(n) for n in range(1, config.n_modes + 1))
        if config.boundary is Boundary.NEUMANN:
            max_amp = max(max_amp, abs(float(state0.values[0])),
                          abs(float(state0.velocities[0])))

        dropped = []
        active = []
        for n in range(1, config.n_modes + 1):
            if to_mpf(traces.coefficient(n)) == 0:
                amp = state0.amplitude(n)
                if max_amp > 0 and amp > float(INVISIBLE_RTOL) * max_amp:
                    raise UncontrollableMode(n, amp, float(INVISIBLE_RTOL) * max_amp)
                dropped.append(n)
            else:
                active.append(n)

        eigs = tuple(mode_eigenvalues(config.rho, n, bits)
                     for n in range(1, config.n_modes + 1))
        free = free_coefficients(state0, eigs, bits)
        horizon = to_mpf(config.horizon)
        at_T = free_state_at(free, horizon)

        r_exact = None
        if config.regime is DampingRegime.OVERDAMPED:
            r_exact = branch_ratio_exact(config.rho)

        kernels = [Kernel("const"), Kernel("linear")]
        targets = [mp.mpf(0), mp.mpf(0)]
        labels = ["flat-slope", "flat-value"]
        row_modes = [(), ()]

        rhs_modes, rhs_g1, rhs_g2, rhs_z1, rhs_z2 = [], [], [], [], []
        merged = {}                     # exact rate key -> row index
        collisions = []

        for n in active:
            eig = eigs[n - 1]
            i = at_T.mode_index(n)
            g1 = -to_mpf(at_T.values[i])
            g2 = -to_mpf(at_T.velocities[i])
            rows = moment_rhs(eig, traces.coefficient(n), g1, g2)
            rhs_modes.append(n)
            rhs_g1.append(g1)
            rhs_g2.append(g2)
            rhs_z1.append(rows[0][2])
            rhs_z2.append(rows[1][2])

            if r_exact is not None:
                rate_keys = (Fraction(-n * n) / r_exact, -r_exact * n * n)
                # rebuild the kernels from the exact rates so colliding rows
                # share one bit-identical kernel regardless of which mode
                # inserted it first
                rows = tuple((suffix, Kernel("exp", rate=to_mpf(key)), target)
                             for (suffix, _, target), key in zip(rows, rate_keys))
            else:
                rate_keys = ((DampingRegime(config.regime), "plus", n),
                             (DampingRegime(config.regime), "minus", n))

            for (suffix, kernel, target), key in zip(rows, rate_keys):
                if key in merged:
                    j = merged[key]
                    gap = abs(target - targets[j])
                    pair = (row_modes[j][0], n)
                    if gap > COLLISION_RTOL * max(norm, 1e-300):
                        raise ResonanceDefect(float(to_mpf(kernel.rate)), float(gap),
                                              norm, pair=pair)
                    targets[j] = (targets[j] + target) / 2
                    labels[j] = f"{labels[j]}+mode{n}-{suffix}"
                    row_modes[j] = row_modes[j] + (n,)
                    collisions.append((to_mpf(kernel.rate), pair))
                else:
                    merged[key] = len(kernels)
                    kernels.append(kernel)
                    targets.append(target)
                    labels.append(f"mode{n}-{suffix}")
                    row_modes.append((n,))

        rhs = MomentRHS(tuple(rhs_modes), tuple(rhs_g1), tuple(rhs_g2),
                        tuple(rhs_z1), tuple(rhs_z2))
        return MomentSystem(
            config=config,
            state0=state0,
            kernels=tuple(kernels),
            targets=tuple(targets),
            labels=tuple(labels),
            row_modes=tuple(row_modes),
            rhs=rhs,
            dropped_modes=tuple(dropped),
            collisions=tuple(collisions),
        )
