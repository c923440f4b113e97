"""Moment assembly: row structure, targets, screening, collision handling."""
from fractions import Fraction

import mpmath as mp
import pytest

from beamctl.errors import ResonanceDefect, UncontrollableMode
from beamctl.kernels import kernel_value
from beamctl.modal_dynamics import ModalState
from beamctl.moment_problem import (
    MomentSystem,
    assemble,
    data_l2_norm,
    neumann_admissibility,
)
from beamctl.spectrum import BeamConfig, Boundary
from beamctl.synthesis import solve_min_norm


def dirichlet_config(rho, n_modes, bits=256, horizon=Fraction(1)):
    return BeamConfig(Boundary.DIRICHLET, Fraction(rho), n_modes, horizon, bits)


def test_row_structure_underdamped():
    cfg = dirichlet_config(1, 2)
    st = ModalState.dirichlet(values=(1, 0), velocities=(0, 0.5))
    system = assemble(cfg, st)
    assert system.labels == ("flat-slope", "flat-value",
                             "mode1-cos", "mode1-sin", "mode2-cos", "mode2-sin")
    assert system.row_modes == ((), (), (1,), (1,), (2,), (2,))
    kinds = tuple(k.kind for k in system.kernels)
    assert kinds == ("const", "linear", "expcos", "expsin", "expcos", "expsin")
    # flatness rows target zero
    assert system.targets[0] == 0 and system.targets[1] == 0


def test_row_structure_critical():
    cfg = dirichlet_config(2, 2)
    st = ModalState.dirichlet(values=(1, 0), velocities=(0, 0))
    system = assemble(cfg, st)
    assert system.labels[2:] == ("mode1-decay", "mode1-drift",
                                 "mode2-decay", "mode2-drift")
    kinds = tuple(k.kind for k in system.kernels[2:])
    assert kinds == ("exp", "polyexp", "exp", "polyexp")
    assert float(system.kernels[2].rate) == -1.0
    assert float(system.kernels[4].rate) == -4.0


def test_solved_control_satisfies_every_moment():
    # substitution identity: the synthesized curvature must reproduce each
    # target as an actual integral, checked here by quadrature
    cfg = dirichlet_config(1, 3, bits=256)
    st = ModalState.dirichlet(values=(1, 0.3, 0), velocities=(0, 0.2, 0))
    system = assemble(cfg, st)
    report = solve_min_norm(system)
    sig = report.control
    with mp.workprec(300):
        T = mp.mpf(1)

        def fpp(s):
            return mp.fsum(c * kernel_value(k, s, T)
                           for c, k in zip(sig.coefficients, sig.kernels))

        for kernel, target, label in zip(system.kernels, system.targets,
                                         system.labels):
            q = mp.quad(lambda s: fpp(s) * kernel_value(kernel, s, T), [0, T])
            assert abs(q - target) < mp.mpf(10) ** -25, label


def test_overdamped_rows_and_collision_merge():
    # r = 2: slow family n^2/2 meets fast family 2 m^2 at (2,1) and (4,2);
    # with data away from the colliding modes the merged rows agree at zero
    cfg = dirichlet_config(Fraction(5, 2), 4)
    st = ModalState.dirichlet(values=(0, 0, 1, 0), velocities=(0, 0, 0, 0))
    system = assemble(cfg, st)
    assert len(system.collisions) == 2
    assert system.n_rows == 2 + 8 - 2
    merged = [lab for lab in system.labels if "+" in lab]
    assert len(merged) == 2
    assert any("mode2" in lab and "mode1" in lab for lab in merged)


def test_collision_with_incompatible_targets_raises():
    cfg = dirichlet_config(Fraction(5, 2), 2)
    st = ModalState.dirichlet(values=(0.4, -0.7), velocities=(0.1, 0))
    with pytest.raises(ResonanceDefect) as info:
        assemble(cfg, st)
    err = info.value
    assert err.defect > 0
    assert err.data_norm > 0
    assert err.pair == (1, 2)


def test_neumann_even_mode_screening():
    cfg = BeamConfig(Boundary.NEUMANN, Fraction(1), 4, Fraction(1))
    st = ModalState.neumann(values=(0, 0, 0.3, 0, 0), velocities=(0,) * 5)
    with pytest.raises(UncontrollableMode) as info:
        assemble(cfg, st)
    assert info.value.mode == 2


def test_neumann_zero_mode_screening_and_residuals():
    cfg = BeamConfig(Boundary.NEUMANN, Fraction(1), 2, Fraction(1))
    st = ModalState.neumann(values=(0.7, 0, 0), velocities=(0.2, 0, 0))
    with pytest.raises(UncontrollableMode) as info:
        assemble(cfg, st)
    assert info.value.mode == 0
    r0, r1 = neumann_admissibility(st)
    # mean of the eigenfunction expansion: integral = sqrt(pi) * coefficient
    with mp.workprec(300):
        assert abs(r0 - 0.7 * mp.sqrt(mp.pi)) < 1e-12
        assert abs(r1 - 0.2 * mp.sqrt(mp.pi)) < 1e-12


def test_neumann_odd_data_assembles():
    cfg = BeamConfig(Boundary.NEUMANN, Fraction(1), 3, Fraction(1))
    st = ModalState.neumann(values=(0, 1, 0, 0.2), velocities=(0, 0, 0, 0))
    system = assemble(cfg, st)
    # even mode is invisible to the boundary trace and must be dropped
    assert 2 in system.dropped_modes
    assert all(2 not in modes for modes in system.row_modes)


def test_json_round_trip_preserves_targets():
    cfg = dirichlet_config(1, 2)
    st = ModalState.dirichlet(values=(1, 0), velocities=(0, 0.5))
    system = assemble(cfg, st)
    doc = system.to_json_dict()
    back = MomentSystem.from_json_dict(doc)
    assert back.labels == system.labels
    assert back.n_rows == system.n_rows
    with mp.workprec(300):
        for a, b in zip(back.targets, system.targets):
            assert abs(a - b) <= abs(b) * mp.mpf(2) ** -250 + mp.mpf(2) ** -250


def test_with_precision_rebuilds_consistently():
    cfg = dirichlet_config(1, 2, bits=128)
    st = ModalState.dirichlet(values=(1, 0), velocities=(0, 0.5))
    system = assemble(cfg, st)
    lifted = system.with_precision(512)
    assert lifted.config.precision_bits == 512
    assert lifted.labels == system.labels
    with mp.workprec(140):
        for a, b in zip(lifted.targets, system.targets):
            assert abs(a - b) <= max(abs(b), mp.mpf(1)) * mp.mpf(2) ** -120


def test_data_l2_norm():
    st = ModalState.dirichlet(values=(3, 0), velocities=(0, 4))
    assert abs(data_l2_norm(st) - 5.0) < 1e-13
