#!/usr/bin/env python3
"""Slope actuation sees only half the spectrum, and the data knows it.

Controlling through a bending moment at one end couples to the cosine
modes through their boundary slope, which vanishes identically on the
even ones.  Two screening rules follow.  Data on an even mode is
rejected outright.  Data whose spatial mean is nonzero is rejected too,
because the mean rides the zero mode, drifts affinely in time, and no
admissible input touches it.  What remains, the odd-mode part, is fully
steerable.
"""
from fractions import Fraction

from beamctl.errors import UncontrollableMode
from beamctl.modal_dynamics import ModalState
from beamctl.moment_problem import assemble, neumann_admissibility
from beamctl.spectrum import BeamConfig, Boundary
from beamctl.verification import null_control_experiment

config = BeamConfig(Boundary.NEUMANN, Fraction(1), 3, Fraction(1),
                    precision_bits=192)

# state entries run over modes 0, 1, 2, 3
even = ModalState.neumann(values=(0, 0, 1, 0), velocities=(0, 0, 0, 0))
try:
    assemble(config, even)
except UncontrollableMode as exc:
    print(f"even-mode data: refused, {exc}")

biased = ModalState.neumann(values=("0.4", 1, 0, 0), velocities=(0, 0, 0, 0))
r_val, r_vel = neumann_admissibility(biased, 192)
print(f"\nbiased data: spatial means ({r_val:.6f}, {r_vel:.6f})")
try:
    assemble(config, biased)
except UncontrollableMode as exc:
    print(f"biased data: refused, {exc}")

odd = ModalState.neumann(values=(0, 1, 0, "0.3"), velocities=(0, 0, 0, "0.1"))
print("\nodd-mode data: synthesizing")
report = null_control_experiment(config, odd, tolerance=1e-6)
print(f"verdict {report.verdict.value}, "
      f"final/initial = {report.final_norm / report.initial_norm:.2e} "
      f"(closed form), {report.oracle_final_norm / report.initial_norm:.2e} "
      f"(integrator)")
print(f"pair norm scale: displacement {report.norm_scale}, "
      f"velocity {report.norm_scale - 2}")
print(f"mode 2 was carried along untouched: it holds no data and the "
      f"moment system drops it ({report.synthesis.system.n_rows} rows "
      f"instead of {2 + 2 * config.n_modes})")
