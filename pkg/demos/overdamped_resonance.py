"""Why rationality of the branch ratio decides controllability.

Past critical damping every mode splits into a slow and a fast pure
decay.  At rho = 5/2 the ratio of the two families is exactly 2, so mode
2's slow rate coincides with mode 1's fast rate: one exponential kernel
must then serve two constraints at once, and generic data asks it for
two different values.  At rho = 3 the ratio is irrational, the families
stay disjoint, and the same data poses no problem.
"""
from fractions import Fraction

from beamctl.errors import ResonanceDefect
from beamctl.modal_dynamics import ModalState
from beamctl.moment_problem import assemble
from beamctl.spectrum import BeamConfig, Boundary
from beamctl.verification import null_control_experiment

state = ModalState.dirichlet(values=(1, "0.5", 0), velocities=(0, "0.2", 0))


def attempt(rho):
    config = BeamConfig(Boundary.DIRICHLET, Fraction(rho), 3, Fraction(1),
                        precision_bits=192)
    try:
        report = null_control_experiment(config, state, tolerance=1e-6)
    except ResonanceDefect as exc:
        print(f"rho = {rho}: REFUSED")
        print(f"  collided modes {exc.pair} share the decay rate {exc.rate}")
        print(f"  constraint mismatch {exc.defect:.4f} "
              f"on data of size {exc.data_norm:.4f}")
        return
    print(f"rho = {rho}: controlled, final/initial = "
          f"{report.final_norm / report.initial_norm:.2e}, "
          f"cost {report.synthesis.cost:.1f}")


attempt("2.5")
print()
attempt("3")

# the collision is a property of the data, not only of the ratio: data
# away from the collided pair remains controllable even at rho = 5/2
print()
clean = ModalState.dirichlet(values=(0, 0, 1), velocities=(0, 0, 0))
config = BeamConfig(Boundary.DIRICHLET, Fraction(5, 2), 3, Fraction(1),
                    precision_bits=192)
report = null_control_experiment(config, clean, tolerance=1e-6)
print(f"rho = 2.5 with data on mode 3 only: {report.verdict.value}, "
      f"final/initial = {report.final_norm / report.initial_norm:.2e}")

# and even data on colliding modes passes when the two targets happen to
# be compatible, which is what the screening actually tests
print()
try:
    assemble(config, ModalState.dirichlet(values=(1, "0.5", 0),
                                          velocities=(0, 0, 0)))
    print("compatible-by-luck data was accepted")
except ResonanceDefect as exc:
    print(f"defect {exc.defect:.3e} for displacement-only data: "
          "still incompatible")
