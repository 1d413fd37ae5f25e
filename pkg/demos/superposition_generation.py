"""Macroscopic-superposition generation in the spin ensemble.

Starting from the coherent state |+x>, the nonlinear ensemble-bath coupling
rotates the state through a superposition (|+x> + i |-x>)/sqrt(2) at
tau_MQS (the root of t f(t) = pi/2) and on to |-x> at 2 tau_MQS.  The
witness is the quadruple of overlaps |Theta_{+-+-}|; boson-bath decoherence
reduces them from the ideal 0.5 to about 0.2.
"""

import numpy as np

from dualbath import BathParams, SystemParams
from dualbath.spinbath import mqs_reference, run_mqs, tau_mqs, theta_pm


def main():
    system = SystemParams(eps=1.0, J=0.1, alpha=0.0, gamma=0.0, N=10)
    bath = BathParams(kappa1=0.0, kappa2=0.0, kappa3=0.5, omega_c=1.0,
                      beta=100.0)
    tau = tau_mqs(bath)
    print(f"superposition formation time tau_MQS = {tau:.4f}\n")

    traj = run_mqs(system, bath, t_max=2.0 * tau, dt=0.005)
    print(f"{'t/tau':>6} | {'|T++|':>7} {'|T+-|':>7} {'|T--|':>7} | "
          f"{'|T++| ref':>9} {'|T--| ref':>9}")
    print("-" * 56)
    for frac in (0.5, 1.0, 1.5, 2.0):
        i = min(int(round(frac * tau / traj.dt)), len(traj.t) - 1)
        ref = mqs_reference(traj.t[i], 10, bath)
        rpp = abs(theta_pm(ref, +1, +1, 10))
        rmm = abs(theta_pm(ref, -1, -1, 10))
        print(f"{frac:6.1f} | {abs(traj.theta_pp[i]):7.3f} "
              f"{abs(traj.theta_pm[i]):7.3f} {abs(traj.theta_mm[i]):7.3f} | "
              f"{rpp:9.3f} {rmm:9.3f}")
    print("\nThe decoherence-free reference keeps |T| = 0.5 at tau; the")
    print("boson bath brings the realized witness down to about 0.2 while")
    print("leaving the formation time untouched.")
    print(f"(hermiticity defect over the run: {traj.hermiticity_defect:.1e}, "
          f"max trace drift: {np.max(np.abs(traj.trace - 1.0)):.1e})")


if __name__ == "__main__":
    main()
