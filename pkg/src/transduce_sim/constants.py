"""Physical constants and shared conventions.

Values are the exact or CODATA 2018 figures as shipped by :mod:`scipy.constants`.

Conventions used throughout the package:

* Rates (couplings, linewidths, detunings) are ordinary frequencies in Hz and
  enter the coupled-mode formulas without any factor of 2*pi.
* Absolute frequencies (cavity, pump) are also given in Hz. Formulas that need
  a photon energy use ``hbar * 2*pi * f``.
* Input-output relation: ``out = in - sqrt(kappa_ex) * <mode>``, with the drive
  entering the equations of motion as ``+ sqrt(kappa_ex) * in``.
"""

from scipy import constants as _c

HBAR = _c.hbar  # 1.054571817e-34 J s
PLANCK = _c.h  # 6.62607015e-34 J s
K_B = _c.k  # 1.380649e-23 J/K
EPSILON_0 = _c.epsilon_0  # 8.8541878128e-12 F/m
MU_0 = _c.mu_0  # 1.25663706212e-6 N/A^2
E_CHARGE = _c.e  # 1.602176634e-19 C
TWO_PI = 2.0 * _c.pi

CONSTANTS_TABLE = {
    "hbar": HBAR,
    "h": PLANCK,
    "k_B": K_B,
    "epsilon_0": EPSILON_0,
    "mu_0": MU_0,
    "e": E_CHARGE,
}
