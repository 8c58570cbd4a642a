"""Physical constants (SI, CODATA 2018 via scipy)."""

import scipy.constants as _sc

mu_B = _sc.physical_constants["Bohr magneton"][0]  # J/T
k_B = _sc.k                                        # J/K (exact)
mu_0 = _sc.mu_0                                    # T*m/A
epsilon_0 = _sc.epsilon_0                          # F/m

# Coulomb prefactor 1/(4 pi eps0)
k_e = 1.0 / (4.0 * _sc.pi * epsilon_0)

GAUSS = 1e-4      # T per gauss, exact by definition
