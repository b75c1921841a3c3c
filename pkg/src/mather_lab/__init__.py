"""Numerical experiments on the regularity of Mather measures for Mane Lagrangians.

Subpackages and modules:

``diophantine``  continued fractions, Diophantine checks, simultaneous approximation
``measures``     torus geometry and measures (discrete, gridded, closed geodesics)
``fourier``      band-limited Fourier series on the torus
``flows``        vector fields, Mane action, RK4 integration, Poincare maps
``transport``    W1 by exact LP, Sinkhorn, dual potentials and closed forms
``ergodic``      Birkhoff averages and their decay rates
``linres``       perturbative linear response of the rotation measure
``lab``          experiment drivers, reports and the command-line interface
"""

__version__ = "0.1.0"
