"""Exact and certified-numeric computations around the modular j-function.

Submodules:

* :mod:`jcover.gl2q` -- PGL2+(Q) elements, Hecke cosets, congruence subgroups
* :mod:`jcover.halfplane` -- points of the upper half plane and the Moebius action
* :mod:`jcover.jfun` -- q-expansion and evaluation of j, Weierstrass curves
* :mod:`jcover.modpoly` -- classical modular polynomials
* :mod:`jcover.hecke` -- Hecke orbits, isogeny relation, independence
* :mod:`jcover.cm` -- quadratic forms and class polynomials
* :mod:`jcover.fingal` -- PSL2/PGL2 over Z/N, cyclic subgroups, torsor labels
* :mod:`jcover.modelcheck` -- finite-level structures, types, back-and-forth
"""

__version__ = "0.1.0"
