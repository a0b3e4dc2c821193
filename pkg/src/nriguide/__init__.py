"""Spontaneous emission of a V-type atom inside a three-layer negative-index waveguide.

Modules: :mod:`materials` (layer response), :mod:`em_core` (Fresnel kernel),
:mod:`modes` (guided and surface roots), :mod:`green` (k-space integration),
:mod:`rates` (Gamma and kappa), :mod:`dynamics` (master equation) and
:mod:`cli`.
"""

__version__ = "0.1.0"
