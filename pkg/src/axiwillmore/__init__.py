"""Willmore minimizers of axisymmetric spheres with prescribed isoperimetric ratio."""
