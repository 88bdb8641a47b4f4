"""Symbolic and numeric renormalization-group engine for hierarchical
fermionic models (hierarchical honeycomb bilayer and hierarchical
spin-impurity models).
"""

__version__ = "0.1.0"
