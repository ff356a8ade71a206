"""Numerical toolkit for quantum mutual independence and entanglement-assisted distributed compression."""
