"""Discrimination of bosonic dephasing channels at finite Fock truncation."""

__version__ = "0.1.0"
