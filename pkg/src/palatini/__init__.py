"""Numeric verification engine for the multisymplectic Einstein-Palatini system."""
