"""Test package for the wave-operator integrator."""
