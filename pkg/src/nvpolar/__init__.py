"""Polarization-enhanced ODMR magnetometry with NV-center ensembles."""
