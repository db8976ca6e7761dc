"""Resolvent theory: fixed-point solver, outliers and closed-form oracles."""
