"""Closed-form time averages and equidistribution experiments for quantum walks."""

__version__ = "0.1.0"
