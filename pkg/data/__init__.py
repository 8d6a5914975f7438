"""
Tracefill - Data Package

Synthetic gathers for tests and benchmarks.
"""
