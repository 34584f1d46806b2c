"""
Numerical core of plsga: PLS fitting, the mutation distribution, keyed random streams,
parallel execution and the run configuration.
"""
