"""greedyproc: random greedy AP-free and semi-random triangle-free process
simulators, with van der Waerden / g(n, d) witness constructions and
differential-equation-method runtime monitors."""

__version__ = "0.1.0"
