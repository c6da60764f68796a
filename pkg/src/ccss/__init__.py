"""Process-calculus toolkit with signal emission: terms, semantics, state spaces,
bisimulation checking, justness analysis and liveness verification
of mutual-exclusion protocols."""

__version__ = "0.1.0"
