"""Contestable essay feedback engine.

Essays are reviewed per rubric dimension by biased discussion agents, the
resulting claims and attacks are resolved with complete-extension semantics,
and students can challenge the outcome, feeding their own arguments back
into the same formal reasoning.
"""

__version__ = "0.1.0"
