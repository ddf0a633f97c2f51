"""Oracle computation over a small combinatory algebra.

Submodules: ``kernel`` (terms, coding, evaluation), ``oracle_machine``
(nondeterministic runs against finite oracles), ``constructions``,
``finite_degrees``, ``omega``, ``realizability``, ``order_pca`` and ``cli``.
"""

__version__ = "0.1.0"
