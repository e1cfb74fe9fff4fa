"""Traffic-rule combination benchmark pipeline.

Composes atomic traffic rules into a five-level hierarchical rule set,
synthesizes multiple-choice driving questions with priority-based answer
arbitration, compiles scene documents into OpenSCENARIO files, and
evaluates answer-producing models with stratified accuracy reporting.
"""

__version__ = "0.1.0"
