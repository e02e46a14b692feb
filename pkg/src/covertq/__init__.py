"""covertq: numerical toolkit for covert classical/quantum communication.

Dense-matrix primitives, quantum divergences, covert capacity formulas, a
seeded Monte-Carlo covert codebook simulator, and an exact toy-scale
entanglement-generation protocol.
"""

__version__ = "0.1.0"
