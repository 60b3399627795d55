"""Schedule synthesis for classical matrix multiplication on modeled machines.

Subpackages by theme: finite groups (:mod:`symsched.groups`), group actions
(:mod:`symsched.actions`), equivariant-map solving (:mod:`symsched.equivariant`),
machine topology models (:mod:`symsched.machines`), the matmul instance with
preset schedule constructors (:mod:`symsched.matmul`), the discrete-time
verifier (:mod:`symsched.simulate`), schedule search (:mod:`symsched.search`)
and the command line front end (:mod:`symsched.cli`).
"""

__version__ = "0.1.0"
