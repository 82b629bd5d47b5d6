"""Workbench for adaptive reprogramming of quantum-accessible random oracles.

Modules:

* ``qsim``       dense statevector engine (oracle queries, permutations,
                 structured projective measurements)
* ``oracle``     classical oracle tables and the programmable overlay
* ``purified``   superposition-oracle realization at tiny sizes
* ``reprogame``  the reprogramming distinguishing games
* ``attack``     the matching single-point distinguisher
* ``sigcore``    identification schemes, simulators, signature transforms
* ``faultlab``   fault-injection games, simulations, reductions
* ``bounds``     closed-form concrete-security bound evaluators
* ``cli``        reproducible experiments with CSV + figure output
"""

__version__ = "0.1.0"
