"""radperc: operator spreading and information dynamics in radiative random circuits.

Subpackage map:

* ``pauli``      -- bit-packed Pauli strings and their GF(2) algebra
* ``clifford``   -- random two-qubit Clifford gates, brick-wall layers, swap-out
* ``dp``         -- the equivalent stochastic particle process for general qudit dimension
* ``stabilizer`` -- generator-set evolution, entropies, coherent information, decoding fidelity
* ``observables``-- ensemble accumulation (density, survival, spreading, OTOC, front)
* ``analysis``   -- mean-field closed forms, power-law fits, critical-point estimation, collapses
* ``oracle``     -- exact small-instance references (Markov chain, dense matrices, full tableau)
* ``runner``     -- experiment orchestration and CSV serialization (CLI: ``radperc``)
"""

__version__ = "0.1.0"
