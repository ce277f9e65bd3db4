"""Numerical laboratory for quantum correlations under local operations.

Subpackages map onto the experiment families:

* :mod:`qcorrlab.qstate` -- dense multi-subsystem states
* :mod:`qcorrlab.infomeasures` -- Shannon / von Neumann entropy functionals
* :mod:`qcorrlab.channels` -- Kraus channels and the monotonicity harness
* :mod:`qcorrlab.cavityfeedback` -- Jaynes-Cummings feedback protocol
* :mod:`qcorrlab.qecc` -- error-correcting-code condition checker
* :mod:`qcorrlab.localec` -- local error correction of two entangled cavities
"""

__version__ = "0.1.0"
