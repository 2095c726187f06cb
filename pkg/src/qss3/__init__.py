"""qss3: simulation and experiment harness for a (3,3) threshold quantum
secret sharing scheme built on the five-qubit error-correcting code.

The package splits into a small dense-simulation core (qcore, gates,
channels), the code layer (code5), the protocol layer (qss), finite-shot
statistics (shots), and a report-producing command line (cli).
"""

__version__ = "0.1.0"

from . import channels, code5, gates, qcore, qss, shots  # noqa: F401
from .qcore import (  # noqa: F401
    DensityMatrix,
    Ensemble,
    Operator,
    PureState,
    fidelity,
    partial_trace,
    tensor,
    trace_distance,
)
from .qss import Secret, encode_secret, recover, share_entangled  # noqa: F401
