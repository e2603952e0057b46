"""
Exception hierarchy shared by the library, the CLI and the HTTP front end.

Every error carries the process exit code the CLI uses for it and the HTTP
status the API answers with.
"""


class WitnessLabError(Exception):
    """Base class for all witnesslab errors"""

    exit_code = 2
    http_status = 400


class DimensionError(WitnessLabError):
    """Operands act on different numbers of qubits"""


class DomainError(WitnessLabError):
    """Argument outside its admissible range"""


class RepresentationError(WitnessLabError):
    """Witness kind does not fit the system, or a form cannot be expressed"""


class CoverageError(WitnessLabError):
    """Sample records do not cover every setting a witness needs"""


class ResolutionError(WitnessLabError):
    """A state, witness or graph identifier could not be resolved"""


class CapacityError(WitnessLabError):
    """Requested system exceeds the configured dense cap"""

    exit_code = 3
    http_status = 413


class ConsistencyError(WitnessLabError):
    """Two independent computation paths disagree"""

    exit_code = 4
    http_status = 500
