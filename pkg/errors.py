"""
Sullam Errors
=============
Exception hierarchy. Each family carries the CLI exit code it maps to:

    0  success
    1  usage / config error
    2  convergence failure (integrator, Newton, oracle truncation, rank deficiency)
    3  regime violation (probe outside its small-signal design regime)
"""


class SullamError(Exception):
    """Base class for all simulator errors"""
    exit_code = 1

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details


# -----------------------------------------------------------------------------
# Config / usage
# -----------------------------------------------------------------------------

class ConfigError(SullamError, ValueError):
    """Invalid input parameters or experiment file"""
    exit_code = 1


class SamplingError(ConfigError):
    """Time series sampled too coarsely for its frequency content"""


# -----------------------------------------------------------------------------
# Convergence
# -----------------------------------------------------------------------------

class ConvergenceError(SullamError):
    """A numerical procedure did not reach its tolerance"""
    exit_code = 2


class StiffnessError(ConvergenceError):
    """Adaptive step size underflowed"""

    def __init__(self, message: str, time: float, **details):
        super().__init__(message, time=time, **details)
        self.time = time


class TruncationOverflowError(ConvergenceError):
    """Fock-space truncation too small for the requested state"""


class RankDeficiencyError(ConvergenceError):
    """One or more degeneracy groups could not be solved to full rank"""

    def __init__(self, message: str, groups: list = None, result=None, **details):
        super().__init__(message, **details)
        self.groups = groups or []
        self.result = result


# -----------------------------------------------------------------------------
# Regime
# -----------------------------------------------------------------------------

class RegimeError(SullamError):
    """Probe driven outside its small-signal regime"""
    exit_code = 3


class PoleProximityError(RegimeError):
    """Coupler evaluated at (or too close to) its resonance"""
