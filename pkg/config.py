"""
Sullam Configuration
====================
Numerical defaults and environment overrides in one place.

Every tolerance and sampling rule used by the simulator lives here so a run
can be retuned from a .env file without touching an experiment file:
- Integrator and steady-state tolerances
- Fock-space oracle limits
- Probe sampling rules
- Extraction solver thresholds
- Export schema version
"""

import os
from dotenv import load_dotenv

# Load .env file if present
load_dotenv()


def _float(name: str, default: float) -> float:
    return float(os.environ.get(name, default))


def _int(name: str, default: int) -> int:
    return int(os.environ.get(name, default))


class Config:
    """Simulator configuration"""

    # =========================================================================
    # LOGGING / OUTPUT
    # =========================================================================
    LOG_LEVEL = os.environ.get('SULLAM_LOG_LEVEL', 'INFO').upper()
    OUT_DIR = os.environ.get('SULLAM_OUT_DIR', 'out')
    DEFAULT_SEED = _int('SULLAM_SEED', 20240501)
    SCHEMA_VERSION = "1.0"

    PRESET_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'presets')
    DEFAULT_PRESETS = ['table1_system', 'table2_probe']

    # =========================================================================
    # CIRCUIT
    # =========================================================================
    # f_n denominator: "derived" = 2(N+1), "odd" = 2N+1 ("paper" is an alias of "odd")
    FN_DENOMINATORS = ('derived', 'odd', 'paper')
    FN_DENOMINATOR = os.environ.get('SULLAM_FN_DENOMINATOR', 'derived')
    ORTHONORMALITY_TOL = 1e-10
    # g/ħ and κ must sit at least this far below ω0 for the rate picture to hold
    HIERARCHY_RATIO = _float('SULLAM_HIERARCHY_RATIO', 0.1)

    # =========================================================================
    # DYNAMICS
    # =========================================================================
    RTOL = _float('SULLAM_RTOL', 1e-8)
    ATOL = _float('SULLAM_ATOL', 1e-12)
    INTEGRATOR = os.environ.get('SULLAM_INTEGRATOR', 'DOP853')
    TRAJECTORY_SAMPLES = _int('SULLAM_TRAJECTORY_SAMPLES', 2001)

    STEADY_STATE_KAPPA_TIMES = _float('SULLAM_STEADY_KAPPA_TIMES', 20.0)
    STEADY_STATE_MAX_KAPPA_TIMES = _float('SULLAM_STEADY_MAX_KAPPA_TIMES', 640.0)
    STEADY_STATE_TOL = _float('SULLAM_STEADY_TOL', 1e-8)
    NEWTON_MAX_ITER = _int('SULLAM_NEWTON_MAX_ITER', 50)
    RELAXATION_FRACTION = 0.05

    # =========================================================================
    # STATES / ORACLE
    # =========================================================================
    ORACLE_TRUNCATION = _int('SULLAM_ORACLE_TRUNCATION', 40)
    ORACLE_MAX_MODES = 3
    ORACLE_OVERFLOW = _float('SULLAM_ORACLE_OVERFLOW', 1e-10)

    # =========================================================================
    # PROBE
    # =========================================================================
    SAMPLES_PER_PERIOD = _int('SULLAM_SAMPLES_PER_PERIOD', 64)
    DURATION_KAPPA_FACTOR = _float('SULLAM_DURATION_KAPPA_FACTOR', 50.0)
    MIN_SAMPLES_PER_INPUT_PERIOD = 20
    BETA_WARN = 0.5
    BETA_LIMIT = 1.0
    POLE_TOL = _float('SULLAM_POLE_TOL', 1e-9)
    # Z_P must exceed Z0 by this factor to count as "large"
    IMPEDANCE_RATIO = 2.0
    # smallest readout current considered measurable (A)
    MEASURABLE_CURRENT = _float('SULLAM_MEASURABLE_CURRENT', 1e-12)
    SPECTRAL_CONTENT_FLOOR = 1e-10

    # =========================================================================
    # EXTRACTION
    # =========================================================================
    DEGENERACY_TOL_FRACTION = _float('SULLAM_DEGENERACY_TOL', 0.01)
    SVD_RTOL = _float('SULLAM_SVD_RTOL', 1e-10)
    GAMMA_FLOOR = _float('SULLAM_GAMMA_FLOOR', 1e-6)
    PLAN_SLACK = _int('SULLAM_PLAN_SLACK', 2)
    MIN_RECORD_PERIODS = 10

    @staticmethod
    def preset_path(name: str) -> str:
        """Path of a shipped preset, with or without the .toml suffix"""
        if not name.endswith('.toml'):
            name = f"{name}.toml"
        return os.path.join(Config.PRESET_DIR, name)

    @staticmethod
    def degeneracy_tolerance(omega0: float) -> float:
        """Frequency binning width for degeneracy groups (rad/s)"""
        return Config.DEGENERACY_TOL_FRACTION * omega0

    @classmethod
    def validate(cls):
        """Check the environment overrides for values the solvers cannot use"""
        problems = []
        if cls.LOG_LEVEL not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            problems.append(f"SULLAM_LOG_LEVEL={cls.LOG_LEVEL}")
        if cls.FN_DENOMINATOR not in cls.FN_DENOMINATORS:
            problems.append(f"SULLAM_FN_DENOMINATOR={cls.FN_DENOMINATOR}")
        if not 0 < cls.RTOL < 1:
            problems.append(f"SULLAM_RTOL={cls.RTOL}")
        if cls.ATOL <= 0:
            problems.append(f"SULLAM_ATOL={cls.ATOL}")
        if cls.STEADY_STATE_MAX_KAPPA_TIMES < cls.STEADY_STATE_KAPPA_TIMES:
            problems.append("SULLAM_STEADY_MAX_KAPPA_TIMES below SULLAM_STEADY_KAPPA_TIMES")
        if cls.ORACLE_TRUNCATION < 2:
            problems.append(f"SULLAM_ORACLE_TRUNCATION={cls.ORACLE_TRUNCATION}")
        if cls.SAMPLES_PER_PERIOD < cls.MIN_SAMPLES_PER_INPUT_PERIOD:
            problems.append(f"SULLAM_SAMPLES_PER_PERIOD={cls.SAMPLES_PER_PERIOD}")
        if cls.PLAN_SLACK < 0:
            problems.append(f"SULLAM_PLAN_SLACK={cls.PLAN_SLACK}")
        return problems
