from enum import Enum


class RegimeTag(str, Enum):
    INVALID_DELTA = "InvalidDelta"
    NO_NONCONSTANT = "NoNonconstantSolutions"
    ALL_BOUNDED_GLOBAL = "AllBoundedGlobal"
    U_FINITE_V_BLOWUP = "UFiniteVBlowup"
    BOTH_BLOWUP = "BothBlowup"


class StopReason(str, Enum):
    REACHED_R_MAX = "ReachedRMax"
    BLOW_UP = "BlowUp"
    STEP_UNDERFLOW = "StepUnderflow"
    MONITOR_VIOLATION = "MonitorViolation"


class FlowStatus(str, Enum):
    CONVERGED = "Converged"
    NON_CONVERGENT = "NonConvergent"
    DIVERGENT = "Divergent"


class MonitorName(str, Enum):
    L01 = "l01"
    L02 = "l02"
    L1 = "l1"
    L2 = "l2"
    MONOTONE = "monotone"


class MonitorPolicy(str, Enum):
    RAISE = "raise"
    STOP = "stop"
    CONTINUE = "continue"
