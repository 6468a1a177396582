"""Exponent validation, closed-form constants and the regime classifier."""
from collections.abc import Mapping, Sequence
from typing import Tuple, Union

import numpy as np

from app.core.exceptions import DeltaZero, DomainViolation, NearDegenerate
from app.models.enums import RegimeTag
from app.schemas.params import DerivedConstants, Regime, SystemParams

CLASSIFY_TOL = 1e-12
SIGMA_FLAG_TOL = 1e-9
_ZERO_ULPS = 64 * np.finfo(float).eps

PARAM_KEYS = ("N", "p", "m", "q", "alpha", "beta")

RawParams = Union[Mapping, Sequence, SystemParams]


def _as_mapping(raw: RawParams) -> dict:
    if isinstance(raw, SystemParams):
        return raw.model_dump()
    if isinstance(raw, Mapping):
        missing = [key for key in PARAM_KEYS if key not in raw]
        if missing:
            raise DomainViolation(f"Missing parameters: {', '.join(missing)}")
        return {key: raw[key] for key in PARAM_KEYS}
    values = list(raw)
    if len(values) != len(PARAM_KEYS):
        raise DomainViolation(
            f"Expected 6 values (N, p, m, q, alpha, beta), got {len(values)}"
        )
    return dict(zip(PARAM_KEYS, values))


def _band(*terms: float) -> float:
    return CLASSIFY_TOL * max(1.0, *(abs(t) for t in terms))


# ---------------------------------------------------------------------
# VALIDATE
# ---------------------------------------------------------------------
def validate(raw: RawParams) -> SystemParams:
    data = _as_mapping(raw)

    try:
        N_float = float(data["N"])
        values = {key: float(data[key]) for key in PARAM_KEYS[1:]}
    except (TypeError, ValueError) as exc:
        raise DomainViolation(f"Parameters must be numeric: {exc}")

    if not all(np.isfinite(v) for v in (N_float, *values.values())):
        raise DomainViolation("Parameters must be finite")
    if N_float != int(N_float) or N_float < 2:
        raise DomainViolation(f"N >= 2 (integer) violated: N={data['N']}")

    p, m, q = values["p"], values["m"], values["q"]
    alpha, beta = values["alpha"], values["beta"]

    if not p > 1:
        raise DomainViolation(f"p > 1 violated: p={p}")
    if not m > 0:
        raise DomainViolation(f"m > 0 violated: m={m}")
    if not q > 0:
        raise DomainViolation(f"q > 0 violated: q={q}")
    if not alpha >= 0:
        raise DomainViolation(f"alpha >= 0 violated: alpha={alpha}")
    if not beta >= 0:
        raise DomainViolation(f"0 <= beta violated: beta={beta}")
    if not beta <= m:
        raise DomainViolation(f"beta <= m violated: beta={beta} > m={m}")

    lead = (p - 1 - alpha) * (p - 1 - beta)
    delta = lead - q * m
    scale = max(1.0, abs(lead), abs(q * m))
    if delta == 0 or abs(delta) <= _ZERO_ULPS * scale:
        raise DeltaZero(
            f"(p-1-alpha)(p-1-beta) - qm = 0 (delta = {lead:.6g} - {q * m:.6g})"
        )
    if abs(delta) <= CLASSIFY_TOL * scale:
        raise NearDegenerate(f"|delta| = {abs(delta):.3e} lies inside the tolerance band")

    return SystemParams(N=int(N_float), **values)


# ---------------------------------------------------------------------
# CLOSED FORMS
# ---------------------------------------------------------------------
def sigma_of(params: SystemParams) -> float:
    k = params.k
    return (params.m / k) * (params.q + params.p * k) / (
        params.m * params.p + params.p - 1 - params.beta
    )


def derive(params: SystemParams) -> DerivedConstants:
    p, m, q, beta = params.p, params.m, params.q, params.beta
    k = params.k
    delta = params.delta

    gamma = (params.N - 1) * k / (p - 1)
    nu_u = 1 + (p * (m + 1) - (1 + beta)) / delta
    nu_v = (p * k + q) / delta

    sigma = None
    rate = None
    near = False
    if not params.alpha_degenerate:
        sigma = sigma_of(params)
        near = abs(sigma - 1) < SIGMA_FLAG_TOL
        if sigma > 1:
            rate = -1.0 / ((sigma - 1) * k)

    return DerivedConstants(
        delta=delta,
        gamma=gamma,
        sigma=sigma,
        nu_u=nu_u,
        nu_v=nu_v,
        blowup_rate_uprime=rate,
        regime=classify(params).tag,
        degenerate=params.alpha_degenerate,
        near_degenerate_sigma=near,
    )


# ---------------------------------------------------------------------
# CLASSIFY
# ---------------------------------------------------------------------
def _regime_by_mq(params: SystemParams) -> RegimeTag:
    p, m, q, alpha, beta = params.p, params.m, params.q, params.alpha, params.beta
    mq = m * q
    bounded_edge = (p - 1 - alpha) * (p - 1 - beta)
    u_finite_edge = m * p + (p - alpha) * (p - 1 - beta)

    if abs(bounded_edge - mq) <= _band(mq, bounded_edge):
        raise NearDegenerate("mq lies inside the band around (p-1-alpha)(p-1-beta)")
    if mq < bounded_edge:
        return RegimeTag.ALL_BOUNDED_GLOBAL
    # delta = 0 is refused above; the band around the u-finite edge resolves
    # to BothBlowup, as equality does
    if mq - u_finite_edge > _band(mq, u_finite_edge):
        return RegimeTag.U_FINITE_V_BLOWUP
    return RegimeTag.BOTH_BLOWUP


def _regime_by_sigma(params: SystemParams) -> RegimeTag:
    sigma = sigma_of(params)
    k = params.k
    edge = (params.p - params.alpha) / k
    if abs(1 - sigma) <= _band(sigma):
        raise NearDegenerate(f"sigma = {sigma!r} lies inside the band around 1")
    if sigma < 1:
        return RegimeTag.ALL_BOUNDED_GLOBAL
    # the band around the u-finite edge resolves to BothBlowup, as equality does
    if sigma - edge > _band(sigma, edge):
        return RegimeTag.U_FINITE_V_BLOWUP
    return RegimeTag.BOTH_BLOWUP


def regime_forms(params: SystemParams) -> Tuple[RegimeTag, RegimeTag]:
    """Regime by the mq inequalities and by sigma, in that order."""
    return _regime_by_mq(params), _regime_by_sigma(params)


def classify(params: SystemParams) -> Regime:
    if params.delta == 0:
        return Regime(tag=RegimeTag.INVALID_DELTA, global_exists=False)
    if params.alpha_degenerate:
        return Regime(tag=RegimeTag.NO_NONCONSTANT, global_exists=False)

    by_mq, by_sigma = regime_forms(params)
    if by_mq != by_sigma:
        raise NearDegenerate(
            f"mq-form ({by_mq.value}) and sigma-form ({by_sigma.value}) disagree"
        )

    return Regime(tag=by_mq, global_exists=by_mq == RegimeTag.ALL_BOUNDED_GLOBAL)


# ---------------------------------------------------------------------
# EXISTENCE / BOUNDARY READOUTS
# ---------------------------------------------------------------------
def global_existence_condition(params: SystemParams) -> bool:
    return (
        not params.alpha_degenerate
        and params.m * params.q < params.k * (params.p - 1 - params.beta)
    )


def boundary_behavior(params: SystemParams) -> Tuple[bool, bool]:
    """(u blows up, v blows up) at the boundary of a ball."""
    tag = classify(params).tag
    if tag == RegimeTag.U_FINITE_V_BLOWUP:
        return False, True
    if tag == RegimeTag.BOTH_BLOWUP:
        return True, True
    return False, False


def near_boundary_exponents(params: SystemParams) -> Tuple[float, float]:
    """Leading exponents a_v, c_z with v ~ (R-r)^-a_v, z ~ (R-r)^-c_z."""
    delta = params.delta
    if params.alpha_degenerate or delta >= 0:
        raise DomainViolation("Blow-up exponents need alpha < p-1 and delta < 0")
    k = params.k
    a_v = -(params.p * k + params.q) / delta
    c_z = -k * (params.m * params.p + params.p - 1 - params.beta) / delta
    return a_v, c_z
