from typing import Dict, List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class GridFunctionPair(BaseModel):
    """(u, v) and u' sampled on a uniform grid of [0, rho]."""

    model_config = ConfigDict(frozen=True)

    rho: float = Field(gt=0)
    nodes: List[float]
    u_vals: List[float]
    v_vals: List[float]
    u_prime_vals: List[float]
    v_prime_vals: List[float] = []
    iterations: int = 0

    @model_validator(mode="after")
    def _check_shape(self):
        n = len(self.nodes)
        if n < 2 or any(len(vals) != n for vals in (self.u_vals, self.v_vals, self.u_prime_vals)):
            raise ValueError("nodes, u_vals, v_vals and u_prime_vals need one entry per node (>= 2)")
        if self.v_prime_vals and len(self.v_prime_vals) != n:
            raise ValueError("v_prime_vals needs one entry per node")
        if self.u_prime_vals[0] != 0:
            raise ValueError(f"u'(0) = 0 required, got {self.u_prime_vals[0]}")

        # u(0) = a and v(0) = b; both stay at or above their center values
        a, b = self.u_vals[0], self.v_vals[0]
        if not (a > 0 and b > 0):
            raise ValueError(f"positive center values required, got a={a}, b={b}")
        if min(self.u_vals) < a or min(self.v_vals) < b:
            raise ValueError(f"u_vals >= a and v_vals >= b required (a={a}, b={b})")
        if min(self.u_prime_vals) < 0:
            raise ValueError("u_prime_vals must be nonnegative")
        return self

    @classmethod
    def constant(cls, rho: float, n_nodes: int, a: float, b: float) -> "GridFunctionPair":
        nodes = np.linspace(0.0, rho, n_nodes)
        return cls(
            rho=rho,
            nodes=nodes.tolist(),
            u_vals=[a] * n_nodes,
            v_vals=[b] * n_nodes,
            u_prime_vals=[0.0] * n_nodes,
            v_prime_vals=[0.0] * n_nodes,
        )

    def arrays(self) -> Dict[str, np.ndarray]:
        return {
            "r": np.asarray(self.nodes),
            "u": np.asarray(self.u_vals),
            "v": np.asarray(self.v_vals),
            "uprime": np.asarray(self.u_prime_vals),
            "vprime": np.asarray(self.v_prime_vals or [0.0] * len(self.nodes)),
        }


class PicardComparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    rho: float
    n_nodes: int
    iterations: int
    n_compared: int
    sup_u: float
    sup_v: float
    sup_uprime: float
    tol: float
    agrees: bool
