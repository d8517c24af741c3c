"""Pydantic request/response models for the compute service.

Complex scalars travel as [re, im] pairs; unknown keys are rejected
everywhere (schema violations are config errors, exit code 2 at the CLI).
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

ComplexPair = tuple[float, float]


def to_complex(v):
    if isinstance(v, (int, float)):
        return complex(v)
    return complex(v[0], v[1])


def pair(z):
    z = complex(z)
    return (z.real, z.imag)


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DiscriminantSpec(StrictModel):
    """Laboratory input: P = eps * prod (x - zeros_i)."""

    zeros: list[float] = Field(min_length=4, max_length=4)
    eps: float = 1.0
    u: float
    v: float
    sign_u: int = 1
    sign_v: int = 1
    shift: float = 0.0


class CurveSpec(StrictModel):
    """Either a raw coefficient grid or a discriminant construction."""

    c: Optional[list[list[ComplexPair]]] = None
    discriminant: Optional[DiscriminantSpec] = None


class WalkSpec(StrictModel):
    x0: float
    branch: Literal["plus", "minus"] = "plus"


class CurveRequest(StrictModel):
    curve: CurveSpec


class CurveResponse(StrictModel):
    c: list[list[ComplexPair]]
    P: list[ComplexPair]
    Q: list[ComplexPair]
    identity_residual: float


class LatticeRequest(StrictModel):
    curve: CurveSpec
    walk: WalkSpec
    lo: int = -1
    hi: int = 10


class LatticeResponse(StrictModel):
    n: list[int]
    x: list[ComplexPair]
    y: list[ComplexPair]


class EllipticProfileRequest(StrictModel):
    curve: CurveSpec
    walk: WalkSpec
    lo: int = -1
    hi: int = 6


class EllipticProfileResponse(StrictModel):
    lam: ComplexPair
    k: ComplexPair
    mobius: list[ComplexPair]
    h: ComplexPair
    g: ComplexPair
    K: ComplexPair
    Kprime: ComplexPair
    p: ComplexPair
    n_period: ComplexPair
    C_theta: ComplexPair


class DivdiffCheckRequest(StrictModel):
    curve: CurveSpec
    walk: WalkSpec
    walk_primed: WalkSpec
    m: int = 2
    r: int = 0
    s: int = 0


class DivdiffCheckResponse(StrictModel):
    C: ComplexPair
    C_forms: list[ComplexPair]
    spread: float
    rho: ComplexPair
    adjoint_C: ComplexPair
    adjoint_spread: float


class ExpandRequest(StrictModel):
    kind: Literal["psilog", "exp"]
    curve: CurveSpec
    walk: WalkSpec
    walk_primed: WalkSpec
    terms: int = 10
    f0: float = 0.0
    a: Optional[float] = None          # exp only; default from the walk gap
    eval_points: list[float] = Field(default_factory=lambda: [1.0, -1.75])


class ExpandResponse(StrictModel):
    n: list[int]
    x: list[ComplexPair]
    y: list[ComplexPair]
    f: list[ComplexPair]
    partial_sums: dict[str, list[ComplexPair]]
    coeffs: list[ComplexPair]


class ThieleRequest(StrictModel):
    nodes: list[float]
    values: list[float]
    depth: Optional[int] = None


class ThieleResponse(StrictModel):
    r: list[ComplexPair]
    convergents: list[dict]
    casorati_residuals: list[float]


class SqrtPRequest(StrictModel):
    zeros: list[float] = Field(min_length=4, max_length=4)
    eps: float = 1.0
    u: float
    v: float
    x0: float
    sign_u: int = -1
    sign_v: int = 1
    sign_x0: int = 1
    levels: int = 3


class SqrtPResponse(StrictModel):
    x_m: list[ComplexPair]
    delta: list[ComplexPair]
    pell: list[dict]


class RiccatiRequest(StrictModel):
    family: Literal["hermite", "freud2", "euler_exp", "discrete_exp",
                    "hahn_orth", "hahn_biorth", "psi"]
    levels: int = 8
    params: dict[str, float] = Field(default_factory=dict)


class RiccatiLevel(StrictModel):
    level: int
    A: list[ComplexPair]
    B: list[ComplexPair]
    C: list[ComplexPair]
    D: list[ComplexPair]
    r: Optional[ComplexPair]
    singularity_residuals: Optional[tuple[float, float]]


class RiccatiResponse(StrictModel):
    levels: list[RiccatiLevel]
    r: list[ComplexPair]
    oracle_max_err: Optional[float]


class BiorthRequest(StrictModel):
    points: list[ComplexPair]
    weights: list[ComplexPair]
    a_poles: list[ComplexPair]
    b_poles: list[ComplexPair]
    depth: int = 3


class BiorthResponse(StrictModel):
    A_numerators: list[list[ComplexPair]]
    B_numerators: list[list[ComplexPair]]
    orthogonality_offdiag: float


class SecondOrdRequest(StrictModel):
    curve: CurveSpec
    walk: WalkSpec
    walk_primed: WalkSpec
    nu: list[float] = Field(default_factory=list)
    mu_free_root: float = 0.0
    lam: float = 0.0
    levels: int = 6
    truncate: Optional[int] = None


class SecondOrdResponse(StrictModel):
    coeffs: list[ComplexPair]
    zetas: list[ComplexPair]
    duality_residual: float
    lam_m: Optional[ComplexPair] = None
    truncation_residual: Optional[float] = None


class PaperTablesResponse(StrictModel):
    files: dict[str, str]
    mismatches: list[list[str]]


class HealthResponse(StrictModel):
    status: str
    version: str
