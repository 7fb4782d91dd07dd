"""Model parameters for the two-eigenvalue complex Wishart ensemble.

The covariance has ``N - N1`` eigenvalues equal to 1 and ``N1`` equal to ``a``.
The limiting regime is described by the triple ``(a, beta, c)`` with
``beta = lim N1/N`` and ``c = lim N/M``.
"""

from __future__ import annotations

from dataclasses import dataclass


class ParameterError(ValueError):
    """Raised when model parameters violate their domain."""


@dataclass(frozen=True)
class ModelParams:
    a: float
    beta: float
    c: float

    @property
    def degenerate(self) -> bool:
        # a == 1 is the identity covariance; the quartic picks up a double root.
        return self.a == 1.0

    def swapped(self) -> "ModelParams":
        """Parameters of the same ensemble rescaled by 1/a (roles of 1 and a swapped)."""
        return ModelParams(1.0 / self.a, 1.0 - self.beta, self.c)

    def as_dict(self) -> dict:
        return {"a": self.a, "beta": self.beta, "c": self.c}


@dataclass(frozen=True)
class FiniteSize:
    M: int
    N: int
    N1: int

    def __post_init__(self):
        if self.N < 2:
            raise ParameterError(f"N must be at least 2, got {self.N}")
        if self.M < self.N:
            raise ParameterError(f"M must be >= N, got M={self.M}, N={self.N}")
        if not 1 <= self.N1 <= self.N - 1:
            raise ParameterError(f"N1 must lie in [1, N-1], got N1={self.N1}, N={self.N}")

    @property
    def N0(self) -> int:
        return self.N - self.N1

    @property
    def c_N(self) -> float:
        return self.N / self.M

    @property
    def beta_N(self) -> float:
        return self.N1 / self.N

    def tau(self, params: ModelParams) -> tuple[float, float]:
        """Offsets ``(cM - N, N beta - N1)`` relative to limiting parameters."""
        return params.c * self.M - self.N, self.N * params.beta - self.N1

    def as_dict(self) -> dict:
        return {"M": self.M, "N": self.N, "N1": self.N1}


def validate(params: ModelParams) -> ModelParams:
    """Return ``params`` unchanged if it lies in the admissible domain."""
    a, beta, c = params.a, params.beta, params.c
    if not a > 0:
        raise ParameterError("a must be positive")
    if not 0 < beta < 1:
        raise ParameterError("beta must lie in (0,1)")
    if not 0 < c < 1:
        raise ParameterError("c must lie in (0,1)")
    return params


def finite_size(params: ModelParams, M: int) -> FiniteSize:
    """Nearest finite system: ``N = round(cM)``, ``N1 = round(beta N)``.

    Rounding is to nearest with ties to even, so ``|cM - N| <= 1/2``.
    ``N1`` is clamped into ``[1, N-1]``.
    """
    validate(params)
    if M < 2:
        raise ParameterError("M must be at least 2")
    N = round(params.c * M)
    if N < 2:
        raise ParameterError(f"N = round(c*M) = {N} is too small (need N >= 2)")
    N = min(N, M)
    N1 = min(max(round(params.beta * N), 1), N - 1)
    return FiniteSize(M=int(M), N=int(N), N1=int(N1))


def effective_params(fs: FiniteSize, a: float) -> ModelParams:
    """Finite-size parameters ``(a, N1/N, N/M)``."""
    return validate(ModelParams(a=float(a), beta=fs.beta_N, c=fs.c_N))
