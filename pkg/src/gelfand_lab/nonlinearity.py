"""The nonlinearities driving the bifurcation problems.

Four families are supported, each strictly positive and non-decreasing on
(mu_bar, infinity):

* ``Exponential``            f(u) = e^u,               mu_bar = -inf
* ``ShiftedPower(p)``        f(u) = (1+u)^p,  p > 1,   mu_bar = -1
* ``PurePower(p)``           f(u) = u^p,      p > 1,   mu_bar = 0
* ``FermiDirac(delta)``      f(u) = int_0^inf t^delta/(1+e^(t-u)) dt

Every spec exposes f, f', f'' and the primitive F under two normalizations:
``"at_zero"`` makes F(0) = 0 (the convention of the multiplicative
identities) and ``"at_mubar"`` makes F(mu_bar) = 0 (the additive ones).
The normalization is always an explicit argument; silently switching
between the two is the classic way to get every threshold wrong.

Log-scale companions ``log_f`` and ``log_F`` stay finite far beyond the
overflow range of the plain values; the growth-ratio scans rely on them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _fermi

NORMALIZATIONS = ("at_zero", "at_mubar")


class DomainBoundError(ValueError):
    """Argument at or below the left endpoint of positivity."""


def _check_norm(normalization: str) -> None:
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")


@dataclass(frozen=True)
class NonlinearitySpec:
    """Common interface; use the concrete subclasses."""

    @property
    def mu_bar(self) -> float:
        raise NotImplementedError

    def label(self) -> str:
        raise NotImplementedError

    def _require_above_mubar(self, u: float) -> None:
        if u <= self.mu_bar:
            raise DomainBoundError(
                f"{self.label()} needs u > {self.mu_bar}, got {u}"
            )

    # subclasses implement f/fprime/fsecond/F and the log-scale variants
    def f(self, u):
        raise NotImplementedError

    def fprime(self, u):
        raise NotImplementedError

    def fsecond(self, u):
        raise NotImplementedError

    def F(self, u, normalization: str):
        raise NotImplementedError

    def log_f(self, u):
        raise NotImplementedError

    def log_F(self, u, normalization: str):
        raise NotImplementedError


@dataclass(frozen=True)
class Exponential(NonlinearitySpec):
    @property
    def mu_bar(self) -> float:
        return -math.inf

    def label(self) -> str:
        return "exp"

    def f(self, u):
        if isinstance(u, np.ndarray):
            return np.exp(u)
        return math.exp(u) if u <= 709.0 else math.inf

    def fprime(self, u):
        return self.f(u)

    def fsecond(self, u):
        return self.f(u)

    def F(self, u, normalization: str):
        _check_norm(normalization)
        if normalization == "at_mubar":
            return self.f(u)
        if isinstance(u, np.ndarray):
            return np.expm1(u)
        return math.expm1(u) if u <= 709.0 else math.inf

    def log_f(self, u):
        return u

    def log_F(self, u, normalization: str):
        # the at-zero form log(e^u - 1) assumes u > 0 (growth-scan territory)
        _check_norm(normalization)
        if normalization == "at_mubar":
            return u
        return u + np.log1p(-np.exp(-np.asarray(u, dtype=float)))


@dataclass(frozen=True)
class ShiftedPower(NonlinearitySpec):
    p: float

    def __post_init__(self):
        if not self.p > 1.0:
            raise ValueError(f"power exponent must exceed 1, got {self.p}")

    @property
    def mu_bar(self) -> float:
        return -1.0

    def label(self) -> str:
        return f"power:{self.p:g}"

    def f(self, u):
        if isinstance(u, np.ndarray):
            return (1.0 + u) ** self.p
        self._require_above_mubar(u)
        return (1.0 + u) ** self.p

    def fprime(self, u):
        if not isinstance(u, np.ndarray):
            self._require_above_mubar(u)
        return self.p * (1.0 + u) ** (self.p - 1.0)

    def fsecond(self, u):
        return self.p * (self.p - 1.0) * (1.0 + u) ** (self.p - 2.0)

    def F(self, u, normalization: str):
        # tolerates the closed endpoint u = -1 (F(-1) = 0 under at_mubar)
        _check_norm(normalization)
        if not isinstance(u, np.ndarray) and u < self.mu_bar:
            raise DomainBoundError(f"F needs u >= -1, got {u}")
        q = self.p + 1.0
        base = (1.0 + u) ** q / q
        return base if normalization == "at_mubar" else base - 1.0 / q

    def log_f(self, u):
        return self.p * np.log1p(u)

    def log_F(self, u, normalization: str):
        # the at-zero form assumes u > 0
        _check_norm(normalization)
        q = self.p + 1.0
        lF = q * np.log1p(u) - math.log(q)
        if normalization == "at_mubar":
            return lF
        return lF + np.log1p(-np.exp(-np.minimum(q * np.log1p(u), 700.0)))


@dataclass(frozen=True)
class PurePower(NonlinearitySpec):
    p: float

    def __post_init__(self):
        if not self.p > 1.0:
            raise ValueError(f"power exponent must exceed 1, got {self.p}")

    @property
    def mu_bar(self) -> float:
        return 0.0

    def label(self) -> str:
        return f"purepower:{self.p:g}"

    def f(self, u):
        if not isinstance(u, np.ndarray):
            self._require_above_mubar(u)
        return u ** self.p

    def fprime(self, u):
        if not isinstance(u, np.ndarray):
            self._require_above_mubar(u)
        return self.p * u ** (self.p - 1.0)

    def fsecond(self, u):
        return self.p * (self.p - 1.0) * u ** (self.p - 2.0)

    def F(self, u, normalization: str):
        # F(0) = 0 under both normalizations
        _check_norm(normalization)
        if not isinstance(u, np.ndarray) and u < 0.0:
            raise DomainBoundError(f"F needs u >= 0, got {u}")
        return u ** (self.p + 1.0) / (self.p + 1.0)

    def log_f(self, u):
        return self.p * np.log(u)

    def log_F(self, u, normalization: str):
        _check_norm(normalization)
        return (self.p + 1.0) * np.log(u) - math.log(self.p + 1.0)


@dataclass(frozen=True)
class FermiDirac(NonlinearitySpec):
    delta: float

    def __post_init__(self):
        if not self.delta > 0.0:
            raise ValueError(f"fermi index must be positive, got {self.delta}")

    @property
    def mu_bar(self) -> float:
        return -math.inf

    def label(self) -> str:
        return f"fermi:{self.delta:g}"

    def f(self, u):
        return _fermi.fd_f(self.delta, u)

    def fprime(self, u):
        if isinstance(u, np.ndarray):
            return np.array([_fermi.fd_fprime(self.delta, x) for x in u])
        return _fermi.fd_fprime(self.delta, u)

    def fsecond(self, u):
        if isinstance(u, np.ndarray):
            return np.array([_fermi.fd_fsecond(self.delta, x) for x in u])
        return _fermi.fd_fsecond(self.delta, u)

    def F(self, u, normalization: str):
        # primitive of f_delta is f_(delta+1)/(delta+1), vanishing at -inf
        _check_norm(normalization)
        base = _fermi.fd_f(self.delta + 1.0, u) / (self.delta + 1.0)
        if normalization == "at_mubar":
            return base
        return base - _fermi.fd_f(self.delta + 1.0, 0.0) / (self.delta + 1.0)

    def log_f(self, u):
        return _fermi.fd_log_f(self.delta, u)

    def log_F(self, u, normalization: str):
        # the at-zero form assumes u > 0
        _check_norm(normalization)
        lF = _fermi.fd_log_f(self.delta + 1.0, u) - math.log(self.delta + 1.0)
        if normalization == "at_mubar":
            return lF
        lF0 = _fermi.fd_log_f(self.delta + 1.0, 0.0) - math.log(self.delta + 1.0)
        return lF + np.log1p(-np.exp(lF0 - lF))


# -- spec-surface functions ----------------------------------------------------

def eval_f(spec: NonlinearitySpec, u: float) -> float:
    """f(u); raises DomainBoundError at or below mu_bar for power variants."""
    return float(spec.f(u))


def eval_fprime(spec: NonlinearitySpec, u: float) -> float:
    return float(spec.fprime(u))


def eval_F(spec: NonlinearitySpec, u: float, normalization: str = "at_zero") -> float:
    return float(spec.F(u, normalization))


def fermi_dirac(delta: float, u: float) -> float:
    """The complete Fermi-Dirac integral f_delta(u) itself (delta > -1)."""
    return _fermi.fd_f(delta, u)


def reduce_additive(spec: NonlinearitySpec, mu: float) -> float | None:
    """Multiplier lambda of the equivalent multiplicative problem, or None.

    The shifted problem with f(. + mu) collapses onto the multiplicative one
    for the exponential (lambda = e^mu) and shifted-power
    (lambda = (1+mu)^(p-1)) families only.
    """
    if mu <= spec.mu_bar:
        raise DomainBoundError(f"mu must exceed {spec.mu_bar}, got {mu}")
    if isinstance(spec, Exponential):
        return math.exp(mu)
    if isinstance(spec, ShiftedPower):
        return (1.0 + mu) ** (spec.p - 1.0)
    return None


def parse_nonlinearity(selector: str) -> NonlinearitySpec:
    """CLI selector: exp | power:p | purepower:p | fermi:delta."""
    name, _, arg = selector.partition(":")
    if name == "exp":
        if arg:
            raise ValueError("'exp' takes no parameter")
        return Exponential()
    if not arg:
        raise ValueError(f"selector {selector!r} needs a numeric parameter")
    value = float(arg)
    if name == "power":
        return ShiftedPower(p=value)
    if name == "purepower":
        return PurePower(p=value)
    if name == "fermi":
        return FermiDirac(delta=value)
    raise ValueError(f"unknown nonlinearity {name!r}")
