"""The four chaotic analog encoders, their codeword layouts and rates."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .maps import baker_orbit, symbolic_coding, tent_inverse, tent_orbit


class Family(str, enum.Enum):
    TENT = "tent"
    TENT_TURBO = "tent-turbo"
    BAKER = "baker"
    BAKER_TURBO = "baker-turbo"

    @property
    def k(self) -> int:
        """Source symbols per block."""
        return 1 if self in (Family.TENT, Family.TENT_TURBO) else 2

    @property
    def turbo(self) -> bool:
        return self in (Family.TENT_TURBO, Family.BAKER_TURBO)


@dataclass(frozen=True)
class CodeSpec:
    family: Family
    n: int
    beta: float = 2.0
    puncture_systematic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        min_n = 2 if self.family.turbo else 1
        if int(self.n) != self.n or self.n < min_n:
            raise ValueError(f"{self.family.value} needs integer n >= {min_n}, got {self.n}")
        if self.family.k == 1 and not 1.0 < self.beta <= 2.0:
            raise ValueError(f"beta must satisfy 1 < beta <= 2, got {self.beta}")
        if self.family is Family.TENT_TURBO and self.beta != 2.0:
            # the backward chain leaves [-1, beta-1] for beta < 2
            raise ValueError("the tent map turbo code needs beta = 2")
        if self.family.k == 2 and self.beta != 2.0:
            raise ValueError("the baker's map has no slope parameter; leave beta at 2")
        if self.puncture_systematic and not self.family.turbo:
            raise ValueError("puncturing applies to turbo families only")

    @property
    def k(self) -> int:
        return self.family.k

    @property
    def source_bounds(self) -> tuple[float, float]:
        """Per-symbol source interval; the tent map lives on ``[-1, beta-1]``."""
        return (-1.0, self.beta - 1.0) if self.family is Family.TENT else (-1.0, 1.0)

    @property
    def length(self) -> int:
        n = self.n
        return {
            Family.TENT: n,
            Family.TENT_TURBO: 2 * n - 1 if self.puncture_systematic else 2 * n,
            Family.BAKER: 2 * n,
            Family.BAKER_TURBO: 4 * n - 2 if self.puncture_systematic else 4 * n,
        }[self.family]

    @property
    def system_id(self) -> str:
        sid = f"{self.family.value}-n{self.n}"
        if self.beta != 2.0:
            sid += f"-b{self.beta:g}"
        if self.puncture_systematic:
            sid += "-p"
        return sid


def rate(spec: CodeSpec) -> Fraction:
    return Fraction(spec.k, spec.length)


def layout(spec: CodeSpec) -> tuple[tuple[int, int, str], ...]:
    """Position -> ``(component map, orbit index, dimension)``."""
    n = spec.n
    fam = spec.family
    if fam is Family.TENT:
        return tuple((0, i, "x") for i in range(n))
    if fam is Family.TENT_TURBO:
        second = [(1, i, "x") for i in range(n)]
        if spec.puncture_systematic:
            second = second[:-1]
        return tuple([(0, i, "x") for i in range(n)] + second)
    first = [(0, i, d) for i in range(n) for d in ("x", "y")]
    if fam is Family.BAKER:
        return tuple(first)
    second = [(1, i, d) for i in range(n) for d in ("x", "y")]
    if spec.puncture_systematic:
        second = second[2:]
    return tuple(first + second)


@dataclass(frozen=True)
class Codeword:
    symbols: np.ndarray
    layout: tuple[tuple[int, int, str], ...]

    def __len__(self) -> int:
        return len(self.symbols)


def _check_source(src: np.ndarray, lo: float, hi: float) -> None:
    if np.any(src < lo - 1e-9) or np.any(src > hi + 1e-9) or np.any(np.isnan(src)):
        raise ValueError(f"source symbols must lie in [{lo}, {hi}]")


def encode_batch(spec: CodeSpec, sources) -> np.ndarray:
    """Encode a batch of source blocks, shape ``(T, k)`` (or ``(T,)`` for k=1), into ``(T, L)``."""
    src = np.asarray(sources, dtype=float)
    if spec.k == 1 and (src.ndim == 1):
        src = src[:, None]
    if src.ndim != 2 or src.shape[1] != spec.k:
        raise ValueError(f"expected sources of shape (T, {spec.k}), got {src.shape}")
    _check_source(src, *spec.source_bounds)
    n, fam = spec.n, spec.family

    if fam is Family.TENT:
        return tent_orbit(src[:, 0], n, spec.beta)

    if fam is Family.TENT_TURBO:
        u = src[:, 0]
        fwd = tent_orbit(u, n, spec.beta)
        signs = symbolic_coding(fwd)
        bwd = np.empty_like(fwd)
        bwd[:, n - 1] = u
        # consumes s_{n-2}, ..., s_0: the reverse interleaver is implicit
        for i in range(n - 2, -1, -1):
            bwd[:, i] = tent_inverse(bwd[:, i + 1], signs[:, i], spec.beta)
        if spec.puncture_systematic:
            bwd = bwd[:, :-1]
        return np.concatenate([fwd, bwd], axis=1)

    first = baker_orbit(src[:, 0], src[:, 1], n).reshape(len(src), 2 * n)
    if fam is Family.BAKER:
        return first
    second = baker_orbit(src[:, 1], src[:, 0], n).reshape(len(src), 2 * n)
    if spec.puncture_systematic:
        second = second[:, 2:]
    return np.concatenate([first, second], axis=1)


def encode(spec: CodeSpec, source) -> Codeword:
    src = np.atleast_1d(np.asarray(source, dtype=float))
    return Codeword(encode_batch(spec, src[None, :])[0], layout(spec))


def _require(spec: CodeSpec, fam: Family) -> None:
    if spec.family is not fam:
        raise ValueError(f"spec family is {spec.family.value}, expected {fam.value}")


def encode_tent(u: float, spec: CodeSpec) -> Codeword:
    _require(spec, Family.TENT)
    return encode(spec, [u])


def encode_tent_turbo(u: float, spec: CodeSpec) -> Codeword:
    _require(spec, Family.TENT_TURBO)
    return encode(spec, [u])


def encode_baker(uv, spec: CodeSpec) -> Codeword:
    _require(spec, Family.BAKER)
    return encode(spec, uv)


def encode_baker_turbo(uv, spec: CodeSpec) -> Codeword:
    _require(spec, Family.BAKER_TURBO)
    return encode(spec, uv)
