"""Digital comparison system: uniform quantizer, 8-state convolutional code, Gray PAM.

The convolutional code is the feedforward rate-1/2 memory-3 code with
octal generators (13, 15), terminated with three zero tail bits and
decoded by soft-decision Viterbi on squared Euclidean distance.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .channel import ChannelObservation


@dataclass(frozen=True)
class QuantizerSpec:
    bits: int

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("quantizer needs at least one bit")

    @property
    def levels(self) -> int:
        return 1 << self.bits

    @property
    def delta(self) -> float:
        return 2.0 / self.levels


def quantize(u, q: QuantizerSpec):
    idx = np.clip(np.floor((np.asarray(u, dtype=float) + 1.0) / q.delta), 0, q.levels - 1).astype(np.int64)
    return int(idx) if idx.ndim == 0 else idx


def dequantize(index, q: QuantizerSpec):
    idx = np.asarray(index)
    if np.any(idx < 0) or np.any(idx >= q.levels):
        raise ValueError(f"quantizer index out of range [0, {q.levels})")
    out = -1.0 + q.delta * (idx + 0.5)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ConvCodeSpec:
    generators: tuple[int, int] = (0o13, 0o15)
    memory: int = 3

    @property
    def n_states(self) -> int:
        return 1 << self.memory

    @property
    def rate(self) -> Fraction:
        return Fraction(1, len(self.generators))


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


def trellis(c: ConvCodeSpec) -> tuple[np.ndarray, np.ndarray]:
    """``next_state[s, b]`` and ``outputs[s, b, j]`` for state ``s`` and input bit ``b``.

    The state holds the last ``memory`` inputs, most recent in the high bit;
    generator MSBs tap the current input.
    """
    m = c.memory
    ns = np.zeros((c.n_states, 2), dtype=np.int64)
    out = np.zeros((c.n_states, 2, len(c.generators)), dtype=np.int64)
    for s in range(c.n_states):
        for b in (0, 1):
            reg = (b << m) | s
            ns[s, b] = reg >> 1
            out[s, b] = [_parity(reg & g) for g in c.generators]
    return ns, out


def conv_encode(bits, c: ConvCodeSpec = ConvCodeSpec()) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64).ravel()
    ns, out = trellis(c)
    msg = np.concatenate([bits, np.zeros(c.memory, dtype=np.int64)])
    coded = np.empty((len(msg), len(c.generators)), dtype=np.int64)
    s = 0
    for t, b in enumerate(msg):
        coded[t] = out[s, b]
        s = ns[s, b]
    return coded.ravel()


@dataclass(frozen=True)
class PamSpec:
    order: int = 2

    def __post_init__(self):
        if self.order not in (2, 4):
            raise ValueError("PAM order must be 2 or 4")

    @property
    def bits_per_symbol(self) -> int:
        return self.order.bit_length() - 1

    @property
    def levels(self) -> np.ndarray:
        """Amplitude indexed by the bit label (MSB first), unit average energy."""
        if self.order == 2:
            return np.array([-1.0, 1.0])
        # Gray: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
        return np.array([-3.0, -1.0, 3.0, 1.0]) / np.sqrt(5.0)


def pam_modulate(bits, p: PamSpec) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    m = p.bits_per_symbol
    if bits.shape[-1] % m:
        raise ValueError(f"bit count {bits.shape[-1]} not divisible by {m}")
    groups = bits.reshape(bits.shape[:-1] + (-1, m))
    labels = np.zeros(groups.shape[:-1], dtype=np.int64)
    for j in range(m):
        labels = (labels << 1) | groups[..., j]
    return p.levels[labels]


def _branch_symbols(c: ConvCodeSpec, p: PamSpec) -> np.ndarray:
    """Modulated symbols per trellis branch, shape ``(states, 2, symbols per step)``."""
    _, out = trellis(c)
    if len(c.generators) % p.bits_per_symbol:
        raise ValueError("coded bits per step must fill whole PAM symbols")
    return pam_modulate(out, p)


def viterbi_decode_batch(received, c: ConvCodeSpec, p: PamSpec) -> np.ndarray:
    """Soft Viterbi over frames (rows of ``received``); returns message bits, tail removed."""
    R = np.atleast_2d(np.asarray(received, dtype=float))
    F = R.shape[0]
    sym = _branch_symbols(c, p)
    per_step = sym.shape[2]
    if R.shape[1] % per_step:
        raise ValueError("observation length does not match whole trellis steps")
    steps = R.shape[1] // per_step
    if steps < c.memory:
        raise ValueError("observation shorter than the termination tail")
    R = R.reshape(F, steps, per_step)

    S = c.n_states
    # every next state ns has input bit ns >> (m-1) and predecessors (ns << 1) & mask, | 1
    nxt = np.arange(S)
    bit_in = nxt >> (c.memory - 1)
    pred = np.stack([(nxt << 1) & (S - 1), ((nxt << 1) & (S - 1)) | 1], axis=1)
    bsym = sym[pred, bit_in[:, None]]  # (S, 2, per_step)

    pm = np.full((F, S), np.inf)
    pm[:, 0] = 0.0
    decisions = np.empty((steps, F, S), dtype=np.int8)
    for t in range(steps):
        d = R[:, t, None, None, :] - bsym[None]
        cand = pm[:, pred] + np.sum(d * d, axis=3)  # (F, S, 2)
        choice = np.argmin(cand, axis=2)
        decisions[t] = choice
        pm = np.take_along_axis(cand, choice[..., None], axis=2)[..., 0]

    bits = np.empty((F, steps), dtype=np.int64)
    state = np.zeros(F, dtype=np.int64)
    rows = np.arange(F)
    for t in range(steps - 1, -1, -1):
        bits[:, t] = bit_in[state]
        state = pred[state, decisions[t, rows, state]]
    return bits[:, :steps - c.memory]


def viterbi_decode(obs: ChannelObservation, c: ConvCodeSpec = ConvCodeSpec(), p: PamSpec = PamSpec()) -> np.ndarray:
    return viterbi_decode_batch(np.asarray(obs.received)[None, :], c, p)[0]


@dataclass(frozen=True)
class DigitalSpec:
    """Quantize -> convolutional code -> PAM, at a fixed bandwidth expansion."""

    bits: int = 3
    pam_order: int = 2
    frame: int = 1000
    expansion: int = 6

    def __post_init__(self):
        q, c, p = self.parts()
        uses = Fraction(q.bits) / c.rate / p.bits_per_symbol
        if uses != self.expansion:
            raise ValueError(
                f"{q.bits}-bit quantizer, rate {c.rate} code and {p.order}-PAM give "
                f"{uses} channel uses per source symbol, need {self.expansion}")
        if self.frame < 1:
            raise ValueError("frame must hold at least one source symbol")

    def parts(self) -> tuple[QuantizerSpec, ConvCodeSpec, PamSpec]:
        return QuantizerSpec(self.bits), ConvCodeSpec(), PamSpec(self.pam_order)

    @property
    def system_id(self) -> str:
        return f"conv-q{self.bits}-pam{self.pam_order}"


def _to_bits(idx: np.ndarray, nbits: int) -> np.ndarray:
    shifts = np.arange(nbits - 1, -1, -1)
    return ((idx[..., None] >> shifts) & 1).reshape(idx.shape[:-1] + (-1,))


def _from_bits(bits: np.ndarray, nbits: int) -> np.ndarray:
    groups = bits.reshape(bits.shape[:-1] + (-1, nbits))
    return groups @ (1 << np.arange(nbits - 1, -1, -1))


def digital_transmit(sources, spec: DigitalSpec) -> np.ndarray:
    """Channel symbols for frames of sources (rows)."""
    q, c, p = spec.parts()
    U = np.atleast_2d(np.asarray(sources, dtype=float))
    bits = _to_bits(quantize(U, q), q.bits)
    coded = np.stack([conv_encode(b, c) for b in bits])
    return pam_modulate(coded, p)


def digital_receive(received, spec: DigitalSpec) -> np.ndarray:
    q, c, p = spec.parts()
    bits = viterbi_decode_batch(received, c, p)
    return dequantize(_from_bits(bits, q.bits), q)


def digital_pipeline(sources, spec: DigitalSpec, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Reconstructed sources after quantization, coding, PAM, AWGN and Viterbi decoding."""
    x = digital_transmit(sources, spec)
    r = x + np.sqrt(sigma2) * rng.standard_normal(x.shape)
    return digital_receive(r, spec).reshape(np.shape(sources))
