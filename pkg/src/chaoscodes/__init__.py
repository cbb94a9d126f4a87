"""Chaotic analog error-correction codes with exact maximum-likelihood decoding."""
from .channel import ChannelObservation, avg_symbol_energy, awgn, sample_source, snr_to_sigma2
from .codes import CodeSpec, Codeword, Family, encode, encode_batch, rate
from .decoder import AffineSegment, DecodeResult, enumerate_segments, grid_oracle, ml_decode
from .digital import DigitalSpec
from .harness import SimulationConfig, SweepResult, run_genie, run_sweep

__version__ = "0.1.0"
