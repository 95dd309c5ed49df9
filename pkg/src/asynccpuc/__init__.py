"""Asynchronous capacity per unit cost of discrete memoryless channels.

Single-letter capacity formulas (``capacity``), the constant-composition
random code with a sequential typicality decoder (``coding``), a Monte Carlo
simulator of asynchronous transmission (``simulator``) and arrival-time
models (``arrival``).
"""
from .arrival import ArrivalModel, beta_bar, effective_capacity, smallest_covering_set_size
from .capacity import (CapacityResult, async_cpuc, async_cpuc_delay, async_cpuc_zero_cost,
                       gaussian_cpuc, per_symbol_rate, sync_cpuc, sync_cpuc_zero_cost)
from .channel import Channel, GaussianChannel, bsc, detect_infinite_cpuc, noiseless, validate
from .coding import (CodeSpec, Codebook, DecoderConfig, SequentialDecoder, code_cost,
                     generate_codebook, start_time)
from .info import (divergence_sum_identity, entropy, is_typical, joint_type, kl_divergence,
                   mutual_information)
from .simulator import estimate, run_trial, sweep_rate

__version__ = "0.1.0"
