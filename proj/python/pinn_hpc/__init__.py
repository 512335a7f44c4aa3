"""Physics-informed neural network training engine (C++ core)."""

from ._core import (
    adam_steps,
    efficiency_speedup,
    forward,
    gap_bound,
    generalization_bound,
    glorot_bound,
    glorot_init,
    lhs,
    mc_rate_study,
    param_count,
    pointsec,
    read_sweep_csv,
    relative_l2_error,
    rho,
    ring_allreduce,
    run_cli,
    schrodinger_reference,
    train,
    worker_seed,
)

__all__ = [
    "adam_steps",
    "efficiency_speedup",
    "forward",
    "gap_bound",
    "generalization_bound",
    "glorot_bound",
    "glorot_init",
    "lhs",
    "mc_rate_study",
    "param_count",
    "pointsec",
    "read_sweep_csv",
    "relative_l2_error",
    "rho",
    "ring_allreduce",
    "run_cli",
    "schrodinger_reference",
    "train",
    "worker_seed",
]
