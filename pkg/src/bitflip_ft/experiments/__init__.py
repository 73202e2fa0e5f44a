"""Benchmark, Ising dynamics, VQE and bias-sweep experiments."""

from __future__ import annotations

from .benchmark import BenchmarkConfig, BenchmarkResult, benchmark_circuit, run_benchmark
from .common import VARIANTS
from .crosscheck import CrossCheck, cross_check
from .ising import (FitResult, IsingConfig, IsingSeries, dense_magnetization, discard_rate_fit,
                    integrated_error, run_ising, trotter_circuit)
from .vqe import (CAFFEINE, EnergyEstimate, ObservableSpec, epsilon_sweep, exact_ground_energy,
                  optimize_ansatz, vqe_energy)

__all__ = [
    "BenchmarkConfig", "BenchmarkResult", "CAFFEINE", "CrossCheck", "EnergyEstimate", "FitResult",
    "IsingConfig", "IsingSeries", "ObservableSpec", "VARIANTS", "benchmark_circuit", "cross_check",
    "dense_magnetization", "discard_rate_fit", "epsilon_sweep", "exact_ground_energy",
    "integrated_error", "optimize_ansatz", "run_benchmark", "run_ising", "trotter_circuit",
    "vqe_energy",
]
