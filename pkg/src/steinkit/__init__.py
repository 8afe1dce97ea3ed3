"""steinkit: Stein operators and kernels, kernelized Stein discrepancies and
Wasserstein bounds, with numerical oracles for every identity."""

__version__ = "0.1.0"
