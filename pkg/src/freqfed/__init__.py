"""Frequency-based federated domain generalization for image segmentation.

Fourier amplitude mixing with soft/hard thresholding, a simulated federation
loop (FedAvg/FedProx) over a toy per-pixel segmentation model, segmentation
metrics, and a synthetic multi-domain corpus.
"""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
