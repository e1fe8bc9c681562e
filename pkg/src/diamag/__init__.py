"""Cross-validated numerics for planar magnetic heat kernels and diamagnetic checks."""

__version__ = "0.1.0"
