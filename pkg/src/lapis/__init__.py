"""Lowering pipeline from a linalg/scf/memref-style IR to Kokkos C++ source."""

__version__ = "0.1.0"
