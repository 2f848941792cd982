"""BLAS thread control for small-matrix hot loops.

The samplers and the distance optimizer run thousands of tiny eigh/gemm
calls; multithreaded BLAS busy-waiting makes those ~7x slower on small
machines, so the loops pin BLAS to one thread."""

from __future__ import annotations

from threadpoolctl import threadpool_limits

__all__ = ["single_threaded_blas"]


def single_threaded_blas():
    return threadpool_limits(limits=1)
