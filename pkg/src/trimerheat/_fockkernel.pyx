# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Lindblad right-hand side on the number-sector packed density matrix.

The stencil is precomputed as ``T`` gather terms: ``out[k] = diag[k] rho[k]
+ sum_t coef[k, t] rho[src[k, t]]``.  The numpy fallback evaluates the same
sum one term at a time; here it is one fused pass with no temporaries.
"""


def gather_rhs(
    const double complex[::1] rho,
    double complex[::1] out,
    const double[::1] diag,
    const long[:, ::1] src,
    const double complex[:, ::1] coef,
):
    cdef Py_ssize_t n = rho.shape[0]
    cdef Py_ssize_t n_terms = src.shape[1]
    cdef Py_ssize_t k, t
    cdef double complex acc
    with nogil:
        for k in range(n):
            acc = diag[k] * rho[k]
            for t in range(n_terms):
                acc = acc + coef[k, t] * rho[src[k, t]]
            out[k] = acc
    return out
