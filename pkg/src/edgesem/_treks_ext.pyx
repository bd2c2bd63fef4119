# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trek accumulation kernel; same contract as ``_treks_py.accumulate_pairs``."""


def accumulate_pairs(const long[:] left_ends, const double[:] left_prods,
                     const long[:] right_ends, const double[:] right_prods,
                     double weight, double[:, ::1] out):
    cdef Py_ssize_t n_left = left_ends.shape[0]
    cdef Py_ssize_t n_right = right_ends.shape[0]
    cdef Py_ssize_t x, y
    cdef long i
    cdef double wp
    for x in range(n_left):
        i = left_ends[x]
        wp = weight * left_prods[x]
        for y in range(n_right):
            out[i, right_ends[y]] += wp * right_prods[y]
    return n_left * n_right
