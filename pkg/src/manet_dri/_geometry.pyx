# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled geometry kernels; mirror of ``_geometry_py``."""
from libc.math cimport sqrt


def neighbors(double[:] xs, double[:] ys, Py_ssize_t i, double r2):
    cdef Py_ssize_t j, n = xs.shape[0]
    cdef double xi = xs[i], yi = ys[i], dx, dy
    out = []
    for j in range(n):
        if j == i:
            continue
        dx = xs[j] - xi
        dy = ys[j] - yi
        if dx * dx + dy * dy <= r2:
            out.append(j)
    return out


def within(double[:] xs, double[:] ys, Py_ssize_t i, Py_ssize_t j, double r2):
    cdef double dx = xs[j] - xs[i]
    cdef double dy = ys[j] - ys[i]
    return dx * dx + dy * dy <= r2


def advance(double[:] xs, double[:] ys, double[:] wx, double[:] wy,
            double[:] speed, double[:] pause, double dt, double pause_time,
            double width, double height):
    cdef Py_ssize_t i, n = xs.shape[0]
    cdef double p, v, dx, dy, d, step, f, x, y
    expired = []
    for i in range(n):
        p = pause[i]
        if p > 0.0:
            p -= dt
            if p > 0.0:
                pause[i] = p
            else:
                pause[i] = 0.0
                expired.append(i)
            continue
        v = speed[i]
        if v <= 0.0:
            continue
        dx = wx[i] - xs[i]
        dy = wy[i] - ys[i]
        d = sqrt(dx * dx + dy * dy)
        step = v * dt
        if step >= d:
            xs[i] = wx[i]
            ys[i] = wy[i]
            p = pause_time - (dt - d / v)
            if p > 0.0:
                pause[i] = p
            else:
                pause[i] = 0.0
                expired.append(i)
        else:
            f = step / d
            x = xs[i] + dx * f
            y = ys[i] + dy * f
            xs[i] = min(max(x, 0.0), width)
            ys[i] = min(max(y, 0.0), height)
    return expired
