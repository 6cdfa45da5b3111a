"""Pure-Python geometry kernels.

Must stay operation-for-operation identical to ``_geometry.pyx`` so both
backends produce bit-identical traces.
"""
from math import sqrt


def neighbors(xs, ys, i, r2):
    xi = xs[i]
    yi = ys[i]
    out = []
    for j in range(len(xs)):
        if j == i:
            continue
        dx = xs[j] - xi
        dy = ys[j] - yi
        if dx * dx + dy * dy <= r2:
            out.append(j)
    return out


def within(xs, ys, i, j, r2):
    dx = xs[j] - xs[i]
    dy = ys[j] - ys[i]
    return dx * dx + dy * dy <= r2


def advance(xs, ys, wx, wy, speed, pause, dt, pause_time, width, height):
    """Move every node ``dt`` seconds along its waypoint leg.

    Returns the indices that need a fresh waypoint and speed.
    """
    expired = []
    for i in range(len(xs)):
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
