"""Pure numpy implementation of the hot kernels.

Mirrors ``_ckernels.pyx`` function for function. Sources are accumulated in
index order so the map evaluators match the compiled versions bit for bit.
"""
import numpy as np

_SINC_CHUNK = 4096


def power_1d(x, src_x, d2, alpha, gamma):
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    half = 0.5 * gamma
    for m in range(len(src_x)):
        u = x - src_x[m]
        base = u * u + d2[m]
        if gamma == 2.0:
            out += alpha[m] / base
        else:
            out += alpha[m] / base**half
    return out


def dpower_1d(x, src_x, d2, alpha):
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    for m in range(len(src_x)):
        u = x - src_x[m]
        base = u * u + d2[m]
        out += -2.0 * alpha[m] * u / (base * base)
    return out


def power_2d(px, py, src_x, src_y, d2, alpha, gamma):
    px = np.ascontiguousarray(px, dtype=np.float64)
    py = np.ascontiguousarray(py, dtype=np.float64)
    out = np.zeros_like(px)
    half = 0.5 * gamma
    for m in range(len(src_x)):
        ux = px - src_x[m]
        uy = py - src_y[m]
        base = ux * ux + uy * uy + d2[m]
        if gamma == 2.0:
            out += alpha[m] / base
        else:
            out += alpha[m] / base**half
    return out


def sinc_series(t, xn, vn, spacing):
    t = np.ascontiguousarray(t, dtype=np.float64)
    xn = np.ascontiguousarray(xn, dtype=np.float64)
    vn = np.ascontiguousarray(vn, dtype=np.float64)
    out = np.empty_like(t)
    for start in range(0, len(t), _SINC_CHUNK):
        stop = start + _SINC_CHUNK
        u = (t[start:stop, None] - xn[None, :]) / spacing
        out[start:stop] = np.sinc(u) @ vn
    return out


def blockage_counts(tx, rx, rx_z, boxes):
    """Number of boxes crossed below roof level by each tx -> rx segment.

    tx: (T, 3) positions, rx: (P, 2) ground positions at height ``rx_z``,
    boxes: (B, 5) rows of (x0, y0, x1, y1, roof_height).
    """
    tx = np.asarray(tx, dtype=np.float64).reshape(-1, 3)
    rx = np.asarray(rx, dtype=np.float64).reshape(-1, 2)
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 5)
    counts = np.zeros((len(tx), len(rx)), dtype=np.int32)
    x0 = rx[:, 0]
    y0 = rx[:, 1]
    for i, (tx_x, tx_y, tx_z) in enumerate(tx):
        dx = tx_x - x0
        dy = tx_y - y0
        dz = tx_z - rx_z
        for bx0, by0, bx1, by1, roof in boxes:
            s_in = np.zeros(len(rx))
            s_out = np.ones(len(rx))
            hit = np.ones(len(rx), dtype=bool)
            for o, dd, lo, hi in ((x0, dx, bx0, bx1), (y0, dy, by0, by1)):
                flat = dd == 0.0
                hit &= ~(flat & ((o < lo) | (o > hi)))
                with np.errstate(divide="ignore", invalid="ignore"):
                    s1 = (lo - o) / dd
                    s2 = (hi - o) / dd
                s_lo = np.where(flat, -np.inf, np.minimum(s1, s2))
                s_hi = np.where(flat, np.inf, np.maximum(s1, s2))
                s_in = np.maximum(s_in, s_lo)
                s_out = np.minimum(s_out, s_hi)
            hit &= s_in < s_out
            # z grows along the segment, so the entry point is the lowest one
            hit &= rx_z + s_in * dz < roof
            counts[i] += hit
    return counts
