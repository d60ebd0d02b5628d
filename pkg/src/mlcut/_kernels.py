"""Compiled inner loops (numba)."""

import numpy as np
from numba import njit

# cache-blocked lower qubits: 2**12 amplitudes * 16 bytes stays in L1/L2
_BLOCK_QUBITS = 12


@njit(cache=True)
def relax_sweep(indptr, indices, data, pos, order):
    """One Gauss-Seidel sweep moving each node antipodal to its weighted centroid.

    Returns the largest Euclidean displacement of any node.
    """
    d = pos.shape[1]
    s = np.empty(d)
    biggest = 0.0
    for t in range(order.shape[0]):
        i = order[t]
        s[:] = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            j = indices[k]
            w = data[k]
            for c in range(d):
                s[c] += w * pos[j, c]
        norm = 0.0
        for c in range(d):
            norm += s[c] * s[c]
        norm = np.sqrt(norm)
        if norm <= 1e-12:
            continue
        move = 0.0
        for c in range(d):
            new = -s[c] / norm
            diff = new - pos[i, c]
            move += diff * diff
            pos[i, c] = new
        move = np.sqrt(move)
        if move > biggest:
            biggest = move
    return biggest


@njit(cache=True)
def _butterflies(f, lo, hi, h, c, s):
    # amplitude k lives at f[2k], f[2k+1]; exp(-i b X) = [[c, -is], [-is, c]]
    for base in range(lo, hi, 2 * h):
        for k in range(base, base + h):
            a = 2 * k
            b = 2 * (k + h)
            ar = f[a]
            ai = f[a + 1]
            br = f[b]
            bi = f[b + 1]
            f[a] = c * ar + s * bi
            f[a + 1] = c * ai - s * br
            f[b] = c * br + s * ai
            f[b + 1] = c * bi - s * ar


@njit(cache=True)
def apply_mixer(f, n, beta):
    """Apply ``exp(-i beta X)`` to every qubit of a float64 view of the state."""
    c = np.cos(beta)
    s = np.sin(beta)
    size = f.shape[0] // 2
    low = min(n, _BLOCK_QUBITS)
    bs = 1 << low
    for blk in range(0, size, bs):
        for q in range(low):
            _butterflies(f, blk, blk + bs, 1 << q, c, s)
    for q in range(low, n):
        _butterflies(f, 0, size, 1 << q, c, s)


@njit(cache=True)
def phase_table(W, gamma, out, scratch):
    """Fill ``out[z] = exp(-i gamma cut(z))`` from a dense weight matrix.

    Built by doubling over nodes so that no per-entry trigonometry is needed.
    ``scratch`` must hold at least ``2**(n-1)`` complex entries.
    """
    n = W.shape[0]
    out[0] = 1.0
    for k in range(n):
        h = 1 << k
        scratch[0] = 1.0
        tot = 0.0
        for j in range(k):
            w = W[k, j]
            tot += w
            u = complex(np.cos(gamma * w), -np.sin(gamma * w))
            m = 1 << j
            for z in range(m):
                scratch[m + z] = scratch[z] * u
        t = complex(np.cos(gamma * tot), -np.sin(gamma * tot))
        for z in range(h):
            e = out[z]
            sz = scratch[z]
            out[h + z] = e * sz.conjugate() * t
            out[z] = e * sz


@njit(cache=True)
def phase_from_values(psi, values, gamma):
    for k in range(psi.shape[0]):
        t = gamma * values[k]
        psi[k] *= complex(np.cos(t), -np.sin(t))


@njit(cache=True)
def weighted_probability_sum(psi, values):
    acc = 0.0
    comp = 0.0
    for k in range(psi.shape[0]):
        p = psi[k].real * psi[k].real + psi[k].imag * psi[k].imag
        y = p * values[k] - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
    return acc


@njit(cache=True)
def cost_values(W, out):
    """``out[z]`` = cut of bitstring ``z`` (bit i = side of node i), by doubling."""
    n = W.shape[0]
    size = 1 << n
    s = np.empty(max(size // 2, 1))
    out[0] = 0.0
    for k in range(n):
        h = 1 << k
        s[0] = 0.0
        tot = 0.0
        for j in range(k):
            w = W[k, j]
            tot += w
            m = 1 << j
            for z in range(m):
                s[m + z] = s[z] + w
        for z in range(h):
            base = out[z]
            out[h + z] = base + tot - s[z]
            out[z] = base + s[z]


@njit(cache=True)
def steepest_ascent(indptr, indices, data, x, gains, max_flips):
    """Flip the highest-gain node while its gain is positive.

    Ties go to the lowest node id. Returns the number of flips performed.
    """
    n = x.shape[0]
    flips = 0
    while flips < max_flips:
        best = -1
        bestg = 1e-12
        for i in range(n):
            if gains[i] > bestg:
                bestg = gains[i]
                best = i
        if best < 0:
            break
        xi = x[best]
        for k in range(indptr[best], indptr[best + 1]):
            j = indices[k]
            w = data[k]
            if x[j] != xi:
                gains[j] += 2.0 * w
            else:
                gains[j] -= 2.0 * w
        gains[best] = -gains[best]
        x[best] = 1 - xi
        flips += 1
    return flips
