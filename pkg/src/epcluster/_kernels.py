"""Numerical inner loops.

Every function here is written against the subset of numpy that numba's
nopython mode understands, so the same body serves as the compiled kernel
and as the pure-numpy fallback.  The two k-means and fidelity kernels that
benefit from different formulations come in explicit ``_loops``/``_numpy``
pairs and are selected by :data:`epcluster._accel.USE_NUMBA`; the fidelity
choice also depends on the number of states.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

ULP = 2.220446049250313e-16
SAFE_MIN = 1e-300
RESCALE_AT = 1e150


# --------------------------------------------------------------------------
# dense complex eigensolver
# --------------------------------------------------------------------------


@njit
def frobenius(a):
    acc = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            v = a[i, j]
            acc += v.real * v.real + v.imag * v.imag
    return np.sqrt(acc)


@njit
def givens(f, g):
    """Complex rotation ``G = [[c, s], [-conj(s), c]]`` with ``G @ [f, g] = [r, 0]``.

    ``c`` is real and non-negative.
    """
    af = abs(f)
    ag = abs(g)
    if ag == 0.0:
        return 1.0, 0.0 + 0.0j, f
    if af == 0.0:
        return 0.0, np.conj(g) / ag, ag + 0.0j
    r = np.hypot(af, ag)
    phase = f / af
    return af / r, phase * np.conj(g) / r, phase * r


@njit
def rotate_rows(a, p, c, s, j0, j1):
    top = a[p, j0:j1].copy()
    bot = a[p + 1, j0:j1].copy()
    a[p, j0:j1] = c * top + s * bot
    a[p + 1, j0:j1] = -np.conj(s) * top + c * bot


@njit
def rotate_cols(a, p, c, s, i0, i1):
    left = a[i0:i1, p].copy()
    right = a[i0:i1, p + 1].copy()
    a[i0:i1, p] = c * left + np.conj(s) * right
    a[i0:i1, p + 1] = -s * left + c * right


@njit
def hessenberg(a):
    """Householder reduction ``a = q @ h @ q^H`` with ``h`` upper Hessenberg."""
    n = a.shape[0]
    h = a.copy()
    q = np.eye(n, dtype=np.complex128)
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        tail = 0.0
        for i in range(1, x.shape[0]):
            tail += x[i].real * x[i].real + x[i].imag * x[i].imag
        if tail == 0.0:
            continue
        ax0 = abs(x[0])
        norm = np.sqrt(ax0 * ax0 + tail)
        if ax0 == 0.0:
            phase = 1.0 + 0.0j
        else:
            phase = x[0] / ax0
        v = x.copy()
        v[0] = x[0] + phase * norm
        v = v / np.sqrt(np.sum(np.abs(v) ** 2))
        vc = np.conj(v)
        w = np.dot(vc, np.ascontiguousarray(h[k + 1:, :]))
        h[k + 1:, :] -= 2.0 * np.outer(v, w)
        w = np.dot(np.ascontiguousarray(h[:, k + 1:]), v)
        h[:, k + 1:] -= 2.0 * np.outer(w, vc)
        w = np.dot(np.ascontiguousarray(q[:, k + 1:]), v)
        q[:, k + 1:] -= 2.0 * np.outer(w, vc)
        h[k + 2:, k] = 0.0
    return h, q


@njit
def eig2_near(a, b, c, d):
    """Eigenvalue of ``[[a, b], [c, d]]`` closest to ``d`` (cancellation-free)."""
    p = 0.5 * (a - d)
    disc = np.sqrt(p * p + b * c)
    if (np.conj(p) * disc).real < 0.0:
        disc = -disc
    den = p + disc
    if den == 0.0:
        return d
    return d - (b * c) / den


@njit
def _standardize_2x2(h, z, lo):
    """Triangularize the unreduced 2x2 diagonal block at ``lo`` in one rotation."""
    n = h.shape[0]
    a = h[lo, lo]
    b = h[lo, lo + 1]
    c = h[lo + 1, lo]
    d = h[lo + 1, lo + 1]
    lam = eig2_near(d, c, b, a)
    x0 = b
    x1 = lam - a
    y0 = lam - d
    y1 = c
    if abs(y0) + abs(y1) > abs(x0) + abs(x1):
        x0 = y0
        x1 = y1
    cs, sn, _ = givens(x0, x1)
    rotate_rows(h, lo, cs, sn, lo, n)
    rotate_cols(h, lo, cs, sn, 0, lo + 2)
    rotate_cols(z, lo, cs, sn, 0, n)
    h[lo + 1, lo] = 0.0


@njit
def schur_hessenberg(h, z, tol, max_iter):
    """Complex Schur form of an upper Hessenberg matrix, in place.

    Implicit single-shift QR with Wilkinson shifts and an exceptional shift
    every tenth iteration on a stagnating block.  Rotations are accumulated
    into ``z``.  Returns the number of QR sweeps, or -1 if ``max_iter`` sweeps
    were spent without finishing.
    """
    n = h.shape[0]
    hnorm = frobenius(h)
    if hnorm == 0.0:
        return 0
    total = 0
    its = 0
    hi = n - 1
    while hi > 0:
        lo = 0
        for k in range(hi, 0, -1):
            sub = abs(h[k, k - 1])
            scale = abs(h[k - 1, k - 1]) + abs(h[k, k])
            if scale == 0.0:
                scale = hnorm
            if sub <= SAFE_MIN or sub <= tol * scale:
                h[k, k - 1] = 0.0
                lo = k
                break
        if lo == hi:
            hi -= 1
            its = 0
            continue
        if lo == hi - 1:
            _standardize_2x2(h, z, lo)
            hi -= 2
            its = 0
            continue
        if total >= max_iter:
            return -1
        its += 1
        total += 1
        if its % 10 == 0:
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1].real)
        else:
            mu = eig2_near(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
        f = h[lo, lo] - mu
        g = h[lo + 1, lo]
        for k in range(lo, hi):
            if k > lo:
                f = h[k, k - 1]
                g = h[k + 1, k - 1]
            c, s, r = givens(f, g)
            j0 = lo
            if k > lo:
                j0 = k - 1
            rotate_rows(h, k, c, s, j0, n)
            if k > lo:
                h[k, k - 1] = r
                h[k + 1, k - 1] = 0.0
            rotate_cols(h, k, c, s, 0, min(k + 3, hi + 1))
            rotate_cols(z, k, c, s, 0, n)
    return total


@njit
def triangular_eigvecs(t):
    """Right eigenvectors of an upper-triangular matrix by back-substitution.

    Column ``j`` solves ``(t - t[j, j]) x = 0`` with ``x[j] = 1`` and
    ``x[j+1:] = 0``.  Near-zero pivots are replaced by ``ulp * ||t||_F`` and
    partial vectors are rescaled before they can overflow.
    """
    n = t.shape[0]
    smin = max(ULP * frobenius(t), SAFE_MIN)
    x = np.zeros((n, n), dtype=np.complex128)
    for j in range(n):
        x[j, j] = 1.0
        lam = t[j, j]
        for i in range(j - 1, -1, -1):
            acc = np.dot(t[i, i + 1:j + 1], np.ascontiguousarray(x[i + 1:j + 1, j]))
            piv = t[i, i] - lam
            if abs(piv) < smin:
                piv = smin + 0.0j
            val = -acc / piv
            x[i, j] = val
            mag = abs(val)
            if mag > RESCALE_AT:
                x[:j + 1, j] /= mag
    return x


# --------------------------------------------------------------------------
# pairwise fidelities
# --------------------------------------------------------------------------


@njit
def fidelity_matrix_loops(states):
    """Pairwise fidelity of the rows of ``states``, one evaluation per pair."""
    n = states.shape[0]
    norms = np.empty(n)
    for a in range(n):
        norms[a] = np.vdot(states[a], states[a]).real
    f = np.eye(n)
    for a in range(n):
        for b in range(a + 1, n):
            ip = np.vdot(states[a], states[b])
            val = (ip.real * ip.real + ip.imag * ip.imag) / (norms[a] * norms[b])
            f[a, b] = val
            f[b, a] = val
    return f


def fidelity_matrix_numpy(states):
    gram = states.conj() @ states.T
    norms = np.real(np.diagonal(gram)).copy()
    f = np.abs(gram) ** 2 / np.outer(norms, norms)
    upper = np.triu(f, 1)
    f = upper + upper.T
    np.fill_diagonal(f, 1.0)
    return f


# --------------------------------------------------------------------------
# Lloyd iterations
# --------------------------------------------------------------------------


@njit
def _assign_loops(x, c, labels, dist2):
    n, d = x.shape
    k = c.shape[0]
    for i in range(n):
        best = np.inf
        arg = 0
        for j in range(k):
            acc = 0.0
            for m in range(d):
                diff = x[i, m] - c[j, m]
                acc += diff * diff
            if acc < best:
                best = acc
                arg = j
        labels[i] = arg
        dist2[i] = best


@njit
def _means_loops(x, labels, c):
    k, d = c.shape
    sums = np.zeros((k, d))
    counts = np.zeros(k, dtype=np.int64)
    for i in range(x.shape[0]):
        j = labels[i]
        counts[j] += 1
        for m in range(d):
            sums[j, m] += x[i, m]
    out = c.copy()
    for j in range(k):
        if counts[j] > 0:
            for m in range(d):
                out[j, m] = sums[j, m] / counts[j]
    return out


@njit
def _repair_loops(x, c, labels, dist2):
    k = c.shape[0]
    for _ in range(k):
        counts = np.zeros(k, dtype=np.int64)
        for i in range(labels.shape[0]):
            counts[labels[i]] += 1
        empty = -1
        for j in range(k):
            if counts[j] == 0:
                empty = j
                break
        if empty < 0:
            return
        far = int(np.argmax(dist2))
        if dist2[far] == 0.0:
            return
        c[empty, :] = x[far, :]
        _assign_loops(x, c, labels, dist2)


@njit
def lloyd_loops(x, init, max_iter, tol):
    """Lloyd iterations from ``init``.

    Returns ``(centroids, labels, inertia, iterations, history)`` where
    ``history`` holds the inertia after every assignment step, the last
    entry being the final one.
    """
    n = x.shape[0]
    c = init.copy()
    labels = np.zeros(n, dtype=np.int64)
    dist2 = np.zeros(n)
    history = np.zeros(max_iter + 1)
    steps = 0
    for _ in range(max_iter):
        _assign_loops(x, c, labels, dist2)
        _repair_loops(x, c, labels, dist2)
        history[steps] = dist2.sum()
        steps += 1
        new = _means_loops(x, labels, c)
        shift = 0.0
        for j in range(c.shape[0]):
            s = np.sqrt(np.sum((new[j] - c[j]) ** 2))
            if s > shift:
                shift = s
        c = new
        if shift <= tol:
            break
    _assign_loops(x, c, labels, dist2)
    inertia = dist2.sum()
    history[steps] = inertia
    return c, labels, inertia, steps, history[:steps + 1].copy()


def _assign_numpy(x, c):
    d2 = ((x[:, None, :] - c[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(x.shape[0]), labels]


def _repair_numpy(x, c, labels, dist2):
    k = c.shape[0]
    for _ in range(k):
        counts = np.bincount(labels, minlength=k)
        empty = np.flatnonzero(counts == 0)
        if empty.size == 0:
            break
        far = int(np.argmax(dist2))
        if dist2[far] == 0.0:
            break
        c[empty[0]] = x[far]
        labels, dist2 = _assign_numpy(x, c)
    return labels, dist2


def _means_numpy(x, labels, c):
    k = c.shape[0]
    counts = np.bincount(labels, minlength=k)
    sums = np.zeros_like(c)
    np.add.at(sums, labels, x)
    out = c.copy()
    filled = counts > 0
    out[filled] = sums[filled] / counts[filled, None]
    return out


def lloyd_numpy(x, init, max_iter, tol):
    c = init.copy()
    history = []
    steps = 0
    for _ in range(max_iter):
        labels, dist2 = _assign_numpy(x, c)
        labels, dist2 = _repair_numpy(x, c, labels, dist2)
        history.append(dist2.sum())
        steps += 1
        new = _means_numpy(x, labels, c)
        shift = np.sqrt(((new - c) ** 2).sum(axis=1)).max()
        c = new
        if shift <= tol:
            break
    labels, dist2 = _assign_numpy(x, c)
    inertia = dist2.sum()
    history.append(inertia)
    return c, labels.astype(np.int64), inertia, steps, np.array(history)


# Above this many states the BLAS Gram product beats the compiled loops.
FIDELITY_LOOP_MAX = 24


def fidelity_matrix_kernel(states):
    if USE_NUMBA and states.shape[0] <= FIDELITY_LOOP_MAX:
        return fidelity_matrix_loops(states)
    return fidelity_matrix_numpy(states)


lloyd = lloyd_loops if USE_NUMBA else lloyd_numpy
