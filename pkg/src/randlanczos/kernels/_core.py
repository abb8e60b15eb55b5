"""Hot numeric kernels, written in nopython-compatible numpy.

Every function here is plain numpy and can run as-is (the fallback
backend) or wrapped by ``numba.njit`` (see ``kernels/__init__.py``).
Keep this module free of Python objects numba cannot lower: no
dataclasses, no dicts, no string arguments.
"""

import numpy as np


def tridiag_ql(d, e, z, thresh, max_sweeps, want_z):
    """Implicit-shift QL with Wilkinson shifts on a symmetric tridiagonal.

    ``d`` (k,) diagonal and ``e`` (k,) off-diagonal (last slot is slack)
    are overwritten; ``d`` ends holding the eigenvalues, unsorted.  When
    ``want_z`` the rotations accumulate into ``z`` (k,k) held transposed:
    row j ends as the eigenvector of d[j] (contiguous row updates are fast
    on both backends).  Returns 0 on success, 1 if some eigenvalue needed
    more than ``max_sweeps`` sweeps.
    """
    k = d.shape[0]
    scratch = np.empty(k)
    for l in range(k):
        sweeps = 0
        while True:
            m = l
            while m < k - 1 and abs(e[m]) > thresh:
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                return 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            if g >= 0.0:
                g = d[m] - d[l] + e[l] / (g + r)
            else:
                g = d[m] - d[l] + e[l] / (g - r)
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if want_z:
                    scratch[:] = z[i + 1, :]
                    z[i + 1, :] = s * z[i, :] + c * scratch
                    z[i, :] = c * z[i, :] - s * scratch
            if not underflow:
                d[l] -= p
                e[l] = g
                e[m] = 0.0
    return 0


def stieltjes_fill(lam, w, alpha, beta, ptable, tol):
    """Discrete Stieltjes recurrence with one reorthogonalization pass.

    ``lam``/``w`` are the atoms and weights; ``alpha`` (kmax,), ``beta``
    (kmax,) and ``ptable`` (n, kmax) are preallocated outputs.  The
    column ``ptable[:, j]`` holds the orthonormal polynomial p_j on the
    support.  Returns (count, truncated): ``count`` diagonal entries were
    produced; ``truncated`` is 1 when the recurrence broke down early.
    """
    n = lam.shape[0]
    kmax = alpha.shape[0]
    ptable[:, 0] = 1.0
    for j in range(kmax):
        pj = ptable[:, j]
        alpha[j] = np.sum(w * lam * pj * pj)
        if j == kmax - 1:
            return kmax, 0
        r = (lam - alpha[j]) * pj
        if j > 0:
            r = r - beta[j - 1] * ptable[:, j - 1]
        for l in range(j + 1):
            c = np.sum(w * r * ptable[:, l])
            r = r - c * ptable[:, l]
        b = np.sqrt(np.sum(w * r * r))
        if b <= tol:
            return j + 1, 1
        beta[j] = b
        ptable[:, j + 1] = r / b
    return kmax, 0


def lanczos_dense_fill(a, u, v, alpha, beta, resid, tol, passes):
    """Lanczos on a dense symmetric matrix with stored basis.

    ``v`` is (kmax+1, n): rows fill with v_0..v_count (one extra row for
    the tail vector).  ``beta`` (kmax,) includes the tail coefficient.
    ``resid`` records, per step, the norm of the correction applied by
    the explicit projection passes beyond the three-term update.
    ``passes`` = 0 disables reorthogonalization, 2 is full.  Returns
    (count, truncated).
    """
    kmax = alpha.shape[0]
    v[0] = u
    for j in range(kmax):
        w = np.dot(a, v[j])
        aj = np.dot(w, v[j])
        alpha[j] = aj
        w = w - aj * v[j]
        if j > 0:
            w = w - beta[j - 1] * v[j - 1]
        corr = np.zeros(j + 1)
        for _ in range(passes):
            c = np.dot(v[: j + 1], w)
            w = w - np.dot(v[: j + 1].T, c)
            corr = corr + c
        resid[j] = np.sqrt(np.sum(corr * corr))
        b = np.sqrt(np.dot(w, w))
        beta[j] = b
        if b <= tol:
            return j + 1, 1
        v[j + 1] = w / b
    return kmax, 0


def lanczos_diag_fill(diag, u, v, alpha, beta, resid, tol, passes):
    """Same as :func:`lanczos_dense_fill` for a diagonal operator."""
    kmax = alpha.shape[0]
    v[0] = u
    for j in range(kmax):
        w = diag * v[j]
        aj = np.dot(w, v[j])
        alpha[j] = aj
        w = w - aj * v[j]
        if j > 0:
            w = w - beta[j - 1] * v[j - 1]
        corr = np.zeros(j + 1)
        for _ in range(passes):
            c = np.dot(v[: j + 1], w)
            w = w - np.dot(v[: j + 1].T, c)
            corr = corr + c
        resid[j] = np.sqrt(np.sum(corr * corr))
        b = np.sqrt(np.dot(w, w))
        beta[j] = b
        if b <= tol:
            return j + 1, 1
        v[j + 1] = w / b
    return kmax, 0


def witness_count(lams, t, log_omega):
    """Count eigenvalues whose mean log-distance to the set ``t`` is >= log omega.

    An eigenvalue equal to some t contributes log 0 = -inf and fails.
    """
    size = t.shape[0]
    acc = np.zeros(lams.shape[0])
    for q in range(size):
        acc = acc + np.log(np.abs(lams - t[q]))
    return int(np.sum(acc >= log_omega * size))


def witness_coord_scan(lams, base_logsum, tsize, cands, log_omega):
    """Scan candidate values for one coordinate of the witness set T.

    ``base_logsum`` holds, per eigenvalue, the sum of log-distances to the
    other (fixed) coordinates of T.  Returns (best index, best count);
    ties resolve to the smallest index so the search is deterministic.
    """
    n = lams.shape[0]
    ncand = cands.shape[0]
    best_idx = 0
    best_count = n + 1
    threshold = log_omega * tsize
    for ci in range(ncand):
        acc = base_logsum + np.log(np.abs(lams - cands[ci]))
        count = int(np.sum(acc >= threshold))
        if count < best_count:
            best_count = count
            best_idx = ci
    return best_idx, best_count
