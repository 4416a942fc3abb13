"""Pure-Python kernels. Reference behaviour for the compiled ``_kernels``."""

import math

import numpy as np

MAX_LLL_ITER = 10_000


def _gram_schmidt(B, Q, n):
    G = [[0.0] * n for _ in range(n)]
    for i in range(n):
        bi = B[i]
        for j in range(i + 1):
            bj = B[j]
            s = 0.0
            for r in range(n):
                if bi[r] == 0:
                    continue
                qr = Q[r]
                t = 0.0
                for c in range(n):
                    t += qr[c] * bj[c]
                s += bi[r] * t
            G[i][j] = G[j][i] = s
    mu = [[0.0] * n for _ in range(n)]
    bs = [0.0] * n
    for i in range(n):
        for j in range(i):
            s = G[i][j]
            for t in range(j):
                s -= mu[j][t] * mu[i][t] * bs[t]
            mu[i][j] = s / bs[j]
        s = G[i][i]
        for t in range(i):
            s -= mu[i][t] * mu[i][t] * bs[t]
        bs[i] = s
    return mu, bs


def lll_reduce_gram(Q, delta=0.75):
    """LLL-reduce the standard basis of ``Z^n`` under the form ``a^T Q b``.

    Returns the reduced basis as the rows of an integer matrix.
    """
    Q = [[float(x) for x in row] for row in np.asarray(Q, dtype=float)]
    n = len(Q)
    B = [[int(i == j) for j in range(n)] for i in range(n)]
    k = 1
    it = 0
    while k < n:
        it += 1
        if it > MAX_LLL_ITER:
            raise RuntimeError("LLL did not converge")
        for j in range(k - 1, -1, -1):
            mu, bs = _gram_schmidt(B, Q, n)
            q = round(mu[k][j])
            if q:
                bk, bj = B[k], B[j]
                for c in range(n):
                    bk[c] -= q * bj[c]
        mu, bs = _gram_schmidt(B, Q, n)
        if bs[k] >= (delta - mu[k][k - 1] ** 2) * bs[k - 1]:
            k += 1
        else:
            B[k], B[k - 1] = B[k - 1], B[k]
            k = max(k - 1, 1)
    return np.array(B, dtype=np.int64)


def successive_sigma2(F, A):
    """Conditional variances ``a_k^T Q_k a_k`` of the successive recursion.

    ``Q_k = F_k F_k^T`` is carried in square-root form: with ``w = F_k^T a_k``
    and ``s = |w|^2``, ``F_{k+1} = F_k (I - w w^T / s)``, which equals the
    rank-one Schur update ``Q_k - (Q_k a)(Q_k a)^T / s`` and stays positive
    semidefinite under round-off. A zero variance stops conditioning on that
    row.
    """
    Fk = [[float(x) for x in row] for row in np.asarray(F, dtype=float)]
    n = len(Fk)
    out = []
    for a in np.asarray(A).tolist():
        w = [sum(Fk[r][c] * a[r] for r in range(n)) for c in range(n)]
        s = sum(x * x for x in w)
        out.append(s)
        if s <= 0.0 or not math.isfinite(s):
            continue
        for r in range(n):
            t = sum(Fk[r][c] * w[c] for c in range(n)) / s
            row = Fk[r]
            for c in range(n):
                row[c] -= t * w[c]
    return np.array(out)
