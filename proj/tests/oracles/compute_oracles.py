"""Independent reference values frozen into the C++ tests.

Uses numpy and cvxpy only; nothing here calls the library.
"""
import itertools
import math

import cvxpy as cp
import numpy as np


def helmert(m):
    u = np.zeros((m, m - 1))
    for c in range(1, m):
        u[:c, c - 1] = 1.0
        u[c, c - 1] = -c
        u[:, c - 1] /= math.sqrt(c * (c + 1))
    return u


def effects(q, d):
    out = [()]
    for s in range(1, d + 1):
        out += list(itertools.combinations(range(q), s))
    return out


def h_k(J, k):
    mat = np.ones((1, 1))
    for i in range(len(J)):  # kron(V_q, ..., V_1): V_1 varies fastest
        v = helmert(J[i]) if i in k else np.ones((J[i], 1)) / math.sqrt(J[i])
        mat = np.kron(v, mat)
    return mat


def stack(J, d):
    return np.hstack([h_k(J, k) for k in effects(len(J), d)])


def order_dims(J):
    q = len(J)
    return [sum(math.prod(J[i] - 1 for i in k) for k in itertools.combinations(range(q), s))
            for s in range(q + 1)]


def losses(J, d, beta, X, Y):
    H = stack(J, d)
    eta = X @ (H @ beta).T
    ni = Y.sum(axis=1)
    lse = np.log(np.exp(eta).sum(axis=1))
    mult = np.mean(-(Y * eta).sum(axis=1) + ni * lse)
    pois = np.mean(-(Y * eta).sum(axis=1) + np.exp(eta).sum(axis=1))
    return mult, pois


def overlap_prox(z, q, thresholds):
    effs = effects(q, q)
    b = cp.Variable(len(effs))
    pen = 0
    for gi, k in enumerate(effs):
        if k == ():
            continue
        members = [fi for fi, f in enumerate(effs) if set(k) <= set(f)]
        pen += thresholds[gi] * cp.norm(b[members], 2)
    cp.Problem(cp.Minimize(0.5 * cp.sum_squares(b - z) + pen)).solve(solver=cp.CLARABEL, tol_gap_abs=1e-10,
                                                                        tol_gap_rel=1e-10, tol_feas=1e-10)
    return b.value


if __name__ == "__main__":
    np.set_printoptions(precision=17)
    print("order dims (2,2,2,3):", order_dims([2, 2, 2, 3]), sum(order_dims([2, 2, 2, 3])))
    print("H_{1} for J=(2,3):", h_k([2, 3], (0,)).ravel())

    J, d = [2, 3], 2
    beta = np.array([[0.0, 0.0], [0.5, -0.25], [0.3, 0.1], [-0.2, 0.4], [0.15, -0.35], [0.05, 0.2]])
    X = np.array([[1.0, 0.5], [1.0, -1.2], [1.0, 0.3], [1.0, 2.0]])
    Y = np.zeros((4, 6))
    Y[0, 1] = 1
    Y[1, 4] = 1
    Y[2, 0] = 2
    Y[2, 5] = 1
    Y[3, 3] = 1
    mult, pois = losses(J, d, beta, X, Y)
    print("mult loss: %.17g" % mult)
    print("pois loss: %.17g" % pois)

    print("hellinger uniform2 vs (1,0): %.17g" % math.sqrt(1 - 1 / math.sqrt(2)))

    z = np.array([0.0, 0.9, -0.4, 0.25, 0.6, -0.05, 0.35, -0.8])
    effs = effects(3, 3)
    t = [0.0 if k == () else 0.3 * math.sqrt(1.0) for k in effs]
    print("overlap prox J=(2,2,2):", ", ".join("%.12g" % v for v in overlap_prox(z, 3, t)))
