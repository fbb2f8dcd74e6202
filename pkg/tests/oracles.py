"""Independent reference implementations used only by the tests.

None of these import from the paths they check; they work on dense arrays
and explicit loops.
"""
from fractions import Fraction

import numpy as np


def adjacency(relations, a, b):
    if (a, b) in relations:
        return relations[(a, b)]
    return relations[(b, a)].T


def path_counts(relations, types, start):
    """Dict end -> number of path instances from ``start`` along ``types`` (explicit DFS)."""
    steps = list(zip(types[:-1], types[1:]))
    counts = {}
    stack = [(start, 0)]
    while stack:
        node, depth = stack.pop()
        if depth == len(steps):
            counts[node] = counts.get(node, 0) + 1
            continue
        a, b = steps[depth]
        for nxt in np.flatnonzero(adjacency(relations, a, b)[node]):
            stack.append((int(nxt), depth + 1))
    return counts


def count_paths(relations, types, start, end):
    return path_counts(relations, types, start).get(end, 0)


def pathsim_oracle(relations, types, counts):
    """Exact PathSim matrix as Fractions; rows of objects with no self path stay zero."""
    n = counts[types[0]]
    p = [path_counts(relations, types, i) for i in range(n)]
    out = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        pii = p[i].get(i, 0)
        for j, pij in p[i].items():
            pjj = p[j].get(j, 0)
            if pii > 0 and pjj > 0:
                out[i][j] = Fraction(2 * pij, pii + pjj)
    return out


def central_difference(f, X, h=1e-5):
    G = np.zeros_like(X)
    for idx in np.ndindex(X.shape):
        old = X[idx]
        X[idx] = old + h
        fp = f()
        X[idx] = old - h
        fm = f()
        X[idx] = old
        G[idx] = (fp - fm) / (2 * h)
    return G


def dense_objective(U, V, R, mask, lam1, lam2, alpha=0.0, beta=0.0, user_reg=None, item_reg=None):
    """Loop-based objective. ``*_reg`` is ('average', W) or ('individual', S) with dense W/S."""
    f = 0.5 * np.sum(mask * (R - U @ V.T) ** 2)

    def reg(mode, W, X):
        total = 0.0
        n = X.shape[0]
        if mode == "average":
            for i in range(n):
                s = W[i].sum()
                if s > 0:
                    avg = sum(W[i, j] * X[j] for j in range(n)) / s
                    total += np.sum((X[i] - avg) ** 2)
        else:
            for i in range(n):
                for j in range(n):
                    if i != j:
                        total += W[i, j] * np.sum((X[i] - X[j]) ** 2)
        return total

    if user_reg is not None:
        f += 0.5 * alpha * reg(user_reg[0], user_reg[1], U)
    if item_reg is not None:
        f += 0.5 * beta * reg(item_reg[0], item_reg[1], V)
    return f + 0.5 * lam1 * np.sum(U * U) + 0.5 * lam2 * np.sum(V * V)


def standalone_pmf(R, mask, U0, V0, eta, lam1, lam2, iters, eps=0.0, halving=False, max_halvings=20):
    """Plain dense gradient descent on the unregularized-by-similarity objective."""
    U, V = U0.copy(), V0.copy()

    def obj(U, V):
        E = mask * (R - U @ V.T)
        return 0.5 * np.sum(E * E) + 0.5 * lam1 * np.sum(U * U) + 0.5 * lam2 * np.sum(V * V)

    f = obj(U, V)
    trace = []
    for _ in range(iters):
        E = mask * (U @ V.T - R)
        gU = E @ V + lam1 * U
        gV = E.T @ U + lam2 * V
        step = eta
        for attempt in range(max_halvings + 1):
            U1, V1 = U - step * gU, V - step * gV
            f1 = obj(U1, V1)
            if not halving or f1 <= f:
                break
            if attempt < max_halvings:
                step /= 2
        delta = np.sum((U1 - U) ** 2) + np.sum((V1 - V) ** 2)
        U, V, f = U1, V1, f1
        trace.append(f)
        if delta < eps:
            break
    return U, V, trace


def brute_topk(S, k):
    """Top-k lists by sorting each row; ties go to the lower index."""
    n = S.shape[0]
    plus = []
    for i in range(n):
        cands = [(-S[i, j], j) for j in range(n) if j != i and S[i, j] != 0]
        cands.sort()
        plus.append([j for _, j in cands[:k]])
    minus = [sorted(i for i in range(n) if j in plus[i]) for j in range(n)]
    return plus, minus
