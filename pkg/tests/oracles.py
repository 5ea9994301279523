"""Independent reference computations used by the tests.

Nothing here calls into the package's numerical kernels.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
import networkx as nx
from scipy.integrate import solve_ivp
from scipy.spatial.distance import pdist


def graded_lex_exponents(d: int, D: int) -> list[tuple[int, ...]]:
    """Brute-force enumeration, then sort by (degree, lex descending)."""
    out = [a for a in itertools.product(range(D + 1), repeat=d) if sum(a) <= D]
    return sorted(out, key=lambda a: (sum(a), tuple(-x for x in a)))


def monomials(points: np.ndarray, exps) -> np.ndarray:
    return np.array([[math.prod(p[j] ** a[j] for j in range(len(a))) for a in exps] for p in points])


def gram_null_space(M: np.ndarray, tol: float) -> np.ndarray:
    """Null vectors of M from eigh(M^T M): eigenvalue <= tol^2 * largest."""
    w, V = np.linalg.eigh(M.T @ M)
    keep = w <= tol ** 2 * w.max()
    return V[:, keep]


def rref_basis(vectors: np.ndarray) -> np.ndarray:
    """Canonical basis of span(columns): reduced row echelon form of the transpose."""
    A = np.array(vectors, dtype=float).T.copy()
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(A[r:, c])))
        if abs(A[p, c]) < 1e-10:
            continue
        A[[r, p]] = A[[p, r]]
        A[r] /= A[r, c]
        for i in range(rows):
            if i != r:
                A[i] -= A[i, c] * A[r]
        r += 1
    return A[:r]


def reference_flow(func, x0, t_eval, rtol=1e-12, atol=1e-12):
    sol = solve_ivp(lambda t, y: func(y), (0.0, float(t_eval[-1])), np.asarray(x0, float),
                    method="DOP853", t_eval=t_eval, rtol=rtol, atol=atol)
    assert sol.success
    return sol.y.T


def pair_counts(points: np.ndarray, radii) -> np.ndarray:
    dist = pdist(points)
    return np.array([int(np.sum(dist <= r)) for r in radii])


def box_count(points: np.ndarray, eps: float) -> int:
    """Distinct cells of the grid anchored at -1 (points already in [-1, 1])."""
    cells = max(1, math.ceil(2.0 / eps - 1e-9))
    idx = np.clip(np.floor((points + 1.0) / eps).astype(int), 0, cells - 1)
    return len({tuple(row) for row in idx})


def scc_count(n: int, src, dst) -> int:
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    g.add_edges_from(zip(src, dst))
    return nx.number_strongly_connected_components(g)


def scc_partition(n: int, src, dst) -> set[frozenset[int]]:
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    g.add_edges_from(zip(src, dst))
    return {frozenset(c) for c in nx.strongly_connected_components(g)}


def central_jacobian(func, u, h=1e-6) -> np.ndarray:
    u = np.asarray(u, float)
    cols = []
    for j in range(u.shape[0]):
        e = np.zeros_like(u)
        e[j] = h * max(1.0, abs(u[j]))
        cols.append((func(u + e) - func(u - e)) / (2 * e[j]))
    return np.stack(cols, axis=1)


def central_hessian_v(H, v, u, h=1e-4) -> np.ndarray:
    v = np.asarray(v, float)
    d = v.shape[0]
    out = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            ei = np.zeros(d)
            ej = np.zeros(d)
            ei[i] = h
            ej[j] = h
            out[i, j] = (H(v + ei + ej, u) - H(v + ei - ej, u) - H(v - ei + ej, u) + H(v - ei - ej, u)) / (4 * h * h)
    return out


def gram_null_space_mp(points: np.ndarray, exps, tol: float, dps: int = 60) -> np.ndarray:
    """Exhaustive Gram-matrix null space in extended precision.

    Forms ``G = M^T M`` exactly from the float64 points and keeps the
    eigenvectors with ``lambda <= tol^2 * lambda_max``, the same cut as
    ``sigma / sigma_max <= tol``.  Float64 cannot do this: squaring the
    condition number pushes null eigenvalues below round-off.
    """
    import mpmath

    with mpmath.workdps(dps):
        rows = [[mpmath.fprod(mpmath.mpf(float(p[j])) ** a[j] for j in range(len(a))) for a in exps]
                for p in points]
        M = mpmath.matrix(rows)
        G = M.T * M
        E, Q = mpmath.eigsy(G)
        lmax = max(E)
        keep = [k for k in range(len(E)) if E[k] <= mpmath.mpf(tol) ** 2 * lmax]
        return np.array([[float(Q[i, k]) for k in keep] for i in range(G.rows)]).reshape(G.rows, len(keep))


def projector(V: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto span(columns); sign- and basis-free."""
    q, _ = np.linalg.qr(V)
    return q @ q.T
