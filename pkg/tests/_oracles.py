"""Independent reference computations used by several test modules."""

import itertools

import numpy as np


def _plane_basis(k: int) -> np.ndarray:
    """Orthonormal basis (k x (k-1)) of the hyperplane orthogonal to ones(k)."""
    a = np.eye(k)[:, : k - 1] - 1.0 / k
    q, _ = np.linalg.qr(a)
    return q


def _support_points(k: int, l1: float, l2: float, res: int) -> np.ndarray:
    """Points on {sum = l1, norm = l2} in R^k, on a grid of the (k-2)-sphere."""
    r2 = l2 * l2 - l1 * l1 / k
    if r2 < 0:
        return np.empty((0, k))
    r = np.sqrt(r2)
    center = np.full(k, l1 / k)
    if k == 2:
        dirs = np.array([[1.0], [-1.0]])
    elif k == 3:
        t = np.linspace(0.0, 2 * np.pi, 8 * res, endpoint=False)
        dirs = np.column_stack([np.cos(t), np.sin(t)])
    elif k == 4:
        th = np.linspace(0.0, np.pi, 2 * res)
        ph = np.linspace(0.0, 2 * np.pi, 4 * res, endpoint=False)
        T, P = np.meshgrid(th, ph, indexing="ij")
        dirs = np.column_stack(
            [(np.sin(T) * np.cos(P)).ravel(), (np.sin(T) * np.sin(P)).ravel(), np.cos(T).ravel()]
        )
    else:
        raise ValueError("brute force supports length <= 4")
    pts = center + r * dirs @ _plane_basis(k).T
    return pts[np.all(pts >= -1e-12, axis=1)]


def brute_force_projection(v, target: float, res: int = 400) -> tuple[np.ndarray, float]:
    """Grid search for the closest non-negative point with the same L2 norm
    as ``v`` and Hoyer sparseness ``target``.  Every support set is searched,
    so coordinates that vanish at the optimum are handled exactly."""
    v = np.asarray(v, dtype=float)
    n = v.size
    l2 = float(np.linalg.norm(v))
    l1 = l2 * (np.sqrt(n) - target * (np.sqrt(n) - 1.0))
    best, best_d = None, np.inf
    for k in range(1, n + 1):
        for support in itertools.combinations(range(n), k):
            if k == 1:
                if abs(l1 - l2) > 1e-12:
                    continue
                pts = np.array([[l2]])
            else:
                pts = _support_points(k, l1, l2, res)
            if pts.size == 0:
                continue
            full = np.zeros((pts.shape[0], n))
            full[:, support] = np.maximum(pts, 0.0)
            d = np.sum((full - v) ** 2, axis=1)
            i = int(np.argmin(d))
            if d[i] < best_d:
                best, best_d = full[i], float(d[i])
    return best, best_d


def match_components(true_cols: np.ndarray, fit_cols: np.ndarray) -> tuple:
    """Permutation ``p`` maximizing sum_k cos(true[:, k], fit[:, p[k]])."""
    def unit(a):
        n = np.linalg.norm(a, axis=0)
        return a / np.where(n > 0, n, 1.0)

    sim = unit(true_cols).T @ unit(fit_cols)
    c = sim.shape[0]
    best = max(itertools.permutations(range(c)), key=lambda p: sum(sim[k, p[k]] for k in range(c)))
    return best


def planted(n: int, f: int, c: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    return rng.random((n, c)), rng.random((f, c))
