"""Graph-coordinate maps on the upper hemisphere and their derivatives.

A point of the upper unit hemisphere is written (s, g(s)) with
g(s) = sqrt(1 - |s|^2) for s in the open unit ball of R^{d-1}.  The gnomonic
difference map

    f_map(s, t) = t / sqrt(1 - |t|^2) - s / sqrt(1 - |s|^2)

is the central object: its columns measure how a tuple of hemisphere points
spreads around a base point, the determinant of those columns is the
Jacobian of the stacked chord map ``psi_natural``, and its inverse is used
to pull ellipsoid coordinates back to the sphere.  Everything here is a
closed-form double-precision formula; the finite-difference tests live next
to the test suite.
"""

import numpy as np

_DOMAIN_PAD = 1e-9


class DomainError(ValueError):
    """Argument outside the open unit ball."""


def _check_ball(v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if np.linalg.norm(v) >= 1.0 - _DOMAIN_PAD:
        raise DomainError(f"|{name}| must be < 1, got {np.linalg.norm(v):.6g}")
    return v


def g_height(s) -> float:
    """g(s) = sqrt(1 - |s|^2), the hemisphere graph function."""
    s = _check_ball(s, "s")
    return float(np.sqrt(1.0 - np.dot(s, s)))


def gnomonic(t) -> np.ndarray:
    """t / sqrt(1 - |t|^2): central projection of (t, g(t)) to the tangent
    plane at the pole."""
    t = _check_ball(t, "t")
    return t / np.sqrt(1.0 - np.dot(t, t))


def gnomonic_inverse(v) -> np.ndarray:
    """Inverse of ``gnomonic``: v / sqrt(1 + |v|^2)."""
    v = np.asarray(v, dtype=float)
    return v / np.sqrt(1.0 + np.dot(v, v))


def f_map(s, t) -> np.ndarray:
    """gnomonic(t) - gnomonic(s)."""
    return gnomonic(t) - gnomonic(s)


def f_map_jacobian(s, t) -> np.ndarray:
    """d/dt of f_map(s, t):  (1-|t|^2)^{-1/2} (I + t t^T / (1-|t|^2))."""
    t = _check_ball(t, "t")
    q = 1.0 - np.dot(t, t)
    return (np.eye(t.shape[0]) + np.outer(t, t) / q) / np.sqrt(q)


def f_map_inverse(s, w) -> np.ndarray:
    """Solve f_map(s, t) = w for t.

    The gnomonic projection inverts in closed form, so no iteration is
    needed; the residual is checked against 1e-12 anyway.
    """
    s = _check_ball(s, "s")
    w = np.asarray(w, dtype=float)
    t = gnomonic_inverse(w + gnomonic(s))
    res = np.linalg.norm(f_map(s, t) - w)
    if not res <= 1e-12 * max(1.0, np.linalg.norm(w)):
        raise DomainError(f"f_map inversion residual {res:.3e}")
    return t


def phi(s, t) -> np.ndarray:
    """Chord of the hemisphere graph: (t - s, g(t) - g(s)) in R^d."""
    s = _check_ball(s, "s")
    t = _check_ball(t, "t")
    return np.append(t - s, g_height(t) - g_height(s))


def psi_natural(s, ts) -> np.ndarray:
    """Stacked chords: block j is phi(s, t_j); a point of R^{d(d-1)}."""
    return np.concatenate([phi(s, t) for t in ts])


def inflation_det(s, ts) -> float:
    """det of the matrix whose columns are f_map(s, t_j).

    This equals the Jacobian determinant of ``psi_natural`` at (s, ts),
    which is what makes the stacked chord map measure-expanding.
    """
    cols = np.column_stack([f_map(s, t) for t in ts])
    if cols.shape[0] != cols.shape[1]:
        raise DomainError("need d-1 points t_j for the inflation determinant")
    return float(np.linalg.det(cols))


def hessian_g(s) -> np.ndarray:
    """D^2 g(s) = -(1-|s|^2)^{-1/2} (I + s s^T / (1-|s|^2)); invertible."""
    s = _check_ball(s, "s")
    q = 1.0 - np.dot(s, s)
    return -(np.eye(s.shape[0]) + np.outer(s, s) / q) / np.sqrt(q)


def slicing_integrand(s, t, shape: np.ndarray, nu: np.ndarray) -> float:
    """|< A (D^2 g(s))^{-1} f_map(s, t), nu >| for a shape matrix A and a
    unit vector nu; the fiber-length density of the slicing bound."""
    H = hessian_g(s)
    v = np.asarray(shape, dtype=float) @ np.linalg.solve(H, f_map(s, t))
    return float(abs(np.dot(v, np.asarray(nu, dtype=float))))


# ---------------------------------------------------------------------------
# Unit-sphere intersection counting (d = 2, 3)
# ---------------------------------------------------------------------------

_INTERSECT_TOL = 1e-9


def sphere_intersection_count(centers, tol: float = _INTERSECT_TOL):
    """Common points of the unit spheres centered at 0, x_1, ..., x_{d-1}.

    Returns (count, points, degenerate).  Closed-form circle/sphere algebra
    for d in {2, 3}; a degenerate configuration (coincident or collinear
    centers) is flagged and reports no generic count.
    """
    pts = np.atleast_2d(np.asarray(centers, dtype=float))
    d = pts.shape[1]
    if pts.shape[0] != d - 1:
        raise DomainError(f"need {d - 1} nonzero centers for d={d}")
    if d == 2:
        return _circle_pair(pts[0], tol)
    if d == 3:
        return _sphere_triple(pts[0], pts[1], tol)
    raise DomainError("intersection counting is implemented for d in {2, 3}")


def _circle_pair(x, tol):
    # unit circles at 0 and x meet on the line  w . x = |x|^2 / 2
    nx = np.linalg.norm(x)
    if nx <= tol:
        return 0, np.zeros((0, 2)), True
    h2 = 1.0 - (nx / 2.0) ** 2
    mid = x / 2.0
    if h2 > tol:
        h = np.sqrt(h2)
        perp = np.array([-x[1], x[0]]) / nx
        sols = np.vstack([mid + h * perp, mid - h * perp])
        return 2, sols, False
    if h2 > -tol:
        return 1, mid[None, :], False
    return 0, np.zeros((0, 2)), False


def _sphere_triple(x1, x2, tol):
    # subtracting |w|=1 from |w - x_i|=1 leaves two planes w . x_i = |x_i|^2/2
    n1, n2 = np.linalg.norm(x1), np.linalg.norm(x2)
    cross = np.cross(x1, x2)
    if n1 <= tol or n2 <= tol or np.linalg.norm(cross) <= tol * max(n1 * n2, 1.0):
        return 0, np.zeros((0, 3)), True
    G = np.array([[np.dot(x1, x1), np.dot(x1, x2)],
                  [np.dot(x1, x2), np.dot(x2, x2)]])
    rhs = np.array([np.dot(x1, x1) / 2.0, np.dot(x2, x2) / 2.0])
    a, b = np.linalg.solve(G, rhs)
    base = a * x1 + b * x2
    u = cross / np.linalg.norm(cross)
    h2 = 1.0 - np.dot(base, base)
    if h2 > tol:
        h = np.sqrt(h2)
        sols = np.vstack([base + h * u, base - h * u])
        return 2, sols, False
    if h2 > -tol:
        return 1, base[None, :], False
    return 0, np.zeros((0, 3)), False


def intersection_residual(centers, point) -> float:
    """Max deviation of ``point`` from all the unit spheres in the family."""
    pts = np.atleast_2d(np.asarray(centers, dtype=float))
    w = np.asarray(point, dtype=float)
    res = abs(np.linalg.norm(w) - 1.0)
    for c in pts:
        res = max(res, abs(np.linalg.norm(w - c) - 1.0))
    return float(res)
