import numpy as np


def central_grad(f, x, h=1e-6):
    """Central-difference gradient of a scalar function of a vector."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for k in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        g[k] = (f(xp) - f(xm)) / (2 * h)
    return g


def central_jacobian(f, x, h=1e-6):
    """Central-difference Jacobian of a vector function, shape (out, in)."""
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        cols.append((np.asarray(f(xp)) - np.asarray(f(xm))) / (2 * h))
    return np.stack(cols, axis=-1)


def central_hessian(f, x, h=1e-4):
    """Central second differences of a scalar function, shape (in, in)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    H = np.zeros((n, n))
    E = np.eye(n) * h
    f0 = f(x)
    for j in range(n):
        H[j, j] = (f(x + 2 * E[j]) - 2 * f0 + f(x - 2 * E[j])) / (4 * h * h)
        for k in range(j + 1, n):
            val = (
                f(x + E[j] + E[k])
                - f(x + E[j] - E[k])
                - f(x - E[j] + E[k])
                + f(x - E[j] - E[k])
            ) / (4 * h * h)
            H[j, k] = H[k, j] = val
    return H


def central_cross_hessian(f, y, u, h=1e-4):
    """Mixed second differences d^2 f / dy_j du_k, shape (len(y), len(u))."""
    y = np.asarray(y, dtype=float)
    u = np.asarray(u, dtype=float)
    H = np.zeros((y.size, u.size))
    for j in range(y.size):
        for k in range(u.size):
            yp, ym = y.copy(), y.copy()
            yp[j] += h
            ym[j] -= h
            up, um = u.copy(), u.copy()
            up[k] += h
            um[k] -= h
            H[j, k] = (f(yp, up) - f(yp, um) - f(ym, up) + f(ym, um)) / (4 * h * h)
    return H


def rel_err(a, b, floor=1e-8):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.abs(a - b).max() / max(np.abs(b).max(), floor)
