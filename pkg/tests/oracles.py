"""Independent straight-line re-implementations used as test oracles.

Everything here loops over explicit index tuples and uses only numpy
primitives (``np.roll``, elementwise arithmetic, ``np.linalg.inv``), so it
shares no code path with the package.
"""

import itertools

import numpy as np


def d_central(f, axis, dx):
    """Periodic central difference along grid ``axis`` (0-based, grid-only array)."""
    return (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)) / (2.0 * dx)


def inverse(g):
    d = g.shape[0]
    mats = np.moveaxis(g.reshape(d, d, -1), -1, 0)
    inv = np.linalg.inv(mats)
    return np.moveaxis(inv, 0, -1).reshape(g.shape)


def christoffel(g, dx):
    """``G[k, i, j] = 1/2 g^kl (d_j g_il + d_i g_jl - d_l g_ij)`` by explicit loops."""
    d = g.shape[0]
    ginv = inverse(g)
    dg = [[[d_central(g[i, j], l, dx[l]) for l in range(d)] for j in range(d)] for i in range(d)]
    out = np.zeros((d, d, d) + g.shape[2:])
    for k, i, j, l in itertools.product(range(d), repeat=4):
        out[k, i, j] += 0.5 * ginv[k, l] * (dg[i][l][j] + dg[j][l][i] - dg[i][j][l])
    return out


def riemann(g, gam, dx):
    """``R_ijkl = g_lm (d_k G^m_ij - d_j G^m_ik + G^n_ij G^m_nk - G^n_ik G^m_nj)``."""
    d = g.shape[0]
    out = np.zeros((d,) * 4 + g.shape[2:])
    for i, j, k, l in itertools.product(range(d), repeat=4):
        acc = 0.0
        for m in range(d):
            t = d_central(gam[m, i, j], k, dx[k]) - d_central(gam[m, i, k], j, dx[j])
            for n in range(d):
                t = t + gam[n, i, j] * gam[m, n, k] - gam[n, i, k] * gam[m, n, j]
            acc = acc + g[l, m] * t
        out[i, j, k, l] = acc
    return out


def gauss(h, R):
    n_co, d = h.shape[0], h.shape[1]
    out = np.zeros((d,) * 4 + h.shape[3:])
    for i, j, k, l in itertools.product(range(d), repeat=4):
        acc = -R[i, j, k, l]
        for a in range(n_co):
            acc = acc + h[a, j, i] * h[a, k, l] - h[a, k, i] * h[a, j, l]
        out[i, j, k, l] = acc
    return out


def codazzi(h, kappa, gam, dx):
    n_co, d = h.shape[0], h.shape[1]
    out = np.zeros((n_co, d, d, d) + h.shape[3:])
    for a, j, k, l in itertools.product(range(n_co), range(d), range(d), range(d)):
        acc = d_central(h[a, l, j], k, dx[k]) - d_central(h[a, k, j], l, dx[l])
        for m in range(d):
            acc = acc + gam[m, l, j] * h[a, k, m] - gam[m, k, j] * h[a, l, m]
        for b in range(n_co):
            acc = acc + kappa[a, k, b] * h[b, l, j] - kappa[a, l, b] * h[b, k, j]
        out[a, j, k, l] = acc
    return out


def ricci(h, kappa, ginv, dx):
    n_co, d = h.shape[0], h.shape[1]
    out = np.zeros((n_co, n_co, d, d) + h.shape[3:])
    for a, b, k, l in itertools.product(range(n_co), range(n_co), range(d), range(d)):
        acc = d_central(kappa[a, l, b], k, dx[k]) - d_central(kappa[a, k, b], l, dx[l])
        for m, n in itertools.product(range(d), repeat=2):
            acc = acc - ginv[m, n] * (h[a, m, l] * h[b, k, n] - h[a, m, k] * h[b, l, n])
        for c in range(n_co):
            acc = acc + kappa[a, k, c] * kappa[c, l, b] - kappa[a, l, c] * kappa[c, k, b]
        out[a, b, k, l] = acc
    return out


def objective(h, kappa, sqrt_det, cell, p):
    hh = sum(h[idx] ** 2 for idx in np.ndindex(*h.shape[:3]))
    kk = sum(kappa[idx] ** 2 for idx in np.ndindex(*kappa.shape[:3]))
    return float(np.sum(sqrt_det * (hh ** (p / 2) + kk ** (p / 2))) * cell)


def penalty(h, kappa, g, gam, R, dx, cell):
    """Sum of squared weighted L2 norms: Gauss over all tuples, the others over k < l."""
    d = g.shape[0]
    w = np.sqrt(np.linalg.det(np.moveaxis(g.reshape(d, d, -1), -1, 0))).reshape(g.shape[2:]) * cell
    ginv = inverse(g)
    total = float(np.sum(gauss(h, R) ** 2 * w))
    c = codazzi(h, kappa, gam, dx)
    r = ricci(h, kappa, ginv, dx)
    for k, l in itertools.combinations(range(d), 2):
        total += float(np.sum(c[:, :, k, l] ** 2 * w)) + float(np.sum(r[:, :, k, l] ** 2 * w))
    return total


def random_symmetric_fields(rng, n_co, d, shape, scale=1.0):
    h = rng.standard_normal((n_co, d, d) + shape) * scale
    h = 0.5 * (h + h.swapaxes(1, 2))
    k = rng.standard_normal((n_co, d, n_co) + shape) * scale
    k = 0.5 * (k - k.swapaxes(0, 2))
    return h, k


def smooth_random_fields(rng, n_co, d, grid, modes=2, scale=0.3):
    """Symmetric fields built from a few low Fourier modes on a periodic box."""
    thetas = [2 * np.pi * c / L for c, L in zip(grid.coords, grid.lengths)]

    def field(shape):
        out = np.zeros(shape + grid.shape)
        for idx in np.ndindex(*shape):
            acc = np.zeros(grid.shape)
            for _ in range(modes):
                k = rng.integers(-2, 3, size=d)
                phase = sum(ki * t for ki, t in zip(k, thetas))
                acc = acc + scale * rng.standard_normal() * np.cos(phase + rng.uniform(0, 2 * np.pi))
            out[idx] = acc
        return out

    h = field((n_co, d, d))
    h = 0.5 * (h + h.swapaxes(1, 2))
    k = field((n_co, d, n_co))
    k = 0.5 * (k - k.swapaxes(0, 2))
    return h, k


def torus_christoffel(x1):
    """Closed forms for ``g = diag(1, 1, (2 + cos x1)^2)``: (G^1_33, G^3_13)."""
    return (2 + np.cos(x1)) * np.sin(x1), -np.sin(x1) / (2 + np.cos(x1))


def torus_surface_h(x1, R=2.0, r=1.0):
    """Second fundamental form of the torus of revolution (u = x1, v = x3) with outward normal."""
    return -r * np.ones_like(x1), -(R + r * np.cos(x1)) * np.cos(x1)
