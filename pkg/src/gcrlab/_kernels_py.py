"""Pure-numpy reference kernels.

Every function here has a twin with the same signature in the compiled
``_kernels`` extension. Component axes come first, grid axes last; the
compiled versions require the grid axes to be flattened into one trailing
axis, which :mod:`gcrlab.kernels` takes care of.

Index names follow the GCR system: ``h[a, i, j]`` is the second fundamental
form, ``kappa[a, l, b]`` the normal connection, ``gamma[m, i, j]`` the
Christoffel symbols, ``ginv[m, n]`` the inverse metric.
"""

import numpy as np


def central_diff(values, axis, dx):
    forward = np.roll(values, -1, axis=axis)
    backward = np.roll(values, 1, axis=axis)
    return (forward - backward) / (2.0 * dx)


def gauss_quadratic(h):
    """``sum_a h^a_ji h^a_kl - h^a_ki h^a_jl`` indexed ``[i, j, k, l]``."""
    v = np.einsum("aji...,akl...->ijkl...", h, h)
    return v - v.swapaxes(1, 2)


def codazzi_algebra(h, kappa, gamma):
    """Derivative-free part of the Codazzi half-tensor, indexed ``[a, j, k, l]``.

    ``Gamma^m_lj h^a_km + kappa^a_kb h^b_lj``; the residual is this plus
    ``d_k h^a_lj``, antisymmetrized in ``(k, l)``.
    """
    out = np.einsum("mlj...,akm...->ajkl...", gamma, h)
    out += np.einsum("akb...,blj...->ajkl...", kappa, h)
    return out


def ricci_algebra(h, kappa, ginv):
    """Derivative-free part of the Ricci half-tensor, indexed ``[a, b, k, l]``.

    ``-g^mn h^a_ml h^b_kn + kappa^a_kc kappa^c_lb``.
    """
    hg = np.einsum("mn...,bkn...->bkm...", ginv, h)
    out = -np.einsum("aml...,bkm...->abkl...", h, hg)
    out += np.einsum("akc...,clb...->abkl...", kappa, kappa)
    return out


def gauss_adjoint(s, h):
    """Pull back a multiplier ``s[i, j, k, l]`` on ``V_ijkl = h^a_ji h^a_kl``."""
    grad = np.einsum("ijkl...,akl...->aji...", s, h)
    grad += np.einsum("ijkl...,aji...->akl...", s, h)
    return grad


def codazzi_adjoint(s, h, kappa, gamma):
    """Pull back ``s[a, j, k, l]`` through :func:`codazzi_algebra`.

    Returns ``(grad_h, grad_kappa)``.
    """
    grad_h = np.einsum("ajkl...,mlj...->akm...", s, gamma)
    grad_h += np.einsum("ajkl...,akb...->blj...", s, kappa)
    grad_kappa = np.einsum("ajkl...,blj...->akb...", s, h)
    return grad_h, grad_kappa


def ricci_adjoint(s, h, kappa, ginv):
    """Pull back ``s[a, b, k, l]`` through :func:`ricci_algebra`."""
    hg_b = np.einsum("mn...,bkn...->bkm...", ginv, h)
    grad_h = -np.einsum("abkl...,bkm...->aml...", s, hg_b)
    hg_a = np.einsum("mn...,aml...->aln...", ginv, h)
    grad_h -= np.einsum("abkl...,aln...->bkn...", s, hg_a)
    grad_kappa = np.einsum("abkl...,clb...->akc...", s, kappa)
    grad_kappa += np.einsum("abkl...,akc...->clb...", s, kappa)
    return grad_h, grad_kappa


def power_density(values, ncomp, p):
    """Per-node ``(sum of squares)^(p/2)`` and its gradient factor.

    ``values`` has ``ncomp`` leading component axes. Returns ``(density,
    factor)`` with ``d density / d values = factor * values``.
    """
    axes = tuple(range(ncomp))
    sq = np.sum(values * values, axis=axes)
    density = sq ** (0.5 * p)
    factor = p * sq ** (0.5 * p - 1.0)
    return density, factor
