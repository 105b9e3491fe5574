"""Batched MLP passes shared by both kernel backends.

Matrix products and tanh run through numpy (BLAS / SIMD libm); the
per-element jet algebra is delegated to the selected backend module.

Jets of each sample point are stacked along the row axis: rows [0, n)
hold values, [n, 2n) d/dt, [2n, 3n) d/dx, [3n, 4n) d2/dx2, so every
layer is a single GEMM.

`theta` layout (shared with fisher_pinn.network): per layer, the weight
matrix (fan_out, fan_in) flattened row-major, then the biases.
"""

import numpy as np


def _offsets(sizes):
    offs = []
    o = 0
    for l in range(len(sizes) - 1):
        offs.append(o)
        o += sizes[l] * sizes[l + 1] + sizes[l + 1]
    return offs


def _layer(theta, sizes, offs, l):
    fi = int(sizes[l])
    fo = int(sizes[l + 1])
    o = offs[l]
    w = theta[o:o + fi * fo].reshape(fo, fi)
    b = theta[o + fi * fo:o + fi * fo + fo]
    return w, b, o, fi, fo


def mlp_value_forward(ops, theta, sizes, t, x):
    """Batched network values u(t_i, x_i) plus activation caches."""
    n = t.shape[0]
    nh = len(sizes) - 2
    offs = _offsets(sizes)
    a0 = np.zeros((n, int(sizes[0])))
    a0[:, 0] = t
    a0[:, 1] = x
    cache = np.empty((nh, n, int(sizes[1])))
    a_prev = a0
    for l in range(nh):
        w, b, _, _, _ = _layer(theta, sizes, offs, l)
        np.tanh(np.dot(a_prev, w.T) + b, out=cache[l])
        a_prev = cache[l]
    w, b, _, _, _ = _layer(theta, sizes, offs, nh)
    u = np.dot(a_prev, w.T)[:, 0] + b[0]
    return u, a0, cache


def mlp_value_backward(ops, theta, sizes, a0, cache, ubar):
    """Parameter gradient of sum_i ubar_i * u(t_i, x_i)."""
    n = ubar.shape[0]
    nh = len(sizes) - 2
    offs = _offsets(sizes)
    grad = np.zeros_like(theta)

    w, _, o, fi, _ = _layer(theta, sizes, offs, nh)
    ub = ubar.reshape(n, 1)
    grad[o:o + fi] = np.dot(ub.T, cache[nh - 1])[0]
    grad[o + fi] = np.sum(ubar)
    sbar = np.dot(ub, w)

    for l in range(nh - 1, -1, -1):
        s = cache[l]
        zbar = (1.0 - s * s) * sbar
        a_prev = a0 if l == 0 else cache[l - 1]
        wl, _, o, fi, fo = _layer(theta, sizes, offs, l)
        grad[o:o + fi * fo] = np.dot(zbar.T, a_prev).ravel()
        grad[o + fi * fo:o + fi * fo + fo] = np.sum(zbar, axis=0)
        if l > 0:
            sbar = np.dot(zbar, wl)
    return grad


def mlp_jet_forward(ops, theta, sizes, t, x):
    """Batched (u, u_t, u_x, u_xx) plus the caches backward needs."""
    n = t.shape[0]
    nh = len(sizes) - 2
    offs = _offsets(sizes)
    a0 = np.zeros((4 * n, int(sizes[0])))
    a0[:n, 0] = t
    a0[:n, 1] = x
    a0[n:2 * n, 0] = 1.0      # d/dt seed
    a0[2 * n:3 * n, 1] = 1.0  # d/dx seed; d2/dx2 rows stay zero
    h = int(sizes[1])
    acts = np.empty((nh, 4 * n, h))   # post-activation jets
    zjets = np.empty((nh, 3 * n, h))  # pre-activation t/x/xx jets
    a_prev = a0
    for l in range(nh):
        w, b, _, _, _ = _layer(theta, sizes, offs, l)
        zfull = np.dot(a_prev, w.T)
        s = np.tanh(zfull[:n] + b)
        ops.jet_activation(s, zfull, n, acts[l], zjets[l])
        a_prev = acts[l]
    w, b, _, _, _ = _layer(theta, sizes, offs, nh)
    out = np.dot(a_prev, w.T)
    u = out[:n, 0] + b[0]
    ut = out[n:2 * n, 0].copy()
    ux = out[2 * n:3 * n, 0].copy()
    uxx = out[3 * n:, 0].copy()
    return u, ut, ux, uxx, a0, acts, zjets


def mlp_jet_backward(ops, theta, sizes, a0, acts, zjets,
                     ubar, utbar, uxbar, uxxbar):
    """Parameter gradient of sum_i (ubar_i u + utbar_i u_t + uxbar_i u_x
    + uxxbar_i u_xx) at point i, backpropagated through the jet pass."""
    n = ubar.shape[0]
    nh = len(sizes) - 2
    offs = _offsets(sizes)
    grad = np.zeros_like(theta)

    w, _, o, fi, _ = _layer(theta, sizes, offs, nh)
    outbar = np.empty((4 * n, 1))
    outbar[:n, 0] = ubar
    outbar[n:2 * n, 0] = utbar
    outbar[2 * n:3 * n, 0] = uxbar
    outbar[3 * n:, 0] = uxxbar
    grad[o:o + fi] = np.dot(outbar.T, acts[nh - 1])[0]
    grad[o + fi] = np.sum(ubar)  # bias feeds only the value channel
    sbar = np.dot(outbar, w)

    zbar = np.empty_like(sbar)
    for l in range(nh - 1, -1, -1):
        ops.jet_adjoint(acts[l], zjets[l], sbar, n, zbar)
        a_prev = a0 if l == 0 else acts[l - 1]
        wl, _, o, fi, fo = _layer(theta, sizes, offs, l)
        grad[o:o + fi * fo] = np.dot(zbar.T, a_prev).ravel()
        grad[o + fi * fo:o + fi * fo + fo] = np.sum(zbar[:n], axis=0)
        if l > 0:
            sbar = np.dot(zbar, wl)
    return grad
