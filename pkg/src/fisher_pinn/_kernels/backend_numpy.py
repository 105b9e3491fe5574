"""Pure-numpy implementations of the hot inner kernels.

This is the fallback backend (FISHER_PINN_BACKEND=numpy): the same
quantities as backend_numba, computed with vectorized array operations
instead of fused loops.
"""

import numpy as np


def jet_activation(s, zfull, n, al, zl):
    """Push pre-activation jets through tanh.

    s is tanh of the (biased) value rows; zfull holds the linear-map
    jets in rows [n,2n) d/dt, [2n,3n) d/dx, [3n,4n) d2/dx2.  Writes the
    activated jets into al (4n, h) and caches the pre-activation jets
    in zl (3n, h) for the backward pass.
    """
    zt = zfull[n:2 * n]
    zx = zfull[2 * n:3 * n]
    zxx = zfull[3 * n:]
    p = 1.0 - s * s
    q = -2.0 * s * p
    al[:n] = s
    np.multiply(p, zt, out=al[n:2 * n])
    np.multiply(p, zx, out=al[2 * n:3 * n])
    al[3 * n:] = q * zx * zx + p * zxx
    zl[:n] = zt
    zl[n:2 * n] = zx
    zl[2 * n:] = zxx


def jet_adjoint(al, zl, sbar, n, zbar):
    """Adjoint of jet_activation: maps activated-jet adjoints sbar to
    pre-activation adjoints zbar (both stacked (4n, h))."""
    s = al[:n]
    zt = zl[:n]
    zx = zl[n:2 * n]
    zxx = zl[2 * n:]
    p = 1.0 - s * s
    q = -2.0 * s * p
    dq = -2.0 * (p * p + s * q)
    sb = sbar[:n]
    sbt = sbar[n:2 * n]
    sbx = sbar[2 * n:3 * n]
    sbxx = sbar[3 * n:]
    zbar[:n] = p * sb + q * zt * sbt + q * zx * sbx \
        + (dq * zx * zx + q * zxx) * sbxx
    np.multiply(p, sbt, out=zbar[n:2 * n])
    zbar[2 * n:3 * n] = p * sbx + 2.0 * q * zx * sbxx
    np.multiply(p, sbxx, out=zbar[3 * n:])


def fdm_solve_kernel(u0, bc_left, bc_right, diffusion, reaction, dx, dt):
    """Explicit forward-Euler / central-difference sweep, full history.

    bc_left/bc_right hold the Dirichlet values at every time level
    (length nt + 1); row 0 of the result is u0 with its ends overwritten
    by the level-0 boundary values.
    """
    nt = bc_left.shape[0] - 1
    nx = u0.shape[0]
    out = np.empty((nt + 1, nx))
    out[0] = u0
    out[0, 0] = bc_left[0]
    out[0, nx - 1] = bc_right[0]
    for k in range(nt):
        prev = out[k]
        nxt = out[k + 1]
        inner = prev[1:nx - 1]
        lap = prev[2:] - 2.0 * inner + prev[:nx - 2]
        nxt[1:nx - 1] = inner + dt * (diffusion * lap / (dx * dx)
                                      + reaction * inner * (1.0 - inner))
        nxt[0] = bc_left[k + 1]
        nxt[nx - 1] = bc_right[k + 1]
    return out


def fdm_final_row_kernel(u0, bc_left, bc_right, diffusion, reaction, dx, dt):
    """Same sweep keeping only the final time level (streaming mode)."""
    nt = bc_left.shape[0] - 1
    nx = u0.shape[0]
    prev = u0.copy()
    prev[0] = bc_left[0]
    prev[nx - 1] = bc_right[0]
    nxt = np.empty(nx)
    for k in range(nt):
        inner = prev[1:nx - 1]
        lap = prev[2:] - 2.0 * inner + prev[:nx - 2]
        nxt[1:nx - 1] = inner + dt * (diffusion * lap / (dx * dx)
                                      + reaction * inner * (1.0 - inner))
        nxt[0] = bc_left[k + 1]
        nxt[nx - 1] = bc_right[k + 1]
        prev, nxt = nxt, prev
    return prev.copy()
