"""Numba-compiled hot inner kernels.

Same contracts as backend_numpy, with the per-element jet algebra fused
into single loops (no temporaries) and the FDM sweep compiled.  Results
agree with the numpy backend to floating-point roundoff.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def jet_activation(s, zfull, n, al, zl):
    h = s.shape[1]
    for i in range(n):
        for j in range(h):
            zt = zfull[n + i, j]
            zx = zfull[2 * n + i, j]
            zxx = zfull[3 * n + i, j]
            sv = s[i, j]
            p = 1.0 - sv * sv
            q = -2.0 * sv * p
            al[i, j] = sv
            al[n + i, j] = p * zt
            al[2 * n + i, j] = p * zx
            al[3 * n + i, j] = q * zx * zx + p * zxx
            zl[i, j] = zt
            zl[n + i, j] = zx
            zl[2 * n + i, j] = zxx


@njit(cache=True)
def jet_adjoint(al, zl, sbar, n, zbar):
    h = al.shape[1]
    for i in range(n):
        for j in range(h):
            s = al[i, j]
            zt = zl[i, j]
            zx = zl[n + i, j]
            zxx = zl[2 * n + i, j]
            p = 1.0 - s * s
            q = -2.0 * s * p
            dq = -2.0 * (p * p + s * q)
            sb = sbar[i, j]
            sbt = sbar[n + i, j]
            sbx = sbar[2 * n + i, j]
            sbxx = sbar[3 * n + i, j]
            zbar[i, j] = p * sb + q * zt * sbt + q * zx * sbx \
                + (dq * zx * zx + q * zxx) * sbxx
            zbar[n + i, j] = p * sbt
            zbar[2 * n + i, j] = p * sbx + 2.0 * q * zx * sbxx
            zbar[3 * n + i, j] = p * sbxx


@njit(cache=True)
def fdm_solve_kernel(u0, bc_left, bc_right, diffusion, reaction, dx, dt):
    nt = bc_left.shape[0] - 1
    nx = u0.shape[0]
    out = np.empty((nt + 1, nx))
    out[0] = u0
    out[0, 0] = bc_left[0]
    out[0, nx - 1] = bc_right[0]
    for k in range(nt):
        prev = out[k]
        nxt = out[k + 1]
        for i in range(1, nx - 1):
            lap = prev[i + 1] - 2.0 * prev[i] + prev[i - 1]
            nxt[i] = prev[i] + dt * (diffusion * lap / (dx * dx)
                                     + reaction * prev[i] * (1.0 - prev[i]))
        nxt[0] = bc_left[k + 1]
        nxt[nx - 1] = bc_right[k + 1]
    return out


@njit(cache=True)
def fdm_final_row_kernel(u0, bc_left, bc_right, diffusion, reaction, dx, dt):
    nt = bc_left.shape[0] - 1
    nx = u0.shape[0]
    prev = u0.copy()
    prev[0] = bc_left[0]
    prev[nx - 1] = bc_right[0]
    nxt = np.empty(nx)
    for k in range(nt):
        for i in range(1, nx - 1):
            lap = prev[i + 1] - 2.0 * prev[i] + prev[i - 1]
            nxt[i] = prev[i] + dt * (diffusion * lap / (dx * dx)
                                     + reaction * prev[i] * (1.0 - prev[i]))
        nxt[0] = bc_left[k + 1]
        nxt[nx - 1] = bc_right[k + 1]
        tmp = prev
        prev = nxt
        nxt = tmp
    return prev.copy()
