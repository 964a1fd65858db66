"""Numba-compiled inner loops.

Everything here is deterministic: fixed operation order, no fastmath, no
threading. The reservoir kernels share one sparse matrix-vector product and
one vectorizable tanh so that every code path producing reservoir states
rounds identically.
"""

import numpy as np
from numba import njit

# exp(f) argument-reduction constants (Cephes-style ln2 split; the high part
# is exact in 21 bits so k * LN2_HI is exact for |k| < 2**31)
_LOG2E = 1.4426950408889634
_LN2_HI = 6.93145751953125e-01
_LN2_LO = 1.42860682030941723212e-06

_P2 = 1.0 / 2.0
_P3 = 1.0 / 6.0
_P4 = 1.0 / 24.0
_P5 = 1.0 / 120.0
_P6 = 1.0 / 720.0
_P7 = 1.0 / 5040.0
_P8 = 1.0 / 40320.0
_P9 = 1.0 / 362880.0
_P10 = 1.0 / 3628800.0
_P11 = 1.0 / 39916800.0
_P12 = 1.0 / 479001600.0
_P13 = 1.0 / 6227020800.0


@njit(cache=True)
def _spmv(data, indices, indptr, x, pre):
    """pre <- W x for CSR (data, indices, indptr); 4-way unrolled rows."""
    n = pre.shape[0]
    for i in range(n):
        lo = indptr[i]
        hi = indptr[i + 1]
        a0 = 0.0
        a1 = 0.0
        a2 = 0.0
        a3 = 0.0
        j = lo
        while j + 3 < hi:
            a0 += data[j] * x[indices[j]]
            a1 += data[j + 1] * x[indices[j + 1]]
            a2 += data[j + 2] * x[indices[j + 2]]
            a3 += data[j + 3] * x[indices[j + 3]]
            j += 4
        while j < hi:
            a0 += data[j] * x[indices[j]]
            j += 1
        pre[i] = (a0 + a1) + (a2 + a3)


@njit(cache=True)
def _rhs_from_pre(pre, x, ibuf, fview, out):
    """out <- tanh(pre) - x.

    tanh is evaluated as sign(p) * (1 - e) / (1 + e) with e = exp(-2|p|)
    clamped at exp(-40), where exp uses base-2 argument reduction with the
    2**k factor assembled by bit manipulation (ibuf and fview alias the same
    buffer). Max absolute error vs IEEE tanh is below 5e-16.
    """
    n = pre.shape[0]
    for i in range(n):
        t = -2.0 * abs(pre[i])
        if t < -40.0:
            t = -40.0
        kk = np.rint(t * _LOG2E)
        f = t - kk * _LN2_HI
        f = f - kk * _LN2_LO
        ibuf[i] = (np.int64(kk) + 1023) << 52
        p = 1.0 + f * (1.0 + f * (_P2 + f * (_P3 + f * (_P4 + f * (_P5 + f * (
            _P6 + f * (_P7 + f * (_P8 + f * (_P9 + f * (_P10 + f * (
                _P11 + f * (_P12 + f * _P13))))))))))))
        out[i] = p
    for i in range(n):
        e = out[i] * fview[i]
        r = (1.0 - e) / (1.0 + e)
        if pre[i] < 0.0:
            r = -r
        out[i] = r - x[i]


@njit(cache=True)
def _rk4_substeps(data, indices, indptr, c, x, dt, n_sub,
                  k1, k2, k3, k4, xt, pre, ibuf, fview):
    """Advance x by n_sub classical RK4 steps of x' = -x + tanh(Wx + c)."""
    n = x.shape[0]
    half = 0.5 * dt
    sixth = dt / 6.0
    for _ in range(n_sub):
        _spmv(data, indices, indptr, x, pre)
        for i in range(n):
            pre[i] += c[i]
        _rhs_from_pre(pre, x, ibuf, fview, k1)
        for i in range(n):
            xt[i] = x[i] + half * k1[i]
        _spmv(data, indices, indptr, xt, pre)
        for i in range(n):
            pre[i] += c[i]
        _rhs_from_pre(pre, xt, ibuf, fview, k2)
        for i in range(n):
            xt[i] = x[i] + half * k2[i]
        _spmv(data, indices, indptr, xt, pre)
        for i in range(n):
            pre[i] += c[i]
        _rhs_from_pre(pre, xt, ibuf, fview, k3)
        for i in range(n):
            xt[i] = x[i] + dt * k3[i]
        _spmv(data, indices, indptr, xt, pre)
        for i in range(n):
            pre[i] += c[i]
        _rhs_from_pre(pre, xt, ibuf, fview, k4)
        for i in range(n):
            x[i] += sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i])


@njit(cache=True)
def drive_chunk(data, indices, indptr, c_all, x, dt, n_sub, out):
    """Hold each row of c_all for n_sub RK4 steps; record x after each interval.

    c_all: (K, n) precomputed per-interval constants G*W_in*u_k + B.
    x is advanced in place; out is (K, n).
    """
    n = x.shape[0]
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    xt = np.empty(n)
    pre = np.empty(n)
    ibuf = np.empty(n, np.int64)
    fview = ibuf.view(np.float64)
    for k in range(c_all.shape[0]):
        _rk4_substeps(data, indices, indptr, c_all[k], x, dt, n_sub,
                      k1, k2, k3, k4, xt, pre, ibuf, fview)
        for i in range(n):
            out[k, i] = x[i]


@njit(cache=True)
def autonomous_chunk(data, indices, indptr, w_in, bias, gain, w_out, x,
                     dt, n_sub, n_steps, guard, out):
    """Closed loop: predict from x, record, feed the prediction back.

    out: (n_steps, 4). Returns the index of the first prediction whose
    magnitude exceeds guard (that prediction is still recorded), or -1 if
    all n_steps completed.
    """
    n = x.shape[0]
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    xt = np.empty(n)
    pre = np.empty(n)
    c = np.empty(n)
    ibuf = np.empty(n, np.int64)
    fview = ibuf.view(np.float64)
    for s in range(n_steps):
        y0 = w_out[n, 0]
        y1 = w_out[n, 1]
        y2 = w_out[n, 2]
        y3 = w_out[n, 3]
        for i in range(n):
            xv = x[i]
            y0 += w_out[i, 0] * xv
            y1 += w_out[i, 1] * xv
            y2 += w_out[i, 2] * xv
            y3 += w_out[i, 3] * xv
        out[s, 0] = y0
        out[s, 1] = y1
        out[s, 2] = y2
        out[s, 3] = y3
        if (abs(y0) > guard or abs(y1) > guard
                or abs(y2) > guard or abs(y3) > guard):
            return s
        for i in range(n):
            c[i] = gain * (w_in[i, 0] * y0 + w_in[i, 1] * y1
                           + w_in[i, 2] * y2 + w_in[i, 3] * y3) + bias[i]
        _rk4_substeps(data, indices, indptr, c, x, dt, n_sub,
                      k1, k2, k3, k4, xt, pre, ibuf, fview)
    return -1


@njit(cache=True)
def euler_chunk(s, a, b, h, m):
    """m deterministic Euler steps of the Li-Sprott drift, in place."""
    for _ in range(m):
        x = s[0]
        y = s[1]
        z = s[2]
        u = s[3]
        s[0] = x + h * (y - x)
        s[1] = y + h * (-x * z + u)
        s[2] = z + h * (x * y - a)
        s[3] = u + h * (-b * y)


@njit(cache=True)
def em_chunk(s, a, b, h, noise, scale):
    """Euler-Maruyama steps, in place; noise is (m, 4) standard Gaussians.

    Per step: s <- s + h * drift(s) + scale * xi with scale = sigma*sqrt(h).
    The drift part uses the exact same expressions as euler_chunk.
    """
    for i in range(noise.shape[0]):
        x = s[0]
        y = s[1]
        z = s[2]
        u = s[3]
        s[0] = x + h * (y - x) + scale * noise[i, 0]
        s[1] = y + h * (-x * z + u) + scale * noise[i, 1]
        s[2] = z + h * (x * y - a) + scale * noise[i, 2]
        s[3] = u + h * (-b * y) + scale * noise[i, 3]
