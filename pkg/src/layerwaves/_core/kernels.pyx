# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: small complex solves and gradient-layer ray steps.

These mirror ``fallback.py`` operation for operation; see the note there on
keeping the two in sync.  Complex division is spelled out explicitly so both
implementations produce bit-identical results.
"""

IS_COMPILED = True


cdef inline double complex _cdiv(double complex a, double complex b):
    cdef double d = b.real * b.real + b.imag * b.imag
    cdef double complex n = a * b.conjugate()
    return n.real / d + 1j * (n.imag / d)


def solve_complex(a_flat, b_flat, int n, int m):
    """See fallback.solve_complex."""
    cdef double complex[64] a
    cdef double complex[64] b
    cdef double complex[64] x
    cdef int i, j, k, p, piv
    cdef double hadamard, r, mag, best
    cdef double complex det, pivot, f, s, v

    if n * n > 64 or n * m > 64:
        raise ValueError("solve_complex kernel supports n*n, n*m <= 64")
    for i in range(n * n):
        a[i] = a_flat[i]
    for i in range(n * m):
        b[i] = b_flat[i]

    hadamard = 1.0
    for i in range(n):
        r = 0.0
        for j in range(n):
            v = a[i * n + j]
            mag = abs(v.real) + abs(v.imag)
            if mag > r:
                r = mag
        hadamard *= r

    det = 1.0
    for k in range(n):
        piv = k
        best = abs(a[k * n + k].real) + abs(a[k * n + k].imag)
        for i in range(k + 1, n):
            mag = abs(a[i * n + k].real) + abs(a[i * n + k].imag)
            if mag > best:
                best = mag
                piv = i
        if piv != k:
            for j in range(k, n):
                v = a[k * n + j]
                a[k * n + j] = a[piv * n + j]
                a[piv * n + j] = v
            for j in range(m):
                v = b[k * m + j]
                b[k * m + j] = b[piv * m + j]
                b[piv * m + j] = v
            det = -det
        pivot = a[k * n + k]
        if pivot.real == 0.0 and pivot.imag == 0.0:
            raise ZeroDivisionError("singular matrix in solve_complex")
        det = det * pivot
        for i in range(k + 1, n):
            f = _cdiv(a[i * n + k], pivot)
            a[i * n + k] = f
            for j in range(k + 1, n):
                a[i * n + j] = a[i * n + j] - f * a[k * n + j]
            for j in range(m):
                b[i * m + j] = b[i * m + j] - f * b[k * m + j]

    for j in range(m):
        for i in range(n - 1, -1, -1):
            s = b[i * m + j]
            for p in range(i + 1, n):
                s = s - a[i * n + p] * x[p * m + j]
            x[i * m + j] = _cdiv(s, a[i * n + i])
    return [x[i] for i in range(n * m)], complex(det), hadamard


def det_complex(a_flat, int n):
    """See fallback.det_complex."""
    cdef double complex[64] a
    cdef int i, j, k, piv
    cdef double hadamard, r, mag, best
    cdef double complex det, pivot, f, v

    if n * n > 64:
        raise ValueError("det_complex kernel supports n*n <= 64")
    for i in range(n * n):
        a[i] = a_flat[i]

    hadamard = 1.0
    for i in range(n):
        r = 0.0
        for j in range(n):
            v = a[i * n + j]
            mag = abs(v.real) + abs(v.imag)
            if mag > r:
                r = mag
        hadamard *= r

    det = 1.0
    for k in range(n):
        piv = k
        best = abs(a[k * n + k].real) + abs(a[k * n + k].imag)
        for i in range(k + 1, n):
            mag = abs(a[i * n + k].real) + abs(a[i * n + k].imag)
            if mag > best:
                best = mag
                piv = i
        if piv != k:
            for j in range(k, n):
                v = a[k * n + j]
                a[k * n + j] = a[piv * n + j]
                a[piv * n + j] = v
            det = -det
        pivot = a[k * n + k]
        if pivot.real == 0.0 and pivot.imag == 0.0:
            return complex(0.0), hadamard
        det = det * pivot
        for i in range(k + 1, n):
            f = _cdiv(a[i * n + k], pivot)
            for j in range(k + 1, n):
                a[i * n + j] = a[i * n + j] - f * a[k * n + j]
    return complex(det), hadamard


cdef inline void _deriv(double x, double z, double xiz, double p,
                        double c0, double c1,
                        double* dx, double* dz, double* dw):
    cdef double c = c0 + c1 * z
    cdef double c2 = c * c
    dx[0] = c2 * p
    dz[0] = c2 * xiz
    dw[0] = -c1 / c


cdef inline void _rk4(double x, double z, double xiz, double p,
                      double c0, double c1, double h,
                      double* xo, double* zo, double* wo):
    cdef double k1x, k1z, k1w, k2x, k2z, k2w, k3x, k3z, k3w, k4x, k4z, k4w
    _deriv(x, z, xiz, p, c0, c1, &k1x, &k1z, &k1w)
    _deriv(x + 0.5 * h * k1x, z + 0.5 * h * k1z, xiz + 0.5 * h * k1w,
           p, c0, c1, &k2x, &k2z, &k2w)
    _deriv(x + 0.5 * h * k2x, z + 0.5 * h * k2z, xiz + 0.5 * h * k2w,
           p, c0, c1, &k3x, &k3z, &k3w)
    _deriv(x + h * k3x, z + h * k3z, xiz + h * k3w,
           p, c0, c1, &k4x, &k4z, &k4w)
    xo[0] = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    zo[0] = z + (h / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
    wo[0] = xiz + (h / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)


def trace_gradient_ray(double x0, double z0, double p, double xiz0,
                       double c0, double c1, double z_top, double z_bot,
                       double dt, int max_steps, int record_every):
    """See fallback.trace_gradient_ray."""
    cdef double x = x0, z = z0, xiz = xiz0, t = 0.0
    cdef double xn, zn, wn, lo, hi, mid, xm, zm, wm
    cdef int step = 0, status = 1, i

    xs = [x0]
    zs = [z0]
    ts = [0.0]
    while step < max_steps:
        _rk4(x, z, xiz, p, c0, c1, dt, &xn, &zn, &wn)
        step += 1
        if zn < z_top or zn > z_bot:
            lo = 0.0
            hi = dt
            for i in range(52):
                mid = 0.5 * (lo + hi)
                _rk4(x, z, xiz, p, c0, c1, mid, &xm, &zm, &wm)
                if zm < z_top or zm > z_bot:
                    hi = mid
                else:
                    lo = mid
            _rk4(x, z, xiz, p, c0, c1, hi, &xn, &zn, &wn)
            x = xn
            z = zn
            xiz = wn
            t = t + hi
            z = z_top if abs(z - z_top) < abs(z - z_bot) else z_bot
            status = 0
            break
        x = xn
        z = zn
        xiz = wn
        t = t + dt
        if step % record_every == 0:
            xs.append(x)
            zs.append(z)
            ts.append(t)
    xs.append(x)
    zs.append(z)
    ts.append(t)
    return xs, zs, ts, x, z, xiz, t, status
