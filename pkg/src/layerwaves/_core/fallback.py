"""Pure-Python twins of the compiled kernels.

Every function here mirrors its Cython counterpart in ``kernels.pyx``
operation for operation (same elimination order, same complex division
formula, same RK4 update order), so the two implementations agree bit for
bit on identical inputs.  Keep the two files in sync when editing either.
"""

from __future__ import annotations

IS_COMPILED = False


def _cdiv(a: complex, b: complex) -> complex:
    # a / b via a * conj(b) / |b|^2; the final division is by a real scalar,
    # which is component-wise in both CPython and C.
    d = b.real * b.real + b.imag * b.imag
    n = a * b.conjugate()
    return complex(n.real / d, n.imag / d)


def solve_complex(a_flat: list[complex], b_flat: list[complex], n: int,
                  m: int) -> tuple[list[complex], complex, float]:
    """Solve the n x n complex system A X = B for m right-hand sides.

    ``a_flat`` is A row-major (length n*n), ``b_flat`` is B row-major
    (length n*m).  Gaussian elimination with partial pivoting (pivot by
    |re| + |im|).  Returns (X row-major, det(A), hadamard) where hadamard is
    the product of the row sup-norms of A, a scale for singularity tests.
    Raises ZeroDivisionError on an exactly zero pivot.
    """
    a = list(a_flat)
    b = list(b_flat)

    hadamard = 1.0
    for i in range(n):
        r = 0.0
        for j in range(n):
            v = a[i * n + j]
            mag = abs(v.real) + abs(v.imag)
            if mag > r:
                r = mag
        hadamard *= r

    det = complex(1.0, 0.0)
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
                a[k * n + j], a[piv * n + j] = a[piv * n + j], a[k * n + j]
            for j in range(m):
                b[k * m + j], b[piv * m + j] = b[piv * m + j], b[k * m + j]
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

    x = [complex(0.0, 0.0)] * (n * m)
    for j in range(m):
        for i in range(n - 1, -1, -1):
            s = b[i * m + j]
            for p in range(i + 1, n):
                s = s - a[i * n + p] * x[p * m + j]
            x[i * m + j] = _cdiv(s, a[i * n + i])
    return x, det, hadamard


def det_complex(a_flat: list[complex], n: int) -> tuple[complex, float]:
    """det(A) and the row-sup-norm product, without solving."""
    a = list(a_flat)
    hadamard = 1.0
    for i in range(n):
        r = 0.0
        for j in range(n):
            v = a[i * n + j]
            mag = abs(v.real) + abs(v.imag)
            if mag > r:
                r = mag
        hadamard *= r
    det = complex(1.0, 0.0)
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
                a[k * n + j], a[piv * n + j] = a[piv * n + j], a[k * n + j]
            det = -det
        pivot = a[k * n + k]
        if pivot.real == 0.0 and pivot.imag == 0.0:
            return complex(0.0, 0.0), hadamard
        det = det * pivot
        for i in range(k + 1, n):
            f = _cdiv(a[i * n + k], pivot)
            for j in range(k + 1, n):
                a[i * n + j] = a[i * n + j] - f * a[k * n + j]
    return det, hadamard


def _c_of_z(z: float, c0: float, c1: float) -> float:
    return c0 + c1 * z


def trace_gradient_ray(x0: float, z0: float, p: float, xiz0: float,
                       c0: float, c1: float, z_top: float, z_bot: float,
                       dt: float, max_steps: int, record_every: int
                       ) -> tuple[list[float], list[float], list[float], float, float, float, float, int]:
    """Integrate a 2-D ray through the linear profile c(z) = c0 + c1 z.

    State (x, z, xi_z) with horizontal slowness p conserved; time
    parametrization of the eikonal Hamiltonian c(z) |xi|:

        dx/dt = c^2 p,   dz/dt = c^2 xi_z,   dxi_z/dt = -c'(z) / c(z).

    Fixed-step RK4 until z exits [z_top, z_bot]; the final partial step is
    bisected (52 halvings) so the endpoint lands on the crossed boundary to
    machine precision.  Returns

        (xs, zs, ts, x_end, z_end, xiz_end, t_end, status)

    with xs/zs/ts the polyline sampled every ``record_every`` steps (endpoint
    appended), and status 0 when a boundary was reached, 1 when max_steps
    ran out (trapped).
    """

    def deriv(x, z, xiz):
        c = _c_of_z(z, c0, c1)
        c2 = c * c
        return c2 * p, c2 * xiz, -c1 / c

    def rk4(x, z, xiz, h):
        k1x, k1z, k1w = deriv(x, z, xiz)
        k2x, k2z, k2w = deriv(x + 0.5 * h * k1x, z + 0.5 * h * k1z, xiz + 0.5 * h * k1w)
        k3x, k3z, k3w = deriv(x + 0.5 * h * k2x, z + 0.5 * h * k2z, xiz + 0.5 * h * k2w)
        k4x, k4z, k4w = deriv(x + h * k3x, z + h * k3z, xiz + h * k3w)
        x = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        z = z + (h / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        xiz = xiz + (h / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
        return x, z, xiz

    xs = [x0]
    zs = [z0]
    ts = [0.0]
    x, z, xiz = x0, z0, xiz0
    t = 0.0
    status = 1
    step = 0
    while step < max_steps:
        xn, zn, wn = rk4(x, z, xiz, dt)
        step += 1
        if zn < z_top or zn > z_bot:
            # bisect the exit step from the last interior state
            lo = 0.0
            hi = dt
            for _ in range(52):
                mid = 0.5 * (lo + hi)
                xm, zm, wm = rk4(x, z, xiz, mid)
                if zm < z_top or zm > z_bot:
                    hi = mid
                else:
                    lo = mid
            x, z, xiz = rk4(x, z, xiz, hi)
            t = t + hi
            # snap exactly onto the nearer boundary
            z = z_top if abs(z - z_top) < abs(z - z_bot) else z_bot
            status = 0
            break
        x, z, xiz, t = xn, zn, wn, t + dt
        if step % record_every == 0:
            xs.append(x)
            zs.append(z)
            ts.append(t)
    xs.append(x)
    zs.append(z)
    ts.append(t)
    return xs, zs, ts, x, z, xiz, t, status
