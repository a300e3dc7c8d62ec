"""Pure-numpy fallback for the hot Bernoulli-inversion kernel.

The compiled twin lives in ``_kernels.pyx``; both expose the same
``invert_bernoulli`` signature and are selected in ``_dispatch``.
"""

import numpy as np

BACKEND = "python"

# flag values returned per node
OK = 0
NO_SUBSONIC_ROOT = 1


def invert_bernoulli(t, s, gamma, A, rho0, g, tol=1e-13, max_iter=120):
    """Solve g*rho0^2*t/rho^2 + h(rho) = g*s on the subsonic branch.

    h is the gamma-law enthalpy relative to the surface density rho0.
    Vectorized over ``t`` and ``s`` (broadcast together).  Returns
    ``(rho, d1H, d2H, flag)`` where d1H = dH/dt < 0, d2H = dH/ds > 0 on
    the subsonic branch and ``flag`` is nonzero where no subsonic root
    exists (outputs are NaN there).

    The residual is driven below ``tol`` (absolute).  The bracket
    [sonic density, zero-speed density] contains exactly one root when
    one exists because the residual is strictly increasing there.
    """
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    t, s = np.broadcast_arrays(t, s)
    shape = t.shape
    t = t.ravel().copy()
    s = s.ravel().copy()
    n = t.size

    gm1 = gamma - 1.0
    c0 = A * gamma / gm1
    e0 = rho0 ** gm1

    rho = np.full(n, np.nan)
    flag = np.zeros(n, dtype=np.int32)

    # density at zero speed: h(rho) = g*s
    base = e0 + gm1 * g * s / (A * gamma)
    bad = ~(base > 0.0) | ~np.isfinite(t) | (t < 0.0)
    flag[bad] = NO_SUBSONIC_ROOT
    good = ~bad
    hi = np.empty(n)
    hi[good] = base[good] ** (1.0 / gm1)

    # sonic density: rho^2 p'(rho) = 2 g rho0^2 t
    lo = np.zeros(n)
    pos = good & (t > 0.0)
    lo[pos] = (2.0 * g * rho0 * rho0 * t[pos] / (A * gamma)) ** (1.0 / (gamma + 1.0))

    def resid(x, m):
        return g * rho0 * rho0 * t[m] / (x * x) + c0 * (x ** gm1 - e0) - g * s[m]

    def dresid(x, m):
        return A * gamma * x ** (gamma - 2.0) - 2.0 * g * rho0 * rho0 * t[m] / (x ** 3)

    # no subsonic root when the residual is still nonnegative at the sonic point
    chk = good & (lo > 0.0)
    if np.any(chk):
        sup = np.zeros(n, dtype=bool)
        sup[chk] = (resid(lo[chk], chk) >= 0.0) | (lo[chk] >= hi[chk])
        flag[sup] = NO_SUBSONIC_ROOT
        good = good & ~sup

    rho[good] = hi[good]
    active = good & (t > 0.0)
    lob = lo.copy()
    hib = hi.copy()
    idx = np.nonzero(active)[0]
    for _ in range(max_iter):
        if idx.size == 0:
            break
        x = rho[idx]
        f = g * rho0 * rho0 * t[idx] / (x * x) + c0 * (x ** gm1 - e0) - g * s[idx]
        fp = A * gamma * x ** (gamma - 2.0) - 2.0 * g * rho0 * rho0 * t[idx] / (x ** 3)
        # update the bracket from the sign of f (residual increasing in rho)
        up = f < 0.0
        lob[idx[up]] = x[up]
        hib[idx[~up]] = x[~up]
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = x - f / fp
        out = ~np.isfinite(xn) | (xn <= lob[idx]) | (xn >= hib[idx])
        xn[out] = 0.5 * (lob[idx[out]] + hib[idx[out]])
        rho[idx] = xn
        done = (np.abs(f) <= tol) & (np.abs(xn - x) <= 1e-15 * (1.0 + np.abs(x)))
        idx = idx[~done]

    d1H = np.full(n, np.nan)
    d2H = np.full(n, np.nan)
    m = good
    x = rho[m]
    fp = A * gamma * x ** (gamma - 2.0) - 2.0 * g * rho0 * rho0 * t[m] / (x ** 3)
    d1H[m] = -(g * rho0 * rho0 / (x * x)) / fp
    d2H[m] = g / fp

    return (
        rho.reshape(shape),
        d1H.reshape(shape),
        d2H.reshape(shape),
        flag.reshape(shape),
    )
