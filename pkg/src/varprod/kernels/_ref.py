"""Pure numpy fallback for the compiled kernels.

Same signatures and same results as ``_core`` (up to floating-point
associativity, which both sides keep identical by accumulating in the
same order).  Single-trajectory recursion is a plain Python loop; the
batch variants vectorize across replications, which is where the Monte
Carlo harness spends its time when the extension is unavailable.
"""

import numpy as np


def var1_recursion(phi11, phi12, phi21, phi22, z, burnin, x10=0.0, x20=0.0):
    """Iterate x(t) = Phi x(t-1) + z(t) over z rows; drop the first `burnin`."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    steps = z.shape[0]
    out = np.empty((steps - burnin, 2))
    x1 = float(x10)
    x2 = float(x20)
    k = 0
    z1 = z[:, 0]
    z2 = z[:, 1]
    for t in range(steps):
        x1, x2 = (phi11 * x1 + phi12 * x2 + z1[t],
                  phi21 * x1 + phi22 * x2 + z2[t])
        if t >= burnin:
            out[k, 0] = x1
            out[k, 1] = x2
            k += 1
    return out


def var1_recursion_batch(phi11, phi12, phi21, phi22, z, burnin):
    """Batched recursion: z is (reps, steps, 2), output (reps, steps - burnin, 2)."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    reps, steps, _ = z.shape
    out = np.empty((reps, steps - burnin, 2))
    x1 = np.zeros(reps)
    x2 = np.zeros(reps)
    for t in range(steps):
        nx1 = phi11 * x1 + phi12 * x2 + z[:, t, 0]
        x2 = phi21 * x1 + phi22 * x2 + z[:, t, 1]
        x1 = nx1
        if t >= burnin:
            out[:, t - burnin, 0] = x1
            out[:, t - burnin, 1] = x2
    return out


def acvf_biased(y, hmax):
    """Biased (1/n, mean-subtracted) autocovariances at lags 0..hmax."""
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = y.shape[0]
    yc = y - y.mean()
    out = np.empty(hmax + 1)
    for h in range(hmax + 1):
        out[h] = np.dot(yc[: n - h], yc[h:]) / n
    return out


def acvf_biased_batch(ys, hmax):
    """Row-wise biased autocovariances: (reps, n) -> (reps, hmax + 1)."""
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    n = ys.shape[1]
    yc = ys - ys.mean(axis=1, keepdims=True)
    out = np.empty((ys.shape[0], hmax + 1))
    for h in range(hmax + 1):
        out[:, h] = np.einsum("ij,ij->i", yc[:, : n - h], yc[:, h:]) / n
    return out


def ccvf_biased(a, b, hmax):
    """Biased cross-covariances (1/n) sum (a_t - abar)(b_{t+h} - bbar), h = 0..hmax."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    n = a.shape[0]
    ac = a - a.mean()
    bc = b - b.mean()
    out = np.empty(hmax + 1)
    for h in range(hmax + 1):
        out[h] = np.dot(ac[: n - h], bc[h:]) / n
    return out
