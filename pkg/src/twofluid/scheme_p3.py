"""Order-3-in-space variant: implicit upwind transport, implicit sixth-difference
smoothing, a 7-point centered derivative and the final post-treatment.

Implicit systems are 7-diagonal.  With transmissive boundaries they are solved
by banded LU; the three rows nearest each end fall back to the order-1 stencil
with zero-gradient ghosts.  Periodic systems wrap around and go through a
sparse LU instead.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import BandSolveError
from .scheme_o1 import check_cfl, pad, pressure_correction_canonical, pressure_correction_solved
from .state import Form

UPWIND_P3 = (-1.0 / 3.0, 1.5, -3.0, 11.0 / 6.0)
CENTERED_P3 = (69.0 / 101.0, -39.0 / 404.0, 1.0 / 303.0)
CENTERED_P3_EXACT = (Fraction(69, 101), Fraction(-39, 404), Fraction(1, 303))
SIXTH_DIFF = (-1.0, 6.0, -15.0, 20.0, -15.0, 6.0, -1.0)


def gen_upwind_coeffs(p: int) -> np.ndarray:
    """One-sided first-derivative weights on offsets ``-p, ..., 0``.

    Solves the (p+1)x(p+1) Taylor moment system ``sum_k c_k k^q = [q == 1]``,
    ``q = 0..p``, so the stencil is exact on polynomials of degree <= p.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    offsets = np.arange(-p, 1, dtype=float)
    vander = offsets[np.newaxis, :] ** np.arange(p + 1)[:, np.newaxis]
    rhs = np.zeros(p + 1)
    rhs[1] = 1.0
    return np.linalg.solve(vander, rhs)


def gen_centered_coeffs(p: int) -> np.ndarray:
    """Antisymmetric weights ``c_1..c_p`` of ``sum_k c_k (w_{i+k} - w_{i-k})``.

    Solves the p x p system ``sum_k 2 c_k k^q = [q == 1]`` over odd
    ``q = 1, 3, ..., 2p-1``; this is the maximal-order centered stencil.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    k = np.arange(1, p + 1, dtype=float)
    q = np.arange(1, 2 * p, 2)
    mat = 2.0 * k[np.newaxis, :] ** q[:, np.newaxis]
    rhs = np.zeros(p)
    rhs[0] = 1.0
    return np.linalg.solve(mat, rhs)


def _solve(diags, rhs, boundary):
    """Solve the system whose row ``i`` holds ``diags[d][i]`` at column ``i + d``."""
    n = rhs.size
    bw = max(abs(d) for d in diags)
    if boundary == "periodic":
        rows, cols, vals = [], [], []
        idx = np.arange(n)
        for d, vec in diags.items():
            rows.append(idx)
            cols.append((idx + d) % n)
            vals.append(vec)
        mat = scipy.sparse.csc_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
        )
        try:
            out = scipy.sparse.linalg.splu(mat).solve(rhs)
        except RuntimeError as exc:
            raise BandSolveError(f"singular periodic system: {exc}") from None
    else:
        ab = np.zeros((2 * bw + 1, n))
        for d, vec in diags.items():
            if d >= 0:
                ab[bw - d, d:] = vec[: n - d]
            else:
                ab[bw - d, : n + d] = vec[-d:]
        try:
            out = scipy.linalg.solve_banded((bw, bw), ab, rhs, check_finite=True)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise BandSolveError(f"banded solve failed ({exc}); {_cond_report(diags, n)}") from None
    if not np.all(np.isfinite(out)):
        raise BandSolveError(f"non-finite banded solution; {_cond_report(diags, n)}")
    return out


def _cond_report(diags, n):
    if n > 2000:
        return "condition estimate skipped (large system)"
    dense = np.zeros((n, n))
    idx = np.arange(n)
    for d, vec in diags.items():
        ok = (idx + d >= 0) & (idx + d < n)
        dense[idx[ok], idx[ok] + d] = vec[ok]
    with np.errstate(all="ignore"):
        return f"1-norm condition estimate {np.linalg.cond(dense, 1):.3e}"


def transport_p3(omega, v, r, coeffs=UPWIND_P3, boundary="transmissive", check=True):
    """Implicit upwind step ``(I + r Q) omega_new = omega``.

    ``Q`` applies the one-sided weights to ``omega v+`` looking left and,
    mirrored, to ``omega v-`` looking right.
    """
    omega = np.asarray(omega, dtype=float)
    v = np.asarray(v, dtype=float)
    if check:
        check_cfl(v, r)
    n = omega.size
    p = len(coeffs) - 1
    vp = np.maximum(v, 0.0)
    vm = np.maximum(-v, 0.0)
    diags = {d: np.zeros(n) for d in range(-p, p + 1)}
    diags[0] += 1.0
    if boundary == "periodic":
        for j in range(p + 1):
            c = coeffs[p - j]
            diags[-j] += r * c * np.roll(vp, j)
            diags[j] += r * c * np.roll(vm, -j)
        return _solve(diags, omega, boundary)

    inner = slice(p, n - p)
    for j in range(p + 1):
        c = coeffs[p - j]
        # row i, column i -/+ j
        diags[-j][inner] += r * c * vp[p - j: n - p - j]
        diags[j][inner] += r * c * vm[p + j: n - p + j]
    edge = np.r_[0:p, n - p:n]
    vpe = pad(vp, 1)
    vme = pad(vm, 1)
    e = edge + 1
    diags[0][edge] += r * (vp[edge] + vm[edge])
    diags[-1][edge] -= r * vpe[e - 1]
    diags[1][edge] -= r * vme[e + 1]
    # zero-gradient ghosts fold back onto the end cells
    diags[0][0] -= r * vp[0]
    diags[0][n - 1] -= r * vm[n - 1]
    return _solve(diags, omega, boundary)


def average_p3(omega, a, boundary="transmissive"):
    """Implicit sixth-difference smoothing ``(I + a S) omega_new = omega``.

    ``S`` is the stencil ``(-1, 6, -15, 20, -15, 6, -1)``; with this sign the
    step damps every Fourier mode.  End rows use ``(I - a d2)``.
    """
    omega = np.asarray(omega, dtype=float)
    if a == 0.0:
        return omega.copy()
    n = omega.size
    diags = {d: np.full(n, a * SIXTH_DIFF[d + 3]) for d in range(-3, 4)}
    diags[0] += 1.0
    if boundary != "periodic":
        edge = np.r_[0:3, n - 3:n]
        for d in range(-3, 4):
            diags[d][edge] = 0.0
        diags[0][edge] = 1.0 + 2.0 * a
        diags[-1][edge] = -a
        diags[1][edge] = -a
        diags[0][0] -= a
        diags[0][n - 1] -= a
    return _solve(diags, omega, boundary)


def centered_diff_p3(omega, boundary="transmissive"):
    """h times the 7-point centered derivative used by the pressure correction."""
    w = pad(omega, 3, boundary)
    n = len(w) - 6
    c1, c2, c3 = CENTERED_P3
    return (c3 * (w[6:6 + n] - w[0:n])
            + c2 * (w[5:5 + n] - w[1:1 + n])
            + c1 * (w[4:4 + n] - w[2:2 + n]))


def pressure_correction_p3(form, *args, boundary="transmissive"):
    """Order-1 correction formulas with the 7-point derivative substituted."""
    if Form(form) is Form.CANONICAL:
        return pressure_correction_canonical(*args, boundary=boundary, diff=centered_diff_p3)
    return pressure_correction_solved(*args, boundary=boundary, diff=centered_diff_p3)


def post_treatment(omega, w, boundary="transmissive"):
    """Replace each value by the mean over ``2w + 1`` cells centred on it."""
    omega = np.asarray(omega, dtype=float)
    if w == 0:
        return omega.copy()
    padded = pad(omega, w, boundary)
    csum = np.concatenate(([0.0], np.cumsum(padded)))
    return (csum[2 * w + 1:] - csum[: -(2 * w + 1)]) / (2 * w + 1)
