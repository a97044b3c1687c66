"""Far-field spherical wave expansion.

Pattern functions ``K_smn`` use normalized associated Legendre functions with
``int_0^pi Pbar_n^m(cos t)^2 sin t dt = 1`` (no Condon-Shortley phase); the
factor ``(-m/|m|)^m`` carries the sign for ``m > 0`` and is 1 for ``m <= 0``.
With this normalization ``int |K_smn|^2 dOmega = 4 pi``, so the columns of the
sampled pattern matrix are scaled by ``sqrt(w_p / 4 pi)`` to make them
orthonormal under the grid quadrature.

Modes are flattened as ``t = 2 (n (n + 1) + m - 1) + s - 1``, giving
``T = 2 N (N + 2)`` columns for truncation order ``N``. The global ``k sqrt(eta)``
scale of the expansion is dropped; it cancels in every directivity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NumericalError
from .fieldmodel import AngularGrid, ArrayGeometry, ElementFieldSet, check_direction

MAX_ENTRIES = 1 << 25


def num_modes(N: int) -> int:
    return 2 * N * (N + 2)


def mode_index(s: int, n: int, m: int) -> int:
    if s not in (1, 2) or n < 1 or abs(m) > n:
        raise ValueError(f"invalid mode (s={s}, n={n}, m={m})")
    return 2 * (n * (n + 1) + m - 1) + s - 1


def mode_from_index(t: int) -> tuple[int, int, int]:
    if t < 0:
        raise ValueError("mode index must be >= 0")
    s = 1 if t % 2 == 0 else 2
    u = t // 2 + 1
    n = math.isqrt(u)
    return s, n, u - n * (n + 1)


def mode_table(N: int) -> np.ndarray:
    """(T, 3) integer array of (s, n, m) in flat order."""
    return np.array([mode_from_index(t) for t in range(num_modes(N))], dtype=int)


def default_truncation(geom: ArrayGeometry, margin: int = 10) -> int:
    return int(math.ceil(geom.wavenumber * geom.enclosing_radius)) + margin


def normalized_legendre(nmax: int, theta):
    """Normalized Legendre values and derivatives for all ``0 <= m <= n <= nmax``.

    Returns ``(P, dP, mP_sin)``, each of shape ``(nmax + 1, nmax + 1) + theta.shape``
    indexed ``[n, m]``: ``Pbar_n^m(cos t)``, ``d Pbar_n^m(cos t) / dt`` and
    ``m Pbar_n^m(cos t) / sin t``. Entries with ``m > n`` are zero.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0) or np.any(theta >= np.pi):
        raise ValueError("theta must lie strictly inside (0, pi)")
    x, s = np.cos(theta), np.sin(theta)
    shape = (nmax + 1, nmax + 1) + theta.shape
    P = np.zeros(shape)
    # sectoral seeds, then the three-term recurrence in n at fixed m
    pmm = np.full(theta.shape, math.sqrt(0.5))
    for m in range(nmax + 1):
        if m > 0:
            pmm = pmm * math.sqrt((2 * m + 1) / (2 * m)) * s
        P[m, m] = pmm
        if m + 1 <= nmax:
            P[m + 1, m] = math.sqrt(2 * m + 3) * x * pmm
        for n in range(m + 2, nmax + 1):
            a = math.sqrt((4 * n * n - 1) / (n * n - m * m))
            b = math.sqrt((2 * n + 1) * ((n - 1) ** 2 - m * m) / ((2 * n - 3) * (n * n - m * m)))
            P[n, m] = a * x * P[n - 1, m] - b * P[n - 2, m]
    dP = np.zeros(shape)
    mP_sin = np.zeros(shape)
    for n in range(nmax + 1):
        for m in range(n + 1):
            prev = P[n - 1, m] if n >= 1 else 0.0
            c = math.sqrt((2 * n + 1) * (n * n - m * m) / (2 * n - 1)) if n >= 1 else 0.0
            dP[n, m] = (n * x * P[n, m] - c * prev) / s
            mP_sin[n, m] = m * P[n, m] / s
    return P, dP, mP_sin


def normalized_legendre_terms(n: int, m: int, theta: float):
    """``(Pbar_n^|m|, d Pbar_n^|m| / dtheta, m Pbar_n^|m| / sin theta)`` at one angle."""
    if n < 1 or abs(m) > n:
        raise ValueError("need 1 <= n and |m| <= n")
    P, dP, mPs = normalized_legendre(n, theta)
    am = abs(m)
    return float(P[n, am]), float(dP[n, am]), float(np.sign(m) * mPs[n, am]) if m else 0.0


def _theta_parts(N: int, theta):
    """theta-dependent factors of every mode, shapes ``(T,) + theta.shape``."""
    table = mode_table(N)
    s, n, m = table[:, 0], table[:, 1], table[:, 2]
    P, dP, mPs = normalized_legendre(N, theta)
    am = np.abs(m)
    p_over = np.sign(m)[:, None] * mPs[n, am].reshape(len(n), -1)  # m P / sin, signed m
    d = dP[n, am].reshape(len(n), -1)
    norm = np.sqrt(2.0 / (n * (n + 1)))
    sign = np.where(m > 0, (-1.0) ** am, 1.0)
    jm = 1j * p_over
    ph1 = (-1j) ** (n + 1)
    ph2 = (-1j) ** n
    a_theta = np.where((s == 1)[:, None], ph1[:, None] * jm, ph2[:, None] * d)
    a_phi = np.where((s == 1)[:, None], -ph1[:, None] * d, ph2[:, None] * jm)
    scale = (norm * sign)[:, None]
    shape = (len(n),) + np.shape(theta)
    return (scale * a_theta).reshape(shape), (scale * a_phi).reshape(shape), m


def pattern_function(s: int, n: int, m: int, theta, phi):
    """``(K_theta, K_phi)`` of mode ``(s, n, m)`` at the given angles."""
    t = mode_index(s, n, m)
    a_theta, a_phi, _ = _theta_parts(n, np.asarray(theta, dtype=float))
    e = np.exp(1j * m * np.asarray(phi, dtype=float))
    return a_theta[t] * e, a_phi[t] * e


@dataclass(frozen=True, eq=False)
class PatternMatrix:
    K: np.ndarray  # (2 l q, T)
    N: int
    grid: AngularGrid

    @property
    def num_modes(self) -> int:
        return self.K.shape[1]


def build_pattern_matrix(grid: AngularGrid, N: int, max_entries: int = MAX_ENTRIES) -> PatternMatrix:
    """Sampled, quadrature-weighted pattern functions; rows follow the field matrix layout."""
    if N < 1:
        raise ValueError("truncation order N must be >= 1")
    T = num_modes(N)
    if 2 * grid.size * T > max_entries:
        raise MemoryError(
            f"pattern matrix would hold {2 * grid.size * T} entries (cap {max_entries}); "
            "use a coarser grid or a lower truncation order")
    a_theta, a_phi, m = _theta_parts(N, grid.theta_rad)  # (T, l)
    e = np.exp(1j * np.outer(grid.phi_rad, m))  # (q, T)
    K = np.empty((grid.l, grid.q, 2, T), dtype=complex)
    K[:, :, 0, :] = a_theta.T[:, None, :] * e[None]
    K[:, :, 1, :] = a_phi.T[:, None, :] * e[None]
    K = K.reshape(grid.size, 2, T)
    K *= np.sqrt(grid.weights_sr / (4.0 * np.pi))[:, None, None]
    return PatternMatrix(K.reshape(2 * grid.size, T), N, grid)


@dataclass(frozen=True, eq=False)
class CoefficientMatrix:
    Q: np.ndarray  # (M, T)
    residuals: np.ndarray  # (M,) relative reconstruction error per element
    N: int

    @property
    def num_elements(self) -> int:
        return self.Q.shape[0]


def extract_coefficients(fset: ElementFieldSet, kmat: PatternMatrix) -> CoefficientMatrix:
    """Project each weighted element field onto the orthonormal mode columns."""
    g = fset.grid
    if (g.l, g.q, g.rule) != (kmat.grid.l, kmat.grid.q, kmat.grid.rule):
        raise ValueError("field set and pattern matrix use different grids")
    w = np.sqrt(g.weights_sr)
    E = (fset.fields * w[None, :, None]).reshape(fset.num_elements, -1).T
    Q = (kmat.K.conj().T @ E).T
    err = np.linalg.norm(E - kmat.K @ Q.T, axis=0)
    norm = np.linalg.norm(E, axis=0)
    res = np.divide(err, norm, out=np.zeros_like(err), where=norm > 0)
    return CoefficientMatrix(Q, res, kmat.N)


def directivity_from_modes(coeffs: CoefficientMatrix, b, direction, polarization: str = "theta") -> float:
    """Directivity of excitation ``b`` from mode coefficients.

    ``polarization`` selects the numerator: ``"theta"`` or ``"phi"`` (the same
    single component the field-matrix quotient uses) or ``"total"``.
    """
    theta0, phi0 = (float(a) for a in direction)
    check_direction(theta0, phi0)
    if not 0.0 < theta0 < np.pi:
        raise ValueError("mode directivity needs a direction off the poles")
    b = np.asarray(b, dtype=complex)
    q = b @ coeffs.Q
    den = float(np.sum(np.abs(q) ** 2))
    if not den > 0:
        raise NumericalError("zero radiated power")
    a_theta, a_phi, m = _theta_parts(coeffs.N, np.array([theta0]))
    e = np.exp(1j * m * phi0)
    k_theta, k_phi = a_theta[:, 0] * e, a_phi[:, 0] * e
    if polarization == "theta":
        num = abs(q @ k_theta) ** 2
    elif polarization == "phi":
        num = abs(q @ k_phi) ** 2
    elif polarization == "total":
        num = abs(q @ k_theta) ** 2 + abs(q @ k_phi) ** 2
    else:
        raise ValueError(f"unknown polarization {polarization!r}")
    return float(num) / den


def save_coefficients_csv(coeffs: CoefficientMatrix, path) -> Path:
    """One row per element; columns ``re_t,im_t`` for every flat mode index."""
    path = Path(path)
    T = coeffs.Q.shape[1]
    header = ",".join(f"re_{t},im_{t}" for t in range(T))
    lines = [header]
    for row in coeffs.Q:
        lines.append(",".join(f"{format(v.real, '.17g')},{format(v.imag, '.17g')}" for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path
