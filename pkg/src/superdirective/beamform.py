"""Closed-form superdirective beamformer and the comparison baselines.

Conventions. The array field of excitation ``b`` is ``sum_i b_i e_i``, so the
steered field is ``b^T E0`` and the radiated power is ``b^H G b`` with
``G = E^H E``. The directivity quotient is

    D(b) = c * |b^T E0|^2 / (b^H G b),     c = 4 pi,

a generalized Rayleigh quotient whose numerator matrix ``conj(E0) E0^T`` has
rank one. Its maximizer is therefore ``b = G^{-1} conj(E0)`` with optimum
``lambda0 = E0^T G^{-1} conj(E0)``; no eigendecomposition is needed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import NumericalError
from .fieldmodel import (ArrayFieldMatrix, ArrayGeometry, AngularGrid, ElementModel,
                         build_field_matrix, synth_element_fields)

LABELS = ("optimal", "mrt", "traditional", "ga", "custom")
COND_WARN = 1e10
COND_SINGULAR = 1e15


@dataclass(frozen=True, eq=False)
class BeamVector:
    b: np.ndarray
    label: str = "custom"

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.b, dtype=complex))
        if b.ndim != 1:
            raise ValueError("beam vector must be one-dimensional")
        if not np.any(b != 0):
            raise ValueError("beam vector must have at least one nonzero entry")
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")
        object.__setattr__(self, "b", b)

    def __array__(self, dtype=None, copy=None):
        return self.b if dtype is None else self.b.astype(dtype)

    def __len__(self):
        return len(self.b)

    @property
    def amplitude_ratio(self) -> float:
        a = np.abs(self.b)
        return float(a.max() / a.min()) if a.min() > 0 else float("inf")

    def to_pairs(self) -> list:
        return [[float(v.real), float(v.imag)] for v in self.b]


@dataclass(frozen=True, eq=False)
class SolveReport:
    beam: BeamVector
    lambda0: float
    directivity: float
    condition_estimate: float
    method: str = "optimal"
    warnings: tuple = field(default=())

    @property
    def b(self) -> np.ndarray:
        return self.beam.b

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "b": self.beam.to_pairs(),
            "lambda0": float(self.lambda0),
            "directivity": float(self.directivity),
            "condition_estimate": float(self.condition_estimate),
        }


def directivity_quotient(b, A: ArrayFieldMatrix) -> float:
    """Directivity of excitation ``b`` toward ``A.direction`` (co-polar numerator)."""
    b = np.asarray(b, dtype=complex)
    den = float(A.power(b))
    if not den > 0:
        raise NumericalError("degenerate excitation: zero radiated power")
    return A.c * float(np.abs(b @ A.E0) ** 2) / den


def optimal_beamformer(A: ArrayFieldMatrix, regularization: float = 0.0) -> SolveReport:
    """Maximize the directivity quotient in closed form.

    ``regularization`` adds ``eps * trace(G) / M`` to the Gram diagonal.
    """
    if regularization < 0:
        raise ValueError("regularization must be >= 0")
    G = A.gram
    M = G.shape[0]
    if regularization > 0:
        G = G + regularization * np.real(np.trace(G)) / M * np.eye(M)
    if not np.any(A.E0 != 0):
        raise NumericalError("steering field is zero in the target direction")
    notes = []
    cond = float(np.linalg.cond(G))
    if not np.isfinite(cond) or cond > COND_SINGULAR:
        raise NumericalError("singular Gram; supply regularization")
    if cond > COND_WARN and regularization == 0:
        msg = f"ill-conditioned Gram (condition {cond:.3g}); consider regularization"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        notes.append(msg)
    try:
        b = la.solve(G, A.E0.conj(), assume_a="pos")
    except la.LinAlgError:
        raise NumericalError("singular Gram; supply regularization") from None
    lam = float(np.real(A.E0 @ b))
    if regularization == 0:
        check = directivity_quotient(b, A) / A.c
        rel = abs(check - lam) / max(abs(lam), np.finfo(float).tiny)
        if rel > 1e-10:
            notes.append(f"closed-form eigenvalue and quotient differ by {rel:.2e} relative")
    report_d = A.c * lam if regularization == 0 else directivity_quotient(b, A)
    return SolveReport(BeamVector(b, "optimal"), lam, report_d, cond, "optimal", tuple(notes))


def mrt_beamformer(A: ArrayFieldMatrix) -> BeamVector:
    """Conjugate match to the steering field."""
    return BeamVector(A.E0.conj(), "mrt")


def traditional_beamformer(geom: ArrayGeometry, model: ElementModel, grid: AngularGrid, direction,
                           actual: ArrayFieldMatrix, regularization: float = 0.0):
    """Solve on idealized coupling-free fields, score on the actual fields.

    Returns ``(beam, directivity_on_actual)``.
    """
    ideal = build_field_matrix(synth_element_fields(geom, model, grid), direction, actual.polarization)
    if ideal.num_elements != actual.num_elements:
        raise ValueError("geometry and actual field matrix disagree on element count")
    rep = optimal_beamformer(ideal, regularization)
    beam = BeamVector(rep.b, "traditional")
    return beam, directivity_quotient(beam.b, actual)


def project_to_range(b, P: float) -> BeamVector:
    """Rescale so the smallest amplitude is 1, then clip amplitudes above ``P``.

    Zero entries become amplitude 1 with phase 0. Phases are preserved.
    """
    if not P > 1:
        raise ValueError(f"range constraint P must exceed 1, got {P}")
    label = b.label if isinstance(b, BeamVector) else "custom"
    b = np.asarray(b, dtype=complex)
    amp = np.abs(b)
    phase = np.where(amp > 0, np.angle(b), 0.0)
    amp = np.where(amp > 0, amp, np.nan)
    amp = np.nan_to_num(amp / np.nanmin(amp) if np.any(np.isfinite(amp)) else amp, nan=1.0)
    amp = np.clip(amp, 1.0, P)
    return BeamVector(amp * np.exp(1j * phase), label)
