"""Angular grids, per-element far fields and the weighted array field matrix.

Element fields are complex (E_theta, E_phi) samples of each element's far field,
dimensionless and normalized so that only ratios matter. Synthetic sets are
built from an isolated element pattern times the geometric phase of the element
position and can be evaluated analytically in any direction; loaded sets are
only known on their grid.

Grid points are ordered theta-major: point ``p = j * q + k`` sits at
``(theta[j], phi[k])``. The weighted field matrix ``E`` has two rows per point,
the theta component at ``2p`` and the phi component at ``2p + 1``, each scaled by
the square root of the point's solid-angle weight. With that weighting
``b^H (E^H E) b`` is a quadrature of the radiated power of excitation ``b``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Literal

import numpy as np

from .errors import FieldFormatError

SPEED_OF_LIGHT = 299_792_458.0
GRID_LAYOUT = "midpoint-theta-major"
CSV_HEADER = ("theta_deg", "phi_deg", "re_etheta", "im_etheta", "re_ephi", "im_ephi")
POLARIZATIONS = ("theta", "phi")
ELEMENT_KINDS = ("isotropic", "hertzian-dipole", "half-wave-dipole")

Polarization = Literal["theta", "phi"]


def _fejer_weights(l: int) -> np.ndarray:
    """Fejér first-rule weights for the nodes cos((j + 1/2) pi / l) on [-1, 1]."""
    theta = (np.arange(l) + 0.5) * np.pi / l
    k = np.arange(1, l // 2 + 1)
    terms = np.cos(2.0 * np.outer(theta, k)) / (4.0 * k**2 - 1.0)
    return (2.0 / l) * (1.0 - 2.0 * terms.sum(axis=1))


@dataclass(frozen=True, eq=False)
class AngularGrid:
    """Sampled sphere with theta midpoints and uniform phi."""

    l: int
    q: int
    theta_rad: np.ndarray
    phi_rad: np.ndarray
    weights_sr: np.ndarray
    rule: str = "fejer"

    @property
    def size(self) -> int:
        return self.l * self.q

    @cached_property
    def point_theta(self) -> np.ndarray:
        return np.repeat(self.theta_rad, self.q)

    @cached_property
    def point_phi(self) -> np.ndarray:
        return np.tile(self.phi_rad, self.l)

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Quadrature over the sphere along the last axis (length ``l * q``)."""
        return np.asarray(values) @ self.weights_sr


def make_angular_grid(l: int, q: int, rule: str = "fejer") -> AngularGrid:
    """Build a theta-midpoint / uniform-phi grid.

    ``rule="fejer"`` (default) weights the midpoint theta nodes with Fejér's first
    rule, which integrates polynomials in cos(theta) of degree below ``l`` exactly,
    so the weights sum to 4 pi to round-off. ``rule="midpoint"`` uses the plain
    ``sin(theta) dtheta dphi`` cell weights, accurate only to second order.
    """
    if int(l) != l or int(q) != q:
        raise ValueError("grid sizes must be integers")
    l, q = int(l), int(q)
    if l < 2 or q < 4:
        raise ValueError(f"grid too coarse for quadrature: need l >= 2 and q >= 4, got l={l}, q={q}")
    theta = (np.arange(l) + 0.5) * np.pi / l
    phi = np.arange(q) * 2.0 * np.pi / q
    dphi = 2.0 * np.pi / q
    if rule == "fejer":
        w_theta = _fejer_weights(l)
    elif rule == "midpoint":
        w_theta = np.sin(theta) * (np.pi / l)
    else:
        raise ValueError(f"unknown quadrature rule {rule!r}")
    weights = np.repeat(w_theta * dphi, q)
    for arr in (theta, phi, weights):
        arr.setflags(write=False)
    return AngularGrid(l, q, theta, phi, weights, rule)


@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    positions_m: np.ndarray
    frequency_hz: float

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions_m, dtype=float))
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 1:
            raise ValueError("positions_m must be an (M, 3) array with M >= 1")
        if not (self.frequency_hz > 0 and math.isfinite(self.frequency_hz)):
            raise ValueError("frequency_hz must be positive")
        object.__setattr__(self, "positions_m", pos)

    @property
    def num_elements(self) -> int:
        return self.positions_m.shape[0]

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency_hz

    @property
    def wavenumber(self) -> float:
        return 2.0 * np.pi * self.frequency_hz / SPEED_OF_LIGHT

    @property
    def enclosing_radius(self) -> float:
        """Radius of the smallest origin-centred sphere holding every element."""
        return float(np.max(np.linalg.norm(self.positions_m, axis=1)))


def linear_array(num_elements: int, spacing_wavelengths: float, frequency_hz: float,
                 axis=(1.0, 0.0, 0.0), centered: bool = True) -> ArrayGeometry:
    """Uniform line array along ``axis``, centred on the origin by default."""
    if num_elements < 1:
        raise ValueError("num_elements must be >= 1")
    if not spacing_wavelengths > 0:
        raise ValueError("spacing must be positive")
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    d = spacing_wavelengths * SPEED_OF_LIGHT / frequency_hz
    idx = np.arange(num_elements, dtype=float)
    if centered:
        idx -= (num_elements - 1) / 2.0
    return ArrayGeometry(np.outer(idx * d, axis), frequency_hz)


@dataclass(frozen=True)
class ElementModel:
    kind: str = "half-wave-dipole"
    axis: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if self.kind not in ELEMENT_KINDS:
            raise ValueError(f"unknown element kind {self.kind!r}; expected one of {ELEMENT_KINDS}")
        axis = tuple(float(a) for a in self.axis)
        if len(axis) != 3 or abs(math.sqrt(sum(a * a for a in axis)) - 1.0) > 1e-12:
            raise ValueError("element axis must be a unit 3-vector")
        object.__setattr__(self, "axis", axis)


def unit_vectors(theta, phi):
    """Return (r_hat, theta_hat, phi_hat), each of shape (..., 3)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    r_hat = np.stack([st * cp, st * sp, ct], axis=-1)
    t_hat = np.stack([ct * cp, ct * sp, -st], axis=-1)
    p_hat = np.stack([-sp, cp, np.zeros_like(ct)], axis=-1)
    return r_hat, t_hat, p_hat


def isolated_pattern(model: ElementModel, theta, phi) -> np.ndarray:
    """Isolated element far field at the origin, shape (..., 2) complex."""
    r_hat, t_hat, p_hat = unit_vectors(theta, phi)
    out = np.zeros(r_hat.shape[:-1] + (2,), dtype=complex)
    if model.kind == "isotropic":
        out[..., 0] = 1.0
        return out
    a = np.asarray(model.axis)
    # far field points along -a projected transverse to r_hat
    a_theta = -(t_hat @ a)
    a_phi = -(p_hat @ a)
    if model.kind == "hertzian-dipole":
        out[..., 0] = a_theta
        out[..., 1] = a_phi
        return out
    cos_psi = np.clip(r_hat @ a, -1.0, 1.0)
    sin2_psi = 1.0 - cos_psi**2
    safe = sin2_psi > 1e-24
    scale = np.zeros_like(cos_psi)
    scale[safe] = np.cos(0.5 * np.pi * cos_psi[safe]) / sin2_psi[safe]
    out[..., 0] = scale * a_theta
    out[..., 1] = scale * a_phi
    return out


@dataclass(frozen=True, eq=False)
class FieldDistortion:
    """Smooth multiplicative per-element pattern error.

    Element ``i`` is multiplied by ``1 + level * g_i(r_hat)`` with
    ``g_i = c_i0 + c_i . r_hat`` a random complex affine function of direction,
    scaled to unit RMS over the sphere. It stands in for the embedded-pattern
    distortion that coupling causes, while staying analytic in direction.
    """

    level: float
    coefficients: np.ndarray  # (M, 4) complex, unit RMS per element

    def factor(self, theta, phi) -> np.ndarray:
        r_hat, _, _ = unit_vectors(theta, phi)
        g = self.coefficients[:, :1] + self.coefficients[:, 1:] @ np.moveaxis(r_hat, -1, 0).reshape(3, -1)
        return 1.0 + self.level * g.reshape((self.coefficients.shape[0],) + r_hat.shape[:-1])


def random_distortion(num_elements: int, level: float = 0.05, seed: int = 0) -> FieldDistortion:
    rng = np.random.default_rng(seed)
    c = (rng.standard_normal((num_elements, 4)) + 1j * rng.standard_normal((num_elements, 4))) / np.sqrt(2)
    # sphere average of |c0 + c.r|^2 is |c0|^2 + |c|^2 / 3
    rms = np.sqrt(np.abs(c[:, 0]) ** 2 + np.sum(np.abs(c[:, 1:]) ** 2, axis=1) / 3.0)
    return FieldDistortion(float(level), c / rms[:, None])


@dataclass(frozen=True, eq=False)
class SyntheticSource:
    geometry: ArrayGeometry
    model: ElementModel
    distortion: FieldDistortion | None = None

    def evaluate(self, theta, phi) -> np.ndarray:
        """Element fields at arbitrary directions, shape (M, ..., 2)."""
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        r_hat, _, _ = unit_vectors(theta, phi)
        pattern = isolated_pattern(self.model, theta, phi)
        phase = np.exp(1j * self.geometry.wavenumber * np.tensordot(self.geometry.positions_m, r_hat, axes=([1], [-1])))
        fields = phase[..., None] * pattern[None]
        if self.distortion is not None:
            fields = fields * self.distortion.factor(theta, phi)[..., None]
        return fields


@dataclass(frozen=True, eq=False)
class ElementFieldSet:
    grid: AngularGrid
    fields: np.ndarray  # (M, l*q, 2) complex
    frequency_hz: float
    source: SyntheticSource | None = field(default=None, repr=False)

    def __post_init__(self):
        f = np.asarray(self.fields, dtype=complex)
        if f.ndim != 3 or f.shape[1] != self.grid.size or f.shape[2] != 2:
            raise ValueError(f"fields must have shape (M, {self.grid.size}, 2), got {f.shape}")
        if not np.all(np.isfinite(f)):
            raise ValueError("field samples must be finite")
        object.__setattr__(self, "fields", f)

    @property
    def num_elements(self) -> int:
        return self.fields.shape[0]

    def at(self, theta, phi) -> np.ndarray:
        """Element fields in the given direction(s), shape (M, ..., 2).

        Synthetic sets are evaluated analytically; loaded sets return the
        nearest grid sample.
        """
        if self.source is not None:
            return self.source.evaluate(theta, phi)
        r0, _, _ = unit_vectors(theta, phi)
        r_grid, _, _ = unit_vectors(self.grid.point_theta, self.grid.point_phi)
        nearest = np.argmax(r0 @ r_grid.T, axis=-1)
        return self.fields[:, nearest, :]


def synth_element_fields(geom: ArrayGeometry, model: ElementModel, grid: AngularGrid,
                         distortion: FieldDistortion | None = None) -> ElementFieldSet:
    if distortion is not None and distortion.coefficients.shape[0] != geom.num_elements:
        raise ValueError("distortion element count does not match geometry")
    source = SyntheticSource(geom, model, distortion)
    fields = source.evaluate(grid.point_theta, grid.point_phi)
    return ElementFieldSet(grid, fields, geom.frequency_hz, source)


def distort(fset: ElementFieldSet, level: float = 0.05, seed: int = 0) -> ElementFieldSet:
    """Apply a seeded smooth random pattern distortion to every element."""
    dist = random_distortion(fset.num_elements, level, seed)
    if fset.source is not None:
        if fset.source.distortion is not None:
            raise ValueError("field set is already distorted")
        return synth_element_fields(fset.source.geometry, fset.source.model, fset.grid, dist)
    g = fset.grid
    return ElementFieldSet(g, fset.fields * dist.factor(g.point_theta, g.point_phi)[..., None], fset.frequency_hz)


def check_direction(theta0: float, phi0: float) -> None:
    if not (0.0 <= theta0 <= np.pi):
        raise ValueError(f"theta0 must lie in [0, pi], got {theta0}")
    if not (0.0 <= phi0 < 2.0 * np.pi):
        raise ValueError(f"phi0 must lie in [0, 2 pi), got {phi0}")


@dataclass(frozen=True, eq=False)
class ArrayFieldMatrix:
    """Weighted field matrix ``E`` (2lq x M) and steering fields ``E0`` (M,)."""

    E: np.ndarray
    E0: np.ndarray
    direction: tuple
    polarization: str = "theta"
    c: float = 4.0 * np.pi

    @property
    def num_elements(self) -> int:
        return self.E.shape[1]

    @cached_property
    def gram(self) -> np.ndarray:
        g = self.E.conj().T @ self.E
        # exact Hermitian symmetry; the product is only Hermitian to round-off
        return 0.5 * (g + g.conj().T)

    def power(self, b) -> np.ndarray:
        """Quadrature radiated power of excitation(s) ``b`` (last axis = elements)."""
        b = np.asarray(b)
        return np.real(np.einsum("...i,ij,...j->...", b.conj(), self.gram, b))


def build_field_matrix(fset: ElementFieldSet, direction, polarization: Polarization = "theta") -> ArrayFieldMatrix:
    theta0, phi0 = (float(a) for a in direction)
    check_direction(theta0, phi0)
    if polarization not in POLARIZATIONS:
        raise ValueError(f"polarization must be one of {POLARIZATIONS}")
    if polarization == "phi" and abs(math.sin(theta0)) < 1e-12:
        raise ValueError("phi polarization is undefined at the poles")
    w = np.sqrt(fset.grid.weights_sr)
    E = (fset.fields * w[None, :, None]).reshape(fset.num_elements, -1).T
    E0 = fset.at(theta0, phi0)[:, POLARIZATIONS.index(polarization)]
    return ArrayFieldMatrix(np.ascontiguousarray(E), np.asarray(E0, dtype=complex), (theta0, phi0), polarization)


# ---------------------------------------------------------------- persistence


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_field_set(fset: ElementFieldSet, path) -> Path:
    """Write a field set directory; returns the manifest path."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    g = fset.grid
    manifest = {
        "frequency_hz": float(fset.frequency_hz),
        "num_elements": fset.num_elements,
        "l": g.l,
        "q": g.q,
        "grid": GRID_LAYOUT,
    }
    manifest_path = path / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    theta_deg = np.degrees(g.point_theta)
    phi_deg = np.degrees(g.point_phi)
    for i in range(fset.num_elements):
        f = fset.fields[i]
        lines = [",".join(CSV_HEADER)]
        for p in range(g.size):
            et, ep = f[p]
            lines.append(",".join(map(_fmt, (theta_deg[p], phi_deg[p], et.real, et.imag, ep.real, ep.imag))))
        with open(path / f"element_{i:03d}.csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    return manifest_path


def _read_manifest(path: Path) -> dict:
    mpath = path / "manifest.json"
    try:
        manifest = json.loads(mpath.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise FieldFormatError("missing manifest.json", mpath) from None
    except json.JSONDecodeError as exc:
        raise FieldFormatError(f"malformed manifest: {exc.msg}", mpath, exc.lineno) from None
    for key, kind in (("frequency_hz", (int, float)), ("num_elements", int), ("l", int), ("q", int), ("grid", str)):
        if key not in manifest:
            raise FieldFormatError(f"manifest missing key {key!r}", mpath)
        if not isinstance(manifest[key], kind) or isinstance(manifest[key], bool):
            raise FieldFormatError(f"manifest key {key!r} has wrong type", mpath)
    if manifest["grid"] != GRID_LAYOUT:
        raise FieldFormatError(f"unsupported grid layout {manifest['grid']!r}", mpath)
    if manifest["num_elements"] < 1:
        raise FieldFormatError("num_elements must be >= 1", mpath)
    return manifest


def load_field_set(path, rule: str = "fejer") -> ElementFieldSet:
    """Read a field set directory written by :func:`save_field_set` (or any
    producer following the same format)."""
    path = Path(path)
    manifest = _read_manifest(path)
    try:
        grid = make_angular_grid(manifest["l"], manifest["q"], rule)
    except ValueError as exc:
        raise FieldFormatError(str(exc), path / "manifest.json") from None
    m = manifest["num_elements"]
    files = sorted(path.glob("element_*.csv"))
    expected = [path / f"element_{i:03d}.csv" for i in range(m)]
    if files != expected:
        raise FieldFormatError(
            f"element count mismatch: manifest declares {m}, found {len(files)} element files", path)
    theta_deg = np.degrees(grid.point_theta)
    phi_deg = np.degrees(grid.point_phi)
    fields = np.empty((m, grid.size, 2), dtype=complex)
    for i, fpath in enumerate(expected):
        with open(fpath, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
                raise FieldFormatError("malformed header", fpath, 1)
            rows = 0
            for lineno, row in enumerate(reader, start=2):
                if rows >= grid.size:
                    raise FieldFormatError(f"row count mismatch: expected {grid.size} rows", fpath, lineno)
                if len(row) != 6:
                    raise FieldFormatError(f"expected 6 columns, got {len(row)}", fpath, lineno)
                try:
                    vals = [float(v) for v in row]
                except ValueError:
                    raise FieldFormatError("non-numeric value", fpath, lineno) from None
                if not all(math.isfinite(v) for v in vals):
                    raise FieldFormatError("non-finite value", fpath, lineno)
                if abs(vals[0] - theta_deg[rows]) > 1e-9 or abs(vals[1] - phi_deg[rows]) > 1e-9:
                    raise FieldFormatError("sample angles do not match the declared grid", fpath, lineno)
                fields[i, rows, 0] = complex(vals[2], vals[3])
                fields[i, rows, 1] = complex(vals[4], vals[5])
                rows += 1
            if rows != grid.size:
                raise FieldFormatError(f"row count mismatch: expected {grid.size} rows, got {rows}", fpath)
    return ElementFieldSet(grid, fields, float(manifest["frequency_hz"]))
