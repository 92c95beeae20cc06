"""Gridded fields on the unit torus [0, 1)^d and their Fourier coefficients.

Fourier basis is exp(2 pi i xi.x) with integer xi.  Transforms use the
Fourier-series normalisation: a constant field c has coefficient c at
xi = 0 and cos(2 pi x_1) has coefficients 1/2 at +-e_1.
"""
from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass
from math import fsum

import numpy as np

MAGIC = b"AFLD"
VERSION = 1


class FieldFormatError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        if not dims:
            raise ValueError("grid needs at least one axis")
        for n in dims:
            if n < 4 or n % 2:
                raise ValueError(f"axis length {n} must be even and >= 4")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def cube(cls, d: int, n: int) -> "GridSpec":
        return cls((n,) * d)

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    def nodes(self) -> list[np.ndarray]:
        """Broadcastable node coordinates x_i = index / n_i."""
        return np.meshgrid(*[np.arange(n) / n for n in self.dims], indexing="ij", sparse=True)

    def frequencies(self) -> list[np.ndarray]:
        """Broadcastable integer frequencies in FFT order (Nyquist is -n/2)."""
        return np.meshgrid(
            *[np.fft.fftfreq(n, 1.0 / n).round().astype(int) for n in self.dims],
            indexing="ij",
            sparse=True,
        )

    def nyquist_mask(self) -> np.ndarray:
        """True where any coordinate sits on the unpaired Nyquist frequency."""
        mask = np.zeros(self.dims, dtype=bool)
        for k, n in zip(self.frequencies(), self.dims):
            mask |= np.broadcast_to(k == -n // 2, self.dims)
        return mask


@dataclass(frozen=True)
class PeriodicField:
    """Real field with values of shape ``grid.dims + (N,)`` (component fastest)."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == self.grid.d:
            v = v[..., None]
        if v.shape[:-1] != self.grid.dims:
            raise ValueError(f"values shape {v.shape} does not fit grid {self.grid.dims}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field has non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return self.values.shape[-1]

    def mean(self) -> np.ndarray:
        flat = self.values.reshape(-1, self.N)
        return np.array([fsum(flat[:, i]) / flat.shape[0] for i in range(self.N)])

    def sup_norm(self) -> float:
        """Max over nodes of the Euclidean norm of the value."""
        return float(np.sqrt((self.values**2).sum(axis=-1)).max())

    def with_values(self, values) -> "PeriodicField":
        return PeriodicField(self.grid, values)

    def __add__(self, other: "PeriodicField") -> "PeriodicField":
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "PeriodicField") -> "PeriodicField":
        return self.with_values(self.values - other.values)

    def scaled(self, c: float) -> "PeriodicField":
        return self.with_values(c * self.values)


@dataclass(frozen=True)
class SpectralField:
    grid: GridSpec
    coeffs: np.ndarray  # complex, grid.dims + (N,), FFT ordering

    @property
    def N(self) -> int:
        return self.coeffs.shape[-1]

    def l2_norm(self) -> float:
        return float(np.sqrt(fsum((np.abs(self.coeffs) ** 2).ravel())))

    def coefficient(self, xi) -> np.ndarray:
        idx = tuple(int(x) % n for x, n in zip(xi, self.grid.dims))
        return self.coeffs[idx]


def _axes(grid: GridSpec) -> tuple[int, ...]:
    return tuple(range(grid.d))


def dft(f: PeriodicField) -> SpectralField:
    return SpectralField(f.grid, np.fft.fftn(f.values, axes=_axes(f.grid), norm="forward"))


def idft(F: SpectralField) -> PeriodicField:
    v = np.fft.ifftn(F.coeffs, axes=_axes(F.grid), norm="forward")
    return PeriodicField(F.grid, v.real)


def constant_field(grid: GridSpec, value) -> PeriodicField:
    value = np.atleast_1d(np.asarray(value, dtype=float))
    return PeriodicField(grid, np.broadcast_to(value, grid.dims + value.shape).copy())


def sample_function(grid: GridSpec, fn) -> PeriodicField:
    """Sample ``fn(*coords) -> array (..., N)`` or scalar array at the nodes."""
    x = np.meshgrid(*[np.arange(n) / n for n in grid.dims], indexing="ij")
    return PeriodicField(grid, np.asarray(fn(*x), dtype=float))


# -- AFLD files -------------------------------------------------------------


def encode_afld(f: PeriodicField) -> bytes:
    """Serialise to bytes: header, then float64 values with the component
    index fastest, then x_1, then x_2, and so on."""
    header = MAGIC + struct.pack("<III", VERSION, f.grid.d, f.N)
    header += struct.pack(f"<{f.grid.d}I", *f.grid.dims)
    spatial = tuple(reversed(range(f.grid.d)))
    body = np.ascontiguousarray(np.transpose(f.values, spatial + (f.grid.d,)), dtype="<f8")
    return header + body.tobytes()


def decode_afld(data: bytes) -> PeriodicField:
    if len(data) < 16 or data[:4] != MAGIC:
        raise FieldFormatError("not an AFLD file (bad magic)")
    version, d, N = struct.unpack_from("<III", data, 4)
    if version != VERSION:
        raise FieldFormatError(f"unsupported AFLD version {version}")
    if d < 1 or N < 1:
        raise FieldFormatError("bad dimensions in header")
    off = 16 + 4 * d
    if len(data) < off:
        raise FieldFormatError("truncated header")
    dims = struct.unpack_from(f"<{d}I", data, 16)
    count = int(np.prod(dims)) * N
    if len(data) != off + 8 * count:
        raise FieldFormatError(f"expected {count} float64 values, file size disagrees")
    body = np.frombuffer(data, dtype="<f8", count=count, offset=off)
    arr = body.reshape(tuple(reversed(dims)) + (N,))
    arr = np.transpose(arr, tuple(reversed(range(d))) + (d,))
    try:
        return PeriodicField(GridSpec(dims), np.array(arr, dtype=float))
    except ValueError as exc:
        raise FieldFormatError(str(exc)) from exc


def atomic_write(path: str | os.PathLike, data: bytes) -> None:
    """Write via a temporary file in the target directory plus rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_afld(path, f: PeriodicField) -> None:
    atomic_write(path, encode_afld(f))


def read_afld(path) -> PeriodicField:
    with open(path, "rb") as fh:
        return decode_afld(fh.read())
