"""Forward scattering data: principal symbol samples and the leading
first-order singularity coefficient.

The principal symbol of the scattering matrix at energy ``lambda`` is

    S(y, xi) = 2^(n - 2 sigma) Gamma(n/2 - sigma) / Gamma(sigma - n/2)
               * |xi|_{h0}^(2 sigma - n)

with ``sigma = sigma(lambda, y)`` the indicial root and
``|xi|_{h0}^2 = xi^T h0^-1 xi`` the covector norm, homogeneous of degree
``2 sigma - n``.

When two operators share boundary data to zeroth order, the difference of
their scattering kernels has radial leading singularity with angular
profile

    F(omega) = t1 * sum_ij H_ij D_ij(omega) + t2 * (W1 - alpha^2 (1-n) T / 4)

where ``D_ij(omega) = (3 - 2 sigma)(delta_ij + (1 - 2 sigma) omega_i omega_j)``
is the unit-sphere Hessian profile of ``|Y|^(3 - 2 sigma)`` and ``t1, t2``
are model-integral factors (all remaining scalar prefactors are normalized
to one here; a CLI hook can scale them).  Probe directions are understood in
the frame where ``alpha^2 h0`` is the identity; ``boundary_normalization``
produces the linear map into that frame.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .boundary_jets import (
    BoundaryPatch,
    ComplexEnergy,
    PerturbationData,
    indicial_root_at,
)
from .errors import ChartUndefined, GammaPole, ZeroCovector
from scipy.special import gamma as _gamma

__all__ = [
    "SymbolSample",
    "SingularitySample",
    "ProbeSet",
    "gamma_prefactor",
    "covector_norm",
    "principal_symbol",
    "radial_derivative_kernel",
    "singularity_coefficient",
    "default_probe_set",
    "probe_design_rank",
    "boundary_normalization",
    "blowup_coordinates",
    "BlowupCharts",
]


@dataclass(frozen=True)
class SymbolSample:
    y_index: tuple[int, ...]
    xi: tuple[float, ...]
    lam: complex
    value: complex


@dataclass(frozen=True)
class SingularitySample:
    omega: tuple[float, ...]
    value: complex


@dataclass(frozen=True)
class ProbeSet:
    """Unit probe directions for first-order recovery."""

    vectors: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        vecs = tuple(tuple(float(c) for c in v) for v in self.vectors)
        for v in vecs:
            if abs(np.linalg.norm(v) - 1.0) > 1e-12:
                raise ValueError(f"probe {v} is not a unit vector")
        object.__setattr__(self, "vectors", vecs)

    def __iter__(self):
        return iter(np.asarray(v) for v in self.vectors)

    def __len__(self):
        return len(self.vectors)


def default_probe_set(n: int) -> ProbeSet:
    """``{e_i}`` together with ``(e_i +/- e_j)/sqrt(2)`` for ``i < j``."""
    eye = np.eye(n)
    vecs = [eye[i] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            vecs.append((eye[i] + eye[j]) / np.sqrt(2.0))
            vecs.append((eye[i] - eye[j]) / np.sqrt(2.0))
    return ProbeSet(vectors=tuple(tuple(v) for v in vecs))


def probe_design_rank(probes: ProbeSet, tol: float = 1e-10) -> tuple[int, np.ndarray]:
    """Rank of the rows ``[vech(omega omega^T), 1]`` over the probe set.

    For unit probes every row satisfies ``tr(omega omega^T) = 1``, which ties
    the constant column to the diagonal columns; the attainable rank is
    therefore ``n(n+1)/2`` and the deficit is reported, not treated as an
    error.
    """
    n = len(probes.vectors[0])
    rows = []
    for w in probes:
        outer = np.outer(w, w)
        row = [outer[i, i] for i in range(n)]
        row += [2.0 * outer[i, j] for i in range(n) for j in range(i + 1, n)]
        row.append(1.0)
        rows.append(row)
    mat = np.asarray(rows)
    svals = np.linalg.svd(mat, compute_uv=False)
    rank = int(np.sum(svals > tol * svals[0]))
    return rank, svals


def gamma_prefactor(sigma: complex, n: int) -> complex:
    """``2^(n - 2 sigma) Gamma(n/2 - sigma) / Gamma(sigma - n/2)``."""
    sig = complex(sigma)
    half_off = sig - n / 2.0
    if abs(half_off.imag) < 1e-12 and abs(half_off.real - round(half_off.real)) < 1e-12:
        raise GammaPole(
            f"sigma - n/2 = {half_off} is an integer: Gamma pole/zero in the prefactor"
        )
    return complex(2.0 ** (n - 2.0 * sig) * _gamma(n / 2.0 - sig) / _gamma(sig - n / 2.0))


def covector_norm(xi: Sequence[float], h0: np.ndarray) -> float:
    """``sqrt(xi^T h0^-1 xi)``, the boundary-metric norm of a covector."""
    v = np.asarray(xi, dtype=float)
    if not np.any(v):
        raise ZeroCovector("covector is zero")
    q = float(v @ np.linalg.solve(h0, v))
    return float(np.sqrt(q))


def principal_symbol(
    patch: BoundaryPatch,
    y_index: tuple[int, ...],
    xi: Sequence[float],
    energy: ComplexEnergy,
) -> SymbolSample:
    """Principal symbol sample at one boundary point and covector."""
    sigma = indicial_root_at(patch, y_index, energy)
    pref = gamma_prefactor(sigma, patch.n)
    norm = covector_norm(xi, np.asarray(patch.h_jet[0][y_index]))
    value = pref * np.exp((2.0 * sigma - patch.n) * np.log(norm))
    return SymbolSample(
        y_index=tuple(y_index),
        xi=tuple(float(c) for c in np.asarray(xi, dtype=float)),
        lam=energy.lam,
        value=complex(value),
    )


def radial_derivative_kernel(omega: Sequence[float], sigma: complex) -> np.ndarray:
    """Unit-sphere Hessian profile ``(3-2s)(delta_ij + (1-2s) w_i w_j)``.

    Equals ``|Y|^(2s-1) d_i d_j |Y|^(3-2s)`` evaluated at ``Y = omega``;
    scale invariant in ``|Y|``, with trace ``(3-2s)(n + 1 - 2s)``.
    """
    w = np.asarray(omega, dtype=float)
    if abs(np.linalg.norm(w) - 1.0) > 1e-9:
        raise ValueError("omega must be a unit vector")
    sig = complex(sigma)
    n = w.size
    return (3.0 - 2.0 * sig) * (np.eye(n) + (1.0 - 2.0 * sig) * np.outer(w, w))


def boundary_normalization(alpha: float, h0: np.ndarray) -> np.ndarray:
    """Upper-triangular ``R`` with ``R^T R = alpha^2 h0``.

    ``y -> R y`` maps physical boundary coordinates to the frame where the
    rescaled metric is the identity; probe directions live in that frame
    (``R w / |R w|`` converts a physical direction ``w``).
    """
    m = alpha * alpha * np.asarray(h0, dtype=float)
    # numpy returns the lower factor; transpose for the upper one
    return np.linalg.cholesky(m).T


def singularity_coefficient(
    pd: PerturbationData,
    h0: np.ndarray,
    alpha: float,
    sigma: complex,
    t1: complex,
    t2: complex,
    omega: Sequence[float],
) -> SingularitySample:
    """Angular singularity coefficient ``F(omega)`` of the kernel difference."""
    D = radial_derivative_kernel(omega, sigma)
    value = t1 * np.sum(pd.H * D) + t2 * (
        pd.W[1] - alpha * alpha * (1.0 - pd.n) * pd.T / 4.0
    )
    return SingularitySample(
        omega=tuple(float(c) for c in np.asarray(omega, dtype=float)), value=complex(value)
    )


# -- stretched double-space charts -----------------------------------------


@dataclass(frozen=True)
class BlowupCharts:
    """Projective charts of the stretched product at a boundary point pair.

    ``left``: ``(s, z) = (x/x', (y - y')/x')`` with base ``(x', y')``;
    ``right``: ``(t, z') = (x'/x, -(y - y')/x)`` with base ``(x, y)``;
    ``front``: ``(rho, rho', omega) = (x/|Y|, x'/|Y|, Y/|Y|)`` with
    ``r = |Y|`` and ``Y = y - y'``.  ``R = sqrt(x^2 + x'^2 + |Y|^2)``.
    Charts undefined at the given point are ``None``; ``chart(name)`` raises
    :class:`ChartUndefined` instead.
    """

    R: float
    left: dict | None
    right: dict | None
    front: dict | None

    def chart(self, name: str) -> dict:
        got = getattr(self, name, None)
        if name not in ("left", "right", "front"):
            raise ValueError(f"unknown chart {name!r}")
        if got is None:
            raise ChartUndefined(f"{name} chart undefined at this point")
        return got


def blowup_coordinates(
    x: float, x_prime: float, y: Sequence[float], y_prime: Sequence[float]
) -> BlowupCharts:
    """All well-defined projective charts at ``(x, y, x', y')``.

    On overlaps the left/right charts satisfy ``t = 1/s`` and ``z' = -z/s``.
    """
    yv = np.asarray(y, dtype=float)
    ypv = np.asarray(y_prime, dtype=float)
    if yv.shape != ypv.shape:
        raise ValueError("y and y' must have the same length")
    Y = yv - ypv
    r = float(np.linalg.norm(Y))
    R = float(np.sqrt(x * x + x_prime * x_prime + r * r))
    left = None
    if x_prime != 0.0:
        left = {
            "s": x / x_prime,
            "z": tuple(Y / x_prime),
            "x_prime": x_prime,
            "y_prime": tuple(ypv),
        }
    right = None
    if x != 0.0:
        right = {"t": x_prime / x, "z_prime": tuple(-Y / x), "x": x, "y": tuple(yv)}
    front = None
    if r != 0.0:
        front = {"rho": x / r, "rho_prime": x_prime / r, "r": r, "omega": tuple(Y / r)}
    return BlowupCharts(R=R, left=left, right=right, front=front)
