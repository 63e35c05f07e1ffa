"""Exceptional energy sets and admissibility checks.

Three families of energies are tracked in the ``lambda^2`` plane (plus a
user-supplied exclusion list in the ``lambda`` plane standing in for
resolvent poles, which this toolkit does not compute):

* the real interval ``[min V0 - alpha_max^2 n^2/4 + n^2/4,
  max V0 - alpha_min^2 n^2/4 + n^2/4]`` swept by the branch data,
* the discrete mode family ``lambda^2 = V0(y) - n^2/4 + alpha(y)^2 (k^2 - n^2)/4``
  at which the conjugate indicial root hits ``(n - k)/2``,
* explicit user-excluded energies.

``zero_scan`` is a deliberately heuristic helper: it locates zeros of a
callable on a rectangle of the complex plane by grid search plus local
refinement, and is complete only up to the chosen grid resolution.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .boundary_jets import BoundaryPatch, ComplexEnergy
from .errors import EvaluationFailure, ScatjetError

__all__ = [
    "ModePoint",
    "ExceptionalSet",
    "Admissibility",
    "omega_interval",
    "omega_prime_modes",
    "exceptional_set",
    "is_admissible",
    "zero_scan",
]


@dataclass(frozen=True)
class ModePoint:
    """One conjugate-root mode: at ``lambda_sq`` the lower root is ``(n-k)/2``."""

    k: int
    y_index: tuple[int, ...]
    lambda_sq: float


@dataclass(frozen=True)
class ExceptionalSet:
    interval_lambda_sq: tuple[float, float]
    mode_points: tuple[ModePoint, ...]
    user_excluded: tuple[complex, ...] = ()


@dataclass(frozen=True)
class Admissibility:
    ok: bool
    reason: str | None
    distances: dict[str, float]

    def __bool__(self) -> bool:  # pragma: no cover - convenience
        return self.ok


def omega_interval(patch: BoundaryPatch) -> tuple[float, float]:
    """Endpoints of the real exceptional interval in the ``lambda^2`` plane."""
    n = patch.n
    quarter = n * n / 4.0
    a_min = float(np.min(patch.alpha))
    a_max = float(np.max(patch.alpha))
    v_min = float(np.min(patch.v_jet[0]))
    v_max = float(np.max(patch.v_jet[0]))
    return (v_min - a_max**2 * quarter + quarter, v_max - a_min**2 * quarter + quarter)


def omega_prime_modes(patch: BoundaryPatch, k_max: int) -> list[ModePoint]:
    """All mode points for ``0 <= k <= k_max`` over the patch grid."""
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    n = patch.n
    out: list[ModePoint] = []
    for idx in patch.grid_points():
        v0 = float(patch.v_jet[0][idx])
        a2 = float(patch.alpha[idx]) ** 2
        for k in range(k_max + 1):
            lam_sq = v0 - n * n / 4.0 + a2 * (k * k - n * n) / 4.0
            out.append(ModePoint(k=k, y_index=idx, lambda_sq=lam_sq))
    return out


def exceptional_set(
    patch: BoundaryPatch, k_max: int = 2, user_excluded: Sequence[complex] = ()
) -> ExceptionalSet:
    return ExceptionalSet(
        interval_lambda_sq=omega_interval(patch),
        mode_points=tuple(omega_prime_modes(patch, k_max)),
        user_excluded=tuple(complex(z) for z in user_excluded),
    )


def _dist_to_segment(w: complex, a: float, b: float) -> float:
    """Distance from a point of the complex plane to the real segment [a, b]."""
    re_gap = max(a - w.real, 0.0, w.real - b)
    return float(np.hypot(re_gap, w.imag))


def is_admissible(
    energy: ComplexEnergy, es: ExceptionalSet, margin: float = 1e-6
) -> Admissibility:
    """Check ``lambda`` against all exceptional families with a safety margin.

    Interval and mode distances are measured in the ``lambda^2`` plane; the
    user exclusion list lives in the ``lambda`` plane.  The nearest violating
    family (if any) is named in ``reason``.
    """
    if margin < 0:
        raise ValueError("margin must be >= 0")
    w = complex(energy.lam_sq)
    a, b = es.interval_lambda_sq
    distances = {"omega-interval": _dist_to_segment(w, a, b)}
    if es.mode_points:
        distances["omega-prime-mode"] = min(
            abs(w - complex(m.lambda_sq)) for m in es.mode_points
        )
    if es.user_excluded:
        distances["user-excluded (D)"] = min(
            abs(complex(energy.lam) - z) for z in es.user_excluded
        )
    violations = {name: d for name, d in distances.items() if d <= margin}
    if violations:
        worst = min(violations, key=violations.get)
        return Admissibility(
            ok=False,
            reason=f"lambda within margin {margin:g} of {worst} (distance {violations[worst]:.3e})",
            distances=distances,
        )
    return Admissibility(ok=True, reason=None, distances=distances)


def _refine_minimum(
    f_abs: Callable[[complex], float], center: complex, radius: float, *, iters: int = 48
) -> complex:
    """Shrinking 5x5 pattern search for a local minimum of ``|f|``."""
    best = center
    offsets = np.linspace(-1.0, 1.0, 5)
    for _ in range(iters):
        cands = [best + radius * (dx + 1j * dy) for dx in offsets for dy in offsets]
        vals = [f_abs(c) for c in cands]
        best = cands[int(np.argmin(vals))]
        radius *= 0.5
        if radius < 1e-13:
            break
    return best


def zero_scan(
    f: Callable[[complex], complex],
    region: tuple[float, float, float, float],
    step: float,
    tol: float = 1e-6,
) -> list[complex]:
    """Approximate zeros of ``f`` on ``region = (re0, re1, im0, im1)``.

    Grid samples ``|f|`` at spacing ``step``, takes local minima as
    candidates, refines each by a shrinking pattern search, and keeps
    refined points with ``|f| <= tol``.  Zeros separated by less than
    ``step/2`` are merged; completeness is only up to the grid resolution.
    """
    re0, re1, im0, im1 = region
    if re1 < re0 or im1 < im0 or step <= 0:
        raise ValueError("bad scan region or step")

    def f_abs(zz: complex) -> float:
        try:
            return abs(f(zz))
        except ScatjetError as exc:
            raise EvaluationFailure(f"scan callable failed at {zz}: {exc}", at=zz) from exc

    res = np.arange(re0, re1 + step * 0.5, step)
    ims = np.arange(im0, im1 + step * 0.5, step)
    mag = np.full((len(res), len(ims)), np.inf)
    for i, x in enumerate(res):
        for j, y in enumerate(ims):
            mag[i, j] = f_abs(complex(x, y))
    padded = np.pad(mag, 1, constant_values=np.inf)
    interior = padded[1:-1, 1:-1]
    neighbors = [
        padded[1 + di : padded.shape[0] - 1 + di, 1 + dj : padded.shape[1] - 1 + dj]
        for di in (-1, 0, 1)
        for dj in (-1, 0, 1)
        if (di, dj) != (0, 0)
    ]
    is_min = np.all([interior <= nb for nb in neighbors], axis=0)

    zeros: list[complex] = []
    for i, j in np.argwhere(is_min):
        # Screen: only refine minima that could plausibly reach zero within a
        # cell, judged by the local slope.  Keeps scans of zero-free functions
        # (e.g. strictly positive integrals) from paying for refinement.
        nb = padded[i : i + 3, j : j + 3]
        finite = nb[np.isfinite(nb)]
        gap = float(finite.max() - mag[i, j]) if finite.size else np.inf
        if mag[i, j] > max(tol, 1.5 * gap):
            continue
        seed = complex(res[i], ims[j])
        refined = _refine_minimum(f_abs, seed, step)
        if f_abs(refined) > tol:
            continue
        if im1 - im0 < 1e-12:
            refined = complex(refined.real, im0)  # collapse to the scanned line
        if all(abs(refined - z) > step / 2 for z in zeros):
            zeros.append(refined)
    zeros.sort(key=lambda z: (z.real, z.imag))
    return zeros
