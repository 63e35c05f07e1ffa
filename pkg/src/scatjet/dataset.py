"""Serialized scattering-symbol datasets.

The JSON layout is deliberately flat and canonical: complex scalars are
``[re, im]`` pairs, complex arrays nest those pairs, object keys are sorted
and separators fixed, so the same dataset always serializes to the same
bytes.  Grid indices become comma-joined keys (``"3"`` or ``"1,2"``),
covector labels join with ``+`` (``"0"`` for ``e_1``, ``"0+1"`` for
``e_1 + e_2``).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import IoError
from .forward_scattering import SingularitySample

SCHEMA = "scatjet.symbols/1"


def encode_complex(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def decode_complex(obj: Any) -> complex:
    re, im = obj
    return complex(re, im)


def encode_complex_array(arr: np.ndarray) -> list:
    arr = np.asarray(arr, dtype=complex)
    stacked = np.stack([arr.real, arr.imag], axis=-1)
    return stacked.tolist()


def decode_complex_array(obj: Any) -> np.ndarray:
    raw = np.asarray(obj, dtype=float)
    return raw[..., 0] + 1j * raw[..., 1]


def canonical_json(obj: Any) -> str:
    """Deterministic serialization: sorted keys, fixed separators, newline."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def exceptional_to_dict(es) -> dict:
    """JSON block for an exceptional-set summary (see ``spectral_sets``)."""
    return {
        "interval_lambda_sq": [float(es.interval_lambda_sq[0]), float(es.interval_lambda_sq[1])],
        "modes": [
            {
                "k": int(m.k),
                "y_index": list(m.y_index),
                "lambda_sq": encode_complex(m.lambda_sq),
            }
            for m in es.mode_points
        ],
        "user_excluded": [encode_complex(z) for z in es.user_excluded],
    }


def _grid_key(idx: tuple[int, ...]) -> str:
    return ",".join(str(i) for i in idx)


def _parse_grid_key(key: str) -> tuple[int, ...]:
    return tuple(int(p) for p in key.split(","))


def _cov_key(key: tuple[int, ...]) -> str:
    return "+".join(str(i) for i in key)


def _parse_cov_key(key: str) -> tuple[int, ...]:
    return tuple(int(p) for p in key.split("+"))


@dataclass(frozen=True)
class SymbolDataset:
    """Symbol samples over a boundary grid, with optional extras.

    ``symbols[e][idx][cov]`` holds the pair ``(S(xi), S(t xi))`` for energy
    index ``e``, grid index ``idx`` and covector ``cov``; ``singularity``
    (if present) holds per-point angular samples of the first-order
    singularity coefficient, and ``t_pair`` the two model-integral factors
    needed to invert them.
    """

    n: int
    grid_shape: tuple[int, ...]
    scale_t: float
    energies: tuple[complex, ...]
    symbols: tuple[Mapping[tuple[int, ...], Mapping[tuple[int, ...], tuple[complex, complex]]], ...]
    singularity: Mapping[tuple[int, ...], tuple[SingularitySample, ...]] | None = None
    t_pair: tuple[complex, complex] | None = None
    exceptional: dict | None = None

    def symbol_pairs(
        self, idx: tuple[int, ...], lam: complex
    ) -> Mapping[tuple[int, ...], tuple[complex, complex]]:
        for e, known in enumerate(self.energies):
            if known == lam:
                return self.symbols[e][tuple(idx)]
        raise KeyError(f"energy {lam} not in dataset")

    def singularity_samples(self, idx: tuple[int, ...]) -> tuple[SingularitySample, ...]:
        if not self.singularity:
            return ()
        return self.singularity[tuple(idx)]

    def exceptional_set(self):
        if self.exceptional is None:
            return None
        from .spectral_sets import ExceptionalSet, ModePoint

        block = self.exceptional
        modes = tuple(
            ModePoint(
                k=int(m["k"]),
                y_index=tuple(m["y_index"]),
                lambda_sq=decode_complex(m["lambda_sq"]),
            )
            for m in block.get("modes", [])
        )
        return ExceptionalSet(
            interval_lambda_sq=tuple(block["interval_lambda_sq"]),
            mode_points=modes,
            user_excluded=tuple(decode_complex(z) for z in block.get("user_excluded", [])),
        )

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        sym_block: dict[str, dict] = {}
        for e in range(len(self.energies)):
            grid_block: dict[str, dict] = {}
            for idx, pairs in self.symbols[e].items():
                grid_block[_grid_key(idx)] = {
                    _cov_key(cov): [encode_complex(v), encode_complex(vt)]
                    for cov, (v, vt) in pairs.items()
                }
            sym_block[str(e)] = grid_block
        out: dict[str, Any] = {
            "schema": SCHEMA,
            "n": self.n,
            "grid_shape": list(self.grid_shape),
            "scale_t": float(self.scale_t),
            "energies": [encode_complex(lam) for lam in self.energies],
            "symbols": sym_block,
        }
        if self.singularity is not None:
            out["singularity"] = {
                _grid_key(idx): [
                    {"omega": [float(w) for w in s.omega], "value": encode_complex(s.value)}
                    for s in samples
                ]
                for idx, samples in self.singularity.items()
            }
        if self.t_pair is not None:
            out["t_pair"] = [encode_complex(self.t_pair[0]), encode_complex(self.t_pair[1])]
        if self.exceptional is not None:
            out["exceptional"] = self.exceptional
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SymbolDataset":
        if data.get("schema") != SCHEMA:
            raise IoError(f"unrecognized dataset schema {data.get('schema')!r}")
        energies = tuple(decode_complex(z) for z in data["energies"])
        symbols = []
        for e in range(len(energies)):
            grid_block = data["symbols"][str(e)]
            per_idx = {}
            for key, pairs in grid_block.items():
                per_idx[_parse_grid_key(key)] = {
                    _parse_cov_key(ck): (decode_complex(pv[0]), decode_complex(pv[1]))
                    for ck, pv in pairs.items()
                }
            symbols.append(per_idx)
        singularity = None
        if "singularity" in data:
            singularity = {
                _parse_grid_key(key): tuple(
                    SingularitySample(
                        omega=np.asarray(s["omega"], dtype=float),
                        value=decode_complex(s["value"]),
                    )
                    for s in samples
                )
                for key, samples in data["singularity"].items()
            }
        t_pair = None
        if "t_pair" in data:
            t_pair = (decode_complex(data["t_pair"][0]), decode_complex(data["t_pair"][1]))
        return cls(
            n=int(data["n"]),
            grid_shape=tuple(data["grid_shape"]),
            scale_t=float(data["scale_t"]),
            energies=energies,
            symbols=tuple(symbols),
            singularity=singularity,
            t_pair=t_pair,
            exceptional=data.get("exceptional"),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(canonical_json(self.to_dict()))

    @classmethod
    def load(cls, path: str | Path) -> "SymbolDataset":
        p = Path(path)
        if not p.exists():
            raise IoError(f"dataset file not found: {p}")
        try:
            data = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise IoError(f"dataset file {p} is not valid JSON: {exc}") from None
        return cls.from_dict(data)
