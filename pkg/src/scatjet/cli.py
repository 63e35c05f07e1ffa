"""Command-line front end.

Subcommands::

    forward    patch JSON (+ optional second patch) -> symbol dataset JSON
    invert     symbol dataset JSON -> recovery report JSON (+ optional CSV)
    sets       patch JSON -> exceptional-set summary, admissibility checks
    integrals  evaluate T_l / J_l / I_l / the Green-kernel scalar
    verify     built-in identity checks; `verify green` runs the residual study alone
    roundtrip  seeded synthetic pair -> forward -> invert -> error summary

Exit codes: 0 success, 1 numeric-stage failure, 2 configuration/IO problems.
All structured output is canonical JSON (sorted keys, complex as [re, im]),
so identical inputs and seeds produce byte-identical files.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .boundary_jets import BoundaryPatch, ComplexEnergy, indicial_identity_residual, indicial_root
from .dataset import (
    SymbolDataset,
    canonical_json,
    encode_complex,
    encode_complex_array,
    exceptional_to_dict,
)
from .errors import ConfigError, IoError, ScatjetError
from .forward_scattering import ProbeSet, principal_symbol
from .hyperbolic_model import green_residual_convergence
from .inversion import InversionConfig, layer_strip_driver
from .model_quadrature import (
    QuadratureSpec,
    green_kernel,
    i_full_integral,
    j_integral,
    t_limit_integral,
)
from .spectral_sets import exceptional_set, is_admissible, zero_scan
from .synthetic import constant_patch, forward_dataset, make_synthetic_pair, random_spd

log = logging.getLogger("scatjet.cli")


def parse_complex(text: str) -> complex:
    """Parse ``a+bi`` (or ``a+bj``) the way the docs write it."""
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ConfigError(f"cannot parse complex number from {text!r}") from None


def _load_json(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"input file does not exist: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise IoError(f"{p} is not valid JSON: {exc}") from None


def _write_out(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _z_vector(raw: str, n: int) -> np.ndarray:
    parts = [float(p) for p in raw.split(",")]
    if len(parts) == 1:
        parts = parts + [0.0] * (n - 1)
    if len(parts) != n:
        raise ConfigError(f"--z needs 1 or n={n} comma-separated components, got {len(parts)}")
    return np.asarray(parts)


# -- subcommands -------------------------------------------------------------


def cmd_forward(args) -> int:
    patch = BoundaryPatch.from_dict(_load_json(args.patch))
    patch2 = BoundaryPatch.from_dict(_load_json(args.patch2)) if args.patch2 else None
    if not args.lam:
        raise ConfigError("forward requires at least one --lam")
    energies = tuple(ComplexEnergy(parse_complex(s)) for s in args.lam)
    t_pair = None
    if args.t1 is not None or args.t2 is not None:
        if args.t1 is None or args.t2 is None:
            raise ConfigError("--t1 and --t2 must be given together")
        t_pair = (parse_complex(args.t1), parse_complex(args.t2))
    probes = None
    if args.probes:
        vecs = _load_json(args.probes)
        probes = ProbeSet(vectors=tuple(tuple(float(c) for c in v) for v in vecs))
    log.info(
        "forward: S(xi) = 2^(n-2s) Gamma(n/2-s)/Gamma(s-n/2) |xi|_h0^(2s-n), "
        "s = n/2 + sqrt((n/2)^2 - (V0 - lam^2 - n^2/4)/alpha^2)"
    )
    ds = forward_dataset(
        patch,
        energies,
        patch2=patch2,
        scale_t=args.scale_t,
        probes=probes,
        t_pair=t_pair,
    )
    payload = ds.to_dict()
    # Derived convenience block (ignored on load): indicial roots per energy.
    payload["sigma_field"] = [
        encode_complex_array(indicial_root(patch, en).sigma) for en in energies
    ]
    _write_out(canonical_json(payload), args.out)
    return 0


def _scaled_dataset(ds: SymbolDataset, c: complex) -> SymbolDataset:
    symbols = tuple(
        {
            idx: {cov: (c * v, c * vt) for cov, (v, vt) in pairs.items()}
            for idx, pairs in per_idx.items()
        }
        for per_idx in ds.symbols
    )
    return SymbolDataset(
        n=ds.n,
        grid_shape=ds.grid_shape,
        scale_t=ds.scale_t,
        energies=ds.energies,
        symbols=symbols,
        singularity=ds.singularity,
        t_pair=ds.t_pair,
        exceptional=ds.exceptional,
    )


def _field_csv(report) -> str:
    lines = ["index,alpha_sq,v0,sigma1_re,sigma1_im"]
    for idx in np.ndindex(*report.grid_shape):
        key = "-".join(str(i) for i in idx)
        a = float(report.alpha_sq[idx]) if report.alpha_sq is not None else float("nan")
        v = float(report.v0[idx]) if report.v0 is not None else float("nan")
        s = complex(report.sigma1[idx])
        lines.append(f"{key},{a!r},{v!r},{s.real!r},{s.imag!r}")
    return "\n".join(lines) + "\n"


def cmd_invert(args) -> int:
    ds = SymbolDataset.load(args.data)
    if args.prefactor is not None:
        c = parse_complex(args.prefactor)
        if c == 0:
            raise ConfigError("--prefactor must be nonzero")
        log.info("applying external prefactor %s to all symbol samples", c)
        ds = _scaled_dataset(ds, c)
    t_pair = None
    if args.t1 is not None and args.t2 is not None:
        t_pair = (parse_complex(args.t1), parse_complex(args.t2))
    cfg = InversionConfig(
        margin=args.margin,
        alpha_sq_known=args.alpha_sq_known,
        t_pair=t_pair,
    )
    report = layer_strip_driver(ds, cfg)
    _write_out(canonical_json(report.to_dict()), args.out)
    if args.csv:
        Path(args.csv).write_text(_field_csv(report))
    if report.status == "refused":
        log.error("inversion refused: %s", "; ".join(report.notes))
        return 1
    return 0


def _t_zero_scan(n: int, step: float) -> dict:
    """Scan T_1, T_2 for zeros along a real window above their convergence gates.

    The window is a heuristic slice of the principal-branch region; the scan is
    grid-limited (zeros between samples can be missed) and uses a loosened
    quadrature tolerance, so treat the output as advisory.
    """
    loose = QuadratureSpec(rel_tol=1e-3, abs_tol=1e-8, max_subdivisions=2000)
    out: dict = {"step": step, "caveat": "grid-limited scan; zeros off the window or finer than the step may be missed"}
    for l in (1, 2):
        lo = max(n / 2.0, (5 - 2 * l) / 2.0) + 0.6
        hi = lo + 2.0
        zeros = zero_scan(
            lambda sig, l=l: t_limit_integral(l, sig, n, loose).value,
            (lo, hi, 0.0, 0.0),
            step,
            tol=1e-4,
        )
        out[f"T{l}"] = [encode_complex(z) for z in zeros]
        out[f"T{l}_window"] = [lo, hi]
    return out


def cmd_sets(args) -> int:
    patch = BoundaryPatch.from_dict(_load_json(args.patch))
    excluded = tuple(parse_complex(s) for s in args.exclude)
    es = exceptional_set(patch, k_max=args.k_max, user_excluded=excluded)
    log.info(
        "sets: interval [min V0 - a_max^2 n^2/4 + n^2/4, max V0 - a_min^2 n^2/4 + n^2/4] "
        "in the lam^2 plane; modes lam^2 = V0 - n^2/4 + alpha^2 (k^2 - n^2)/4"
    )
    block = exceptional_to_dict(es)
    if not args.no_zero_scan:
        log.info(
            "sets: scanning T_1, T_2 for zeros on a real window "
            "(grid-limited; completeness only up to the scan step)"
        )
        block["zeros"] = _t_zero_scan(patch.n, args.zero_step)
    if args.lam:
        checks = []
        for s in args.lam:
            lam = parse_complex(s)
            adm = is_admissible(ComplexEnergy(lam), es, args.margin)
            checks.append(
                {
                    "lam": encode_complex(lam),
                    "ok": bool(adm.ok),
                    "reason": adm.reason or "",
                    "distances": {k: float(v) for k, v in adm.distances.items()},
                }
            )
        block["admissibility"] = checks
    _write_out(canonical_json(block), args.out)
    return 0


def _integral_level(which: str, flag_l: int) -> int:
    """Level from an explicit suffix (``T2``) or the ``--l`` flag (bare ``J``/``I``)."""
    if len(which) > 1 and which[1:].isdigit():
        return int(which[1:])
    if flag_l not in (1, 2):
        raise ConfigError("--l must be 1 or 2")
    return flag_l


def cmd_integrals(args) -> int:
    which = args.which.strip().upper()
    sigma = parse_complex(args.sigma)
    n = args.n
    rel = args.tol if args.tol is not None else args.rel_tol
    qspec = QuadratureSpec(rel_tol=rel, abs_tol=args.abs_tol)
    payload: dict = {"which": which, "n": n, "sigma": encode_complex(sigma)}
    if which in ("T", "T1", "T2"):
        l = _integral_level(which, args.l)
        log.info("T_%d: two-center integral, u-exponent 2*sigma + %d - n", l, 4 - 2 * l)
        mv = t_limit_integral(l, sigma, n, qspec)
    elif which in ("J", "J1", "J2"):
        l = _integral_level(which, args.l)
        log.info(
            "J_%d: convergence-scale integral, u-exponent 2*Re(sigma) + k + %d - n", l, 3 - 2 * l
        )
        mv = j_integral(l, args.k, sigma, n, qspec)
        payload["k"] = args.k
    elif which in ("I", "I1", "I2"):
        l = _integral_level(which, args.l)
        z = _z_vector(args.z, n)
        log.info("I_%d at s=%g, |z|=%g (change of variables u = s/(|z| t))", l, args.s, np.linalg.norm(z))
        mv = i_full_integral(l, sigma, args.s, z, qspec)
        payload["s"] = args.s
        payload["z"] = [float(c) for c in z]
    elif which in ("G", "GREEN"):
        z = _z_vector(args.z, n)
        log.info("green: pi^(-n/2)/2 Gamma(s)/Gamma(s-(n-2)/2) s^sigma (1+s^2+|z|^2)^-sigma")
        val = green_kernel(args.s, z, sigma, n)
        payload.update(
            {"s": args.s, "z": [float(c) for c in z], "value": encode_complex(val)}
        )
        _write_out(canonical_json(payload), args.out)
        return 0
    else:
        raise ConfigError(f"unknown integral {args.which!r} (use T1,T2,J,I,G)")
    payload["l"] = l
    payload.update(
        {
            "value": encode_complex(mv.value),
            "err": float(mv.est_error),
            "converged": bool(mv.converged),
            "evals": int(mv.n_evals),
        }
    )
    _write_out(canonical_json(payload), args.out)
    return 0


def cmd_verify(args) -> int:
    if args.what == "green":
        sigma = parse_complex(args.sigma)
        log.info("verify green: (D0 - s(n-s)) on the annihilated kernel, two-grid refinement")
        rc, rf, ratio = green_residual_convergence(sigma, args.n, base_points=args.grid_size)
        ok = 3.5 <= ratio <= 4.5
        _write_out(
            canonical_json(
                {
                    "sigma": encode_complex(sigma),
                    "n": args.n,
                    "grid_size": args.grid_size,
                    "coarse": {"max_residual": rc.max_residual, "spacing": rc.spacing},
                    "fine": {"max_residual": rf.max_residual, "spacing": rf.spacing},
                    "ratio": float(ratio),
                    "second_order": bool(ok),
                }
            ),
            args.out,
        )
        return 0 if ok else 1

    rng = np.random.default_rng(args.seed)
    checks = []

    log.info("verify: identity alpha^2 s (n-s) = V0 - lam^2 - n^2/4 on random configurations")
    worst = 0.0
    branch_ok = True
    for _ in range(100):
        n = int(rng.integers(1, 4))
        alpha = float(rng.uniform(0.5, 2.0))
        v0 = float(rng.uniform(-1.0, 1.0))
        if rng.uniform() < 0.5:
            lam = complex(rng.uniform(2.0, 6.0))
        else:
            lam = complex(rng.uniform(-3.0, 3.0), rng.uniform(0.5, 3.0))
        en = ComplexEnergy(lam)
        patch = constant_patch(n, alpha, v0, np.eye(n))
        fld = indicial_root(patch, en)
        res = indicial_identity_residual(patch.alpha, patch.v_jet[0], en, fld.sigma, n)
        scale = max(1.0, abs(v0 - lam * lam - n * n / 4.0))
        worst = max(worst, float(np.max(res)) / scale)
        branch_ok = branch_ok and bool(np.all(fld.sigma.real >= n / 2.0 - 1e-12))
    checks.append(
        {
            "name": "indicial-identity",
            "metric": worst,
            "pass": bool(worst <= 1e-12 and branch_ok),
        }
    )

    log.info("verify: homogeneity S(t xi) = t^(2s-n) S(xi)")
    worst_h = 0.0
    for _ in range(20):
        n = int(rng.integers(1, 4))
        patch = constant_patch(
            n, float(rng.uniform(0.5, 2.0)), float(rng.uniform(-1.0, 1.0)), random_spd(rng, n)
        )
        en = ComplexEnergy(complex(rng.uniform(3.0, 6.0)))
        xi = rng.normal(size=n)
        idx = (0,) * n
        base = principal_symbol(patch, idx, xi, en)
        sig = indicial_root(patch, en).sigma[idx]
        for t in (2.0, 4.0, 8.0):
            scaled = principal_symbol(patch, idx, t * xi, en)
            expected = base.value * t ** (2 * sig - n)
            worst_h = max(worst_h, abs(scaled.value - expected) / max(1.0, abs(expected)))
    checks.append({"name": "symbol-homogeneity", "metric": worst_h, "pass": bool(worst_h <= 1e-10)})

    log.info("verify: (D0 - s(n-s)) G residual, second-order grid convergence")
    _, _, ratio = green_residual_convergence(1.5, 1)
    checks.append(
        {"name": "green-residual-ratio", "metric": float(ratio), "pass": bool(3.5 <= ratio <= 4.5)}
    )

    ok = all(c["pass"] for c in checks)
    _write_out(canonical_json({"checks": checks, "ok": ok, "seed": args.seed}), args.out)
    return 0 if ok else 1


def cmd_roundtrip(args) -> int:
    out_dir = Path(args.out_dir)
    if not out_dir.exists():
        raise ConfigError(f"output directory does not exist: {out_dir}")
    log.info("roundtrip: synthetic truth (seed %d, n=%d) -> forward -> invert", args.seed, args.n)
    truth, ds = make_synthetic_pair(args.seed, args.n)
    (out_dir / "dataset.json").write_text(canonical_json(ds.to_dict()))
    report = layer_strip_driver(ds, InversionConfig())
    (out_dir / "report.json").write_text(canonical_json(report.to_dict()))

    errors = {
        "alpha_sq": float(np.max(np.abs(report.alpha_sq - truth.alpha_sq))),
        "v0": float(np.max(np.abs(report.v0 - truth.v0))),
        "h0": float(np.max(np.abs(report.h0 - truth.h0))),
    }
    if report.H is not None:
        errors["H"] = float(np.max(np.abs(report.H - truth.H)))
        errors["W1"] = float(np.max(np.abs(report.W1 - truth.W1)))
    ok = all(v <= args.tol for v in errors.values())
    summary = {
        "seed": args.seed,
        "n": args.n,
        "tol": args.tol,
        "max_errors": errors,
        "status": report.status,
        "ok": ok,
    }
    text = canonical_json(summary)
    (out_dir / "roundtrip.json").write_text(text)
    sys.stdout.write(text)
    return 0 if ok else 1


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="scatjet",
        description="Forward and inverse scattering data on asymptotically hyperbolic boundaries.",
    )
    ap.add_argument("--verbose", action="store_true", help="debug-level logging")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("forward", help="generate a symbol dataset from boundary patches")
    p.add_argument("--patch", required=True, help="boundary patch JSON")
    p.add_argument("--patch2", help="second patch (enables first-order samples)")
    p.add_argument("--lam", action="append", default=[], help="energy, e.g. 3.5 or 2+1i (repeatable)")
    p.add_argument("--scale-t", type=float, default=2.0, help="homogeneity probe scale (default 2)")
    p.add_argument("--t1", help="model-integral factor t1 (complex)")
    p.add_argument("--t2", help="model-integral factor t2 (complex)")
    p.add_argument("--probes", help="JSON file with probe vectors (overrides default set)")
    p.add_argument("--out", default="-", help="output path or - for stdout")
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("invert", help="recover boundary data from a symbol dataset")
    p.add_argument("--data", required=True, help="symbol dataset JSON")
    p.add_argument("--alpha-sq-known", type=float, help="use a known alpha^2 (single-energy mode)")
    p.add_argument("--t1", help="override model-integral factor t1")
    p.add_argument("--t2", help="override model-integral factor t2")
    p.add_argument("--margin", type=float, default=1e-6, help="admissibility margin")
    p.add_argument("--prefactor", help="multiply all symbol samples by this complex constant")
    p.add_argument("--csv", help="also write zeroth-order fields as CSV")
    p.add_argument("--out", default="-", help="output path or - for stdout")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("sets", help="exceptional sets and admissibility checks")
    p.add_argument("--patch", required=True, help="boundary patch JSON")
    p.add_argument("--k-max", type=int, default=2, help="largest mode order to enumerate")
    p.add_argument("--exclude", action="append", default=[], help="user-excluded energy (repeatable)")
    p.add_argument("--lam", action="append", default=[], help="energy to test for admissibility")
    p.add_argument("--margin", type=float, default=1e-6, help="admissibility margin")
    p.add_argument("--zero-step", type=float, default=0.25, help="scan step for the T_l zero search")
    p.add_argument("--no-zero-scan", action="store_true", help="skip the (quadrature-heavy) T_l zero scan")
    p.add_argument("--out", default="-", help="output path or - for stdout")
    p.set_defaults(func=cmd_sets)

    p = sub.add_parser("integrals", help="evaluate model integrals")
    p.add_argument("--which", required=True, help="one of T1, T2, J, I, G (bare J/I take --l)")
    p.add_argument("--sigma", required=True, help="indicial root, e.g. 2+0i")
    p.add_argument("--n", type=int, required=True, help="boundary dimension")
    p.add_argument("--l", type=int, default=1, help="integral level for bare J/I (1 or 2)")
    p.add_argument("--k", type=int, default=1, help="jet order for J integrals")
    p.add_argument("--s", type=float, default=1.0, help="boundary-defining ratio for I/green")
    p.add_argument("--z", default="1.0", help="boundary offset (scalar or comma-separated vector)")
    p.add_argument("--tol", type=float, help="relative tolerance (shorthand for --rel-tol)")
    p.add_argument("--rel-tol", type=float, default=1e-7)
    p.add_argument("--abs-tol", type=float, default=1e-10)
    p.add_argument("--out", default="-", help="output path or - for stdout")
    p.set_defaults(func=cmd_integrals)

    p = sub.add_parser("verify", help="run built-in identity checks")
    p.add_argument(
        "what",
        nargs="?",
        default="all",
        choices=("all", "green"),
        help="'green' runs only the Green-kernel residual study",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", default="1.5", help="indicial root for 'verify green'")
    p.add_argument("--n", type=int, default=1, help="boundary dimension for 'verify green'")
    p.add_argument("--grid-size", type=int, default=33, help="coarse grid points for 'verify green'")
    p.add_argument("--out", default="-", help="output path or - for stdout")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("roundtrip", help="synthetic forward + inverse round trip")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, default=2, choices=(1, 2, 3))
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out-dir", default=".", help="directory for dataset/report/summary JSON")
    p.set_defaults(func=cmd_roundtrip)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (ConfigError, IoError) as exc:
        log.error("%s", exc)
        return 2
    except ScatjetError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
