"""Command-line front end.

Every subcommand prints (or writes with ``--out``) one JSON document tagged
``"schema": "bosefield/1"``; ``--format csv`` emits only its main table.

Exit status: 0 success, 2 invalid input, 3 numerical warning escalated
(zero mode; truncation or search-budget warnings under ``--strict``),
4 inconclusive infrared classification.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import warnings
from pathlib import Path

import numpy as np

from . import config
from .classical import PhaseVector, flow, hamiltonian, symplectic_form
from .errors import BosefieldError, NotPositiveDefinite, SearchBudgetExceeded, TruncationWarning
from .fock import FockBasis, create, field_Q, vacuum, vacuum_covariance_matrix
from .infrared import classify_scale_membership, delta_qhat, qhat_from_sites
from .locality import (
    Region,
    WeylSample,
    knight_search,
    newton_wigner_demo,
    one_quantum_deviation_minimum,
    polynomial_degree_probe,
    strongly_nonlocal,
)
from .models import ModelSpec, build_omega_squared, dispersion, reciprocal_grid
from .spectral import decompose

SCHEMA = "bosefield/1"

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_INCONCLUSIVE = 4


class CliError(Exception):
    def __init__(self, message, code=EXIT_VALIDATION):
        super().__init__(message)
        self.code = code


def _load_json_arg(text: str):
    """Inline JSON, or the path of a file holding it."""
    text = text.strip()
    if text.startswith(("{", "[")):
        return json.loads(text)
    return json.loads(Path(text).read_text())


def _clean(obj):
    """Make a result JSON-safe: numpy scalars to floats, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def _write(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        flat = [{k: (json.dumps(v) if isinstance(v, (list, dict)) else v) for k, v in r.items()} for r in rows]
        writer = csv.DictWriter(buf, fieldnames=list(flat[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(flat)
    return buf.getvalue()


# -- subcommands ------------------------------------------------------------------
# each returns (result dict, table rows, exit code)


def cmd_dispersion(model: ModelSpec, args):
    if not model.translation_invariant:
        raise CliError("dispersion needs a ring or a periodic lattice")
    if args.points:
        axes = [np.arange(args.points) / args.points] * model.d
        mesh = np.meshgrid(*axes, indexing="ij")
        ks = np.stack([g.ravel() for g in mesh], axis=-1)
    else:
        ks = reciprocal_grid(model)
    w2 = dispersion(model, ks)
    rows = [{"k": [float(x) for x in k], "omega_sq": float(v)} for k, v in zip(ks, w2)]

    grid_w2 = np.sort(dispersion(model, reciprocal_grid(model)))
    check = {"zero_mode": model.critical}
    try:
        s = decompose(build_omega_squared(model))
        eig = np.sort(s.frequencies**2)
        err = float(np.max(np.abs(eig - grid_w2)))
        check.update(eigenvalue_match=err <= 1e-8 * max(1.0, model.omega0_sq), max_abs_error=err)
    except NotPositiveDefinite as exc:
        check.update(eigenvalue_match=None, decomposition_error=str(exc))
    result = {"nu": model.nu, "omega0_sq": model.omega0_sq, "rows": rows, "cross_check": check}
    return result, rows, EXIT_NUMERICAL if (model.critical and args.strict) else EXIT_OK


def _initial_state(args, n: int) -> PhaseVector:
    if args.x0 is None:
        q = np.zeros(n)
        q[0] = 1.0
        return PhaseVector(q, np.zeros(n))
    doc = _load_json_arg(args.x0)
    x = PhaseVector(doc["q"], doc["p"])
    if x.n != n:
        raise CliError(f"initial state has {x.n} modes, model has {n}")
    return x


def cmd_evolve(model: ModelSpec, args):
    s = decompose(build_omega_squared(model))
    x0 = _initial_state(args, s.n)
    if args.steps < 1:
        raise CliError("--steps must be positive")
    rng = np.random.default_rng(args.seed)
    ref = PhaseVector(rng.standard_normal(s.n), rng.standard_normal(s.n))
    s0 = symplectic_form(x0, ref)
    rows = []
    for t in np.linspace(0.0, args.t_max, args.steps + 1):
        xt = flow(s, x0, float(t))
        rt = flow(s, ref, float(t))
        rows.append({
            "t": float(t),
            "q": [float(v) for v in xt.q],
            "p": [float(v) for v in xt.p],
            "energy": hamiltonian(s, xt),
            "symplectic_residual": abs(symplectic_form(xt, rt) - s0),
        })
    energies = np.array([r["energy"] for r in rows])
    e0 = energies[0]
    drift = float(np.max(np.abs(energies - e0)) / e0) if e0 > 0 else float(np.max(np.abs(energies)))
    result = {"rows": rows, "reference_seed": args.seed, "relative_energy_drift": drift,
              "x0": {"q": x0.q.tolist(), "p": x0.p.tolist()}}
    return result, rows, EXIT_OK


def cmd_locality(model: ModelSpec, args):
    s = decompose(build_omega_squared(model))
    region = Region.parse(args.region or "", s.n)
    verdict = strongly_nonlocal(s, region)
    sample = WeylSample(seed=args.seed)
    result = {"verdict": verdict.to_dict(), "cutoff": args.cutoff, "quanta": args.quanta}
    warned = False
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        basis = FockBasis(s.n, args.cutoff)
        search = knight_search(s, region, basis, args.quanta, sample=sample, seed=args.seed)
        result["search"] = search.to_dict()
        if args.quanta == 1:
            value, _ = one_quantum_deviation_minimum(s, region, sample, seed=args.seed)
            result["one_quantum_minimum"] = value
        xis = sample.amplitudes_for(s, region)
        if search.argmin is not None and len(xis):
            probe = polynomial_degree_probe(search.argmin, xis[0], quanta=args.quanta)
            result["polynomial_probe"] = {k: v for k, v in probe.to_dict().items() if k != "coefficients"}
    messages = sorted({str(w.message) for w in caught
                       if issubclass(w.category, (TruncationWarning, SearchBudgetExceeded))})
    warned = bool(messages)
    result["warnings"] = messages
    rows = [{"region": list(region.indices), "strongly_nonlocal": verdict.strongly_nonlocal,
             "span_rank": verdict.span_rank, "equivalence_consistent": verdict.equivalence_consistent,
             "min_residual": search.min_residual if search.status != "not_applicable" else None,
             "status": search.status}]
    return result, rows, EXIT_NUMERICAL if (warned and args.strict) else EXIT_OK


def cmd_infrared(model: ModelSpec, args):
    if not model.translation_invariant:
        raise CliError("infrared classification needs a ring or a periodic lattice")
    if args.q is None:
        qhat, qdesc = delta_qhat, "delta_0"
    else:
        sites = _load_json_arg(args.q)
        qhat = qhat_from_sites((item["site"], item["value"]) for item in sites)
        qdesc = sites
    c = classify_scale_membership(model, args.lam, qhat)
    result = {"lambda": args.lam, "d": model.d, "nu": model.nu, "q": qdesc, **c.to_dict()}
    code = EXIT_INCONCLUSIVE if c.verdict == "inconclusive" else EXIT_OK
    return result, result["table"], code


def cmd_vacuum(model: ModelSpec, args):
    s = decompose(build_omega_squared(model))
    cov = vacuum_covariance_matrix(s)
    basis = FockBasis(s.n, args.cutoff)
    vac = vacuum(basis)
    fock_sites = []
    for j in range(s.n):
        e = np.zeros(s.n)
        e[j] = 1.0
        qv = field_Q(basis, s, e) @ vac
        fock_sites.append(float(np.vdot(qv.coeffs, qv.coeffs).real))
    fock_agrees = bool(np.max(np.abs(np.array(fock_sites) - np.diag(cov))) <= 1e-9)
    rows = []
    for i in range(s.n):
        for j in range(s.n):
            if i != j:
                rows.append(newton_wigner_demo(s, i, j, basis).to_dict())
    result = {
        "covariance": cov.tolist(),
        "site_variance": np.diag(cov).tolist(),
        "site_variance_fock": fock_sites,
        "fock_agrees": fock_agrees,
        "newton_wigner": rows,
        "cutoff": args.cutoff,
    }
    return result, rows, EXIT_OK


COMMANDS = {
    "dispersion": cmd_dispersion,
    "evolve": cmd_evolve,
    "locality": cmd_locality,
    "infrared": cmd_infrared,
    "vacuum": cmd_vacuum,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, help="model JSON, inline or a file path")
    common.add_argument("--out", help="write output here (atomically) instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    common.add_argument("--strict", action="store_true",
                        help="exit with status 3 on zero-mode or truncation warnings")

    p = argparse.ArgumentParser(prog="bosefield", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dispersion", parents=[common], help="omega(k)^2 table with eigenvalue cross-check")
    d.add_argument("--points", type=int, default=0, help="k points per axis (default: the model's own grid)")

    e = sub.add_parser("evolve", parents=[common], help="classical trajectory from X0")
    e.add_argument("--x0", help='initial state {"q": [...], "p": [...]}, default q = delta_0')
    e.add_argument("--t-max", type=float, default=1.0)
    e.add_argument("--steps", type=int, default=10)

    loc = sub.add_parser("locality", parents=[common], help="strong non-locality and localization search")
    loc.add_argument("--region", default="0", help="comma-separated site indices")
    loc.add_argument("--quanta", type=int, default=1)
    loc.add_argument("--cutoff", type=int, default=20)

    ir = sub.add_parser("infrared", parents=[common], help="scale-space membership of a local displacement")
    ir.add_argument("--lambda", dest="lam", type=float, required=True)
    ir.add_argument("--q", help='displacement as [{"site": [...], "value": x}, ...], default delta_0')

    v = sub.add_parser("vacuum", parents=[common], help="ground-state covariance and Newton-Wigner table")
    v.add_argument("--cutoff", type=int, default=3)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        model_doc = _load_json_arg(args.model)
        model = ModelSpec.from_dict(model_doc)
        result, rows, code = COMMANDS[args.command](model, args)
    except NotPositiveDefinite as exc:
        sys.stderr.write(f"bosefield: zero mode: {exc}\n")
        return EXIT_NUMERICAL
    except CliError as exc:
        sys.stderr.write(f"bosefield: {exc}\n")
        return exc.code
    except (BosefieldError, ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"bosefield: invalid input: {exc}\n")
        return EXIT_VALIDATION

    if args.format == "csv":
        text = _csv(_clean(rows))
    else:
        doc = {
            "schema": SCHEMA,
            "command": args.command,
            "model": model.to_dict(),
            "config": {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "model", "out")},
            "result": result,
        }
        text = json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n"
    _write(text, args.out)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
