"""Command line front end.

Subcommands::

    gen        write a generated mesh as JSON
    decompose  HMF split of a cochain and the harmonic dimensions
    dn         DN matrices (raw and reduced) and the reduced spectrum
    reduce     reduced boundary spaces, J certificate, Lagrangian flags
    glue       glue two boundary components and compare codimensions
    verify     run every check on one mesh or on a built-in suite

Exit status is 0 on success, 1 when a verification check fails and 2 for
invalid input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import mesh as meshmod
from .dec import build_operators
from .dn import assemble_dn
from .hodge import HmfSpaces, coclosed_basis, harmonic_dirichlet, harmonic_fields, harmonic_neumann
from .mesh import GluingMap, MeshError, dump_mesh, load_mesh
from .reduction import (
    admissible_space,
    codimension,
    complex_structure,
    dynamics_space,
    lagrangian_check,
    reduce_hypersurface,
)
from .verify import Tolerances, hypersurface_checks, region_checks, run_suite


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    mesh_path: str | None
    gen_spec: str | None
    tol: Tolerances
    out: Path | None
    as_json: bool
    as_csv: bool


def parse_gen_spec(spec: str):
    """Build a mesh from ``kind:args``.

    ``disk:M``, ``annulus:M[:R_IN:R_OUT]``, ``circle:M``, ``cube:K``,
    ``torus:M`` (glued annulus) and ``collar:circle:M:LAYERS:EPS``.
    """
    parts = spec.split(":")
    kind, args = parts[0], parts[1:]
    try:
        if kind == "disk" and len(args) == 1:
            return meshmod.gen_disk(int(args[0]))
        if kind == "annulus" and len(args) in (1, 3):
            extra = [float(a) for a in args[1:]]
            return meshmod.gen_annulus(int(args[0]), *extra)
        if kind == "circle" and len(args) == 1:
            return meshmod.gen_circle(int(args[0]))
        if kind == "cube" and len(args) == 1:
            return meshmod.gen_cube(int(args[0]))
        if kind == "torus" and len(args) == 1:
            a = meshmod.gen_annulus(int(args[0]))
            return meshmod.glue(a, meshmod.annulus_gluing_map(a), name=f"torus{args[0]}")
        if kind == "collar" and len(args) >= 3:
            base = parse_gen_spec(":".join(args[:-2]))
            return meshmod.collar(base, int(args[-2]), float(args[-1]))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, MeshError):
            raise
        raise UsageError(f"bad generator spec {spec!r}: {exc}") from exc
    raise UsageError(f"unknown generator spec {spec!r}")


def _mesh_from(cfg: RunConfig):
    if cfg.mesh_path:
        try:
            data = Path(cfg.mesh_path).read_bytes()
        except OSError as exc:
            raise UsageError(f"cannot read mesh file: {exc}") from exc
        return load_mesh(data, name=Path(cfg.mesh_path).stem)
    if cfg.gen_spec:
        return parse_gen_spec(cfg.gen_spec)
    raise UsageError("a mesh source is required (--mesh PATH or --gen SPEC)")


def _dumps(obj):
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _csv_matrix(A):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in np.atleast_2d(A):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def _csv_spectrum(ev):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "eigenvalue"])
    for i, v in enumerate(ev):
        w.writerow([i, repr(float(v))])
    return buf.getvalue()


def _emit(cfg: RunConfig, files: dict, stdout_key: str):
    """Write ``files`` into the output directory, or print one of them."""
    if cfg.out is None:
        sys.stdout.write(files[stdout_key])
        return
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (cfg.out / name).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write output: {exc}") from exc


# ----------------------------------------------------------------------
def cmd_gen(cfg: RunConfig, args):
    chosen = [(k, v) for k, v in (("disk", args.disk), ("annulus", args.annulus),
                                  ("circle", args.circle), ("cube", args.cube)) if v is not None]
    if cfg.gen_spec and chosen or len(chosen) > 1:
        raise UsageError("choose exactly one generator")
    if chosen:
        kind, m = chosen[0]
        spec = f"{kind}:{m}"
        if kind == "annulus":
            spec += f":{args.r_in}:{args.r_out}"
        mesh = parse_gen_spec(spec)
        fname = f"{kind}{m}.json"
    else:
        mesh = _mesh_from(cfg)
        fname = f"{mesh.name}.json".replace("(", "_").replace(")", "")
    text = dump_mesh(mesh).decode()
    if cfg.out is not None and cfg.out.suffix == ".json":
        cfg.out.parent.mkdir(parents=True, exist_ok=True)
        cfg.out.write_text(text)
        return 0
    _emit(cfg, {fname: text}, fname)
    return 0


def cmd_decompose(cfg: RunConfig, args):
    mesh = _mesh_from(cfg)
    ops = build_operators(mesh)
    k = args.degree
    if not 0 <= k <= mesh.dim:
        raise UsageError(f"degree must lie in 0..{mesh.dim}")
    if args.cochain:
        values = np.asarray(json.loads(Path(args.cochain).read_text())["values"], dtype=float)
    else:
        values = np.random.default_rng(args.seed).standard_normal(ops.n(k))
    w = ops.cochain(k, values).values
    spaces = HmfSpaces(ops, k, cfg.tol.rank)
    split = spaces.split(w)
    metric = ops.mass(k)
    nw = metric.norm(w)
    comps = split.components()
    orth = max((abs(metric.inner(a, b)) for i, a in enumerate(comps) for b in comps[i + 1:]), default=0.0)
    report = {
        "mesh": mesh.name,
        "degree": k,
        "dims": {
            "H": harmonic_fields(ops, k, cfg.tol.rank).dim,
            "H_N": harmonic_neumann(ops, k, cfg.tol.rank).dim,
            "H_D": harmonic_dirichlet(ops, k, cfg.tol.rank).dim,
            "EXACT_D": spaces.e_D.dim,
            "HARMONIC_EXACT": spaces.h_E.dim,
            "n_simplices": ops.n(k),
        },
        "split": split.to_json(mesh.name, k),
        "reconstruction_residual": metric.norm(split.total() - w) / nw if nw else 0.0,
        "orthogonality_residual": orth / nw**2 if nw else 0.0,
    }
    _emit(cfg, {"decompose.json": _dumps(report)}, "decompose.json")
    return 0


def cmd_dn(cfg: RunConfig, args):
    mesh = _mesh_from(cfg)
    ops = build_operators(mesh)
    dn = assemble_dn(ops, args.weight, cfg.tol.rank)
    ker, ran = dn.kernel_range(cfg.tol.rank)
    spectrum = dn.spectrum()
    report = {
        "mesh": mesh.name,
        "boundary_edges": int(dn.S.shape[0]),
        "coclosed_dim": int(dn.Q.shape[1]),
        "weight": dn.weight,
        "Lambda": dn.Lambda.tolist(),
        "Lambda_red": dn.Lambda_red.tolist(),
        "reduced_basis": coclosed_basis(ops.boundary, 1, cfg.tol.rank).to_json(),
        "kernel": ker.to_json(),
        "range": ran.to_json(),
        "spectrum": [float(v) for v in spectrum],
    }
    files = {
        "lambda_raw.csv": _csv_matrix(dn.Lambda),
        "lambda_reduced.csv": _csv_matrix(dn.Lambda_red),
        "spectrum.csv": _csv_spectrum(spectrum),
        "dn.json": _dumps(report),
    }
    if cfg.out is not None:
        if not cfg.as_json:
            files.pop("dn.json")
        if not cfg.as_csv and cfg.as_json:
            for name in ("lambda_raw.csv", "lambda_reduced.csv", "spectrum.csv"):
                files.pop(name)
    _emit(cfg, files, "lambda_reduced.csv" if cfg.as_csv and not cfg.as_json else "dn.json")
    return 0


def cmd_reduce(cfg: RunConfig, args):
    mesh = _mesh_from(cfg)
    ops = build_operators(mesh)
    report = {"mesh": mesh.name}
    if mesh.is_closed and mesh.dim == 1:
        red = reduce_hypersurface(ops, cfg.tol.rank)
        cert = complex_structure(red)
        report.update({"L_Sigma": red.to_json(), "J_certificate": cert.__dict__})
    else:
        adm = admissible_space(ops, tol=cfg.tol.rank)
        report["codimension"] = codimension(ops, cfg.tol.rank, adm)
        report["boundary_space_dim"] = 2 * adm.model.Q.shape[1]
        report["L_M_boundary"] = adm.reduced.to_json()
        if adm.dim:
            report["J_certificate"] = complex_structure(adm.reduced).__dict__
            rep = lagrangian_check(dynamics_space(adm, cfg.tol.rank), adm.reduced,
                                   adm.dn.reduced_full, cfg.tol.rank)
            report["dynamics"] = rep.to_json()
    _emit(cfg, {"reduce.json": _dumps(report)}, "reduce.json")
    return 0


def cmd_glue(cfg: RunConfig, args):
    mesh = _mesh_from(cfg)
    if args.map:
        gmap = GluingMap.from_dict(json.loads(Path(args.map).read_text()))
    elif mesh.gluing_maps:
        gmap = mesh.gluing_maps[0]
    elif {"Sigma_inner", "Sigma_outer"} <= set(mesh.boundary_labels):
        gmap = meshmod.annulus_gluing_map(mesh)
    else:
        raise UsageError("no gluing map given and none recorded on the mesh")
    glued = meshmod.glue(mesh, gmap)
    c0 = codimension(build_operators(mesh), cfg.tol.rank)
    c1 = codimension(build_operators(glued), cfg.tol.rank)
    report = {"mesh": mesh.name, "glued": glued.name, "codim_before": c0, "codim_after": c1,
              "monotone": c1 <= c0, "gluing_map": gmap.to_dict()}
    _emit(cfg, {"glued.json": dump_mesh(glued).decode(), "glue_report.json": _dumps(report)},
          "glue_report.json")
    return 0 if c1 <= c0 else 1


def cmd_verify(cfg: RunConfig, args):
    if args.suite:
        if cfg.mesh_path or cfg.gen_spec:
            raise UsageError("--suite excludes --mesh/--gen")
        try:
            report = run_suite(args.suite, cfg.tol)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    else:
        mesh = _mesh_from(cfg)
        if mesh.is_closed and mesh.dim == 1:
            checks = hypersurface_checks(mesh, cfg.tol)
        else:
            checks = region_checks(mesh, cfg.tol)
        rep = {"mesh": mesh.name, "checks": [c.to_json() for c in checks]}
        report = {"suite": None, "pass": all(c["pass"] for c in rep["checks"]), "reports": [rep]}
    _emit(cfg, {"verify.json": _dumps(report)}, "verify.json")
    if not cfg.as_json:
        for rep in report["reports"]:
            for c in rep["checks"]:
                if not c["pass"]:
                    print(f"FAIL {rep['mesh']}: {c['name']} value={c['value']} tol={c['tolerance']}",
                          file=sys.stderr)
    return 0 if report["pass"] else 1


COMMANDS = {"gen": cmd_gen, "decompose": cmd_decompose, "dn": cmd_dn, "reduce": cmd_reduce,
            "glue": cmd_glue, "verify": cmd_verify}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--mesh", metavar="PATH", help="mesh JSON file")
    src.add_argument("--gen", metavar="SPEC", help="generator spec, e.g. disk:16 or collar:circle:16:4:0.5")
    common.add_argument("--tol-rank", type=float, default=1e-10)
    common.add_argument("--tol-res", type=float, default=1e-8)
    common.add_argument("--tol-angle", type=float, default=1e-6)
    common.add_argument("--out", metavar="DIR", type=Path)
    common.add_argument("--json", action="store_true", help="JSON output")
    common.add_argument("--csv", action="store_true", help="CSV output")

    p = argparse.ArgumentParser(prog="abelym", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    g = sub.add_parser("gen", parents=[common], help="generate a mesh")
    g.add_argument("--disk", type=int, metavar="M")
    g.add_argument("--annulus", type=int, metavar="M")
    g.add_argument("--circle", type=int, metavar="M")
    g.add_argument("--cube", type=int, metavar="K")
    g.add_argument("--r-in", type=float, default=1.0)
    g.add_argument("--r-out", type=float, default=2.0)
    d = sub.add_parser("decompose", parents=[common], help="HMF decomposition")
    d.add_argument("--degree", type=int, default=1)
    d.add_argument("--cochain", metavar="PATH", help="cochain JSON with a 'values' list")
    d.add_argument("--seed", type=int, default=0)
    n = sub.add_parser("dn", parents=[common], help="Dirichlet-to-Neumann operator")
    n.add_argument("--weight", type=float, default=1.0)
    sub.add_parser("reduce", parents=[common], help="reduced boundary spaces")
    gl = sub.add_parser("glue", parents=[common], help="glue boundary components")
    gl.add_argument("--map", metavar="PATH", help="gluing map JSON")
    v = sub.add_parser("verify", parents=[common], help="run all checks")
    v.add_argument("--suite", metavar="NAME")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(args.command, args.mesh, args.gen,
                        Tolerances(args.tol_rank, args.tol_res, args.tol_angle),
                        args.out, args.json, args.csv)
        return COMMANDS[args.command](cfg, args)
    except (UsageError, MeshError, ValueError, OSError) as exc:
        print(f"abelym {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
