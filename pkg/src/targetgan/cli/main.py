"""``targetgan`` command line.

Exit codes: 0 success, 2 usage or configuration error, 3 data error,
4 numerical abort.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path
from typing import Sequence

from ..chem import (
    ChemError,
    MolGraph,
    TooManyAtoms,
    check_validity,
    parse_smiles,
    read_smiles_file,
    to_matrices,
    write_matrices,
    write_smiles_file,
)
from ..metrics import descriptors, lipinski_veber_pass, max_similarities, pass_flags, report
from ..numcore import NumcoreError
from ..pocket import PocketError, read_edge_csv, write_pocket_matrices
from ..pocket.pipeline import featurize_pocket
from ..training import (
    CheckpointCorrupt,
    ConfigError,
    DataError,
    NonFiniteLoss,
    generate,
    load_bundle,
    load_config,
    train,
)
from ..training.data import MolSet, read_molecules
from .manifest import RunManifest

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _manifest_path(out: str | Path) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".manifest.json")


def _args(a: argparse.Namespace) -> dict:
    return {k: v for k, v in vars(a).items() if k != "func"}


def _valid_graphs(smiles: Sequence[str]) -> list[MolGraph]:
    out = []
    for s in smiles:
        if not s:
            continue
        try:
            g = parse_smiles(s)
        except ChemError:
            continue
        if check_validity(g):
            out.append(g)
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_featurize_mol(a: argparse.Namespace) -> int:
    RunManifest.create("featurize-mol", _args(a), None, {"in": a.inp}).write(_manifest_path(a.out))
    parsed = written = too_big = syntax = 0
    failures = []
    with open(a.out, "wb") as fh:
        for line_no, s in enumerate(read_smiles_file(a.inp), 1):
            if not s:
                continue
            try:
                g = parse_smiles(s, a.max_atoms)
            except TooManyAtoms:
                too_big += 1
                continue
            except ChemError as exc:
                syntax += 1
                failures.append(f"{a.inp}:{line_no}: {exc}")
                continue
            parsed += 1
            write_matrices(fh, to_matrices(g, a.max_atoms))
            written += 1
    for f in failures:
        print(f, file=sys.stderr)
    print(f"parsed={parsed} written={written} rejected_size={too_big} errors={syntax}")
    if failures and not a.skip_errors:
        return EXIT_DATA
    return EXIT_OK


def cmd_featurize_pocket(a: argparse.Namespace) -> int:
    inputs = {"pdb": a.pdb, "edges": a.edges or ""}
    RunManifest.create("featurize-pocket", _args(a), None, inputs).write(_manifest_path(a.out))
    text = Path(a.pdb).read_text(encoding="utf-8", errors="replace")
    edges = read_edge_csv(a.edges) if a.edges else None
    res = featurize_pocket(text, a.ligand_selector, a.cutoff, edges, a.truncate, a.max_atoms)
    with open(a.out, "wb") as fh:
        write_pocket_matrices(fh, res.matrices)
    if res.site_atoms == 0:
        print(f"warning: no protein atoms within {a.cutoff} A of the ligand; pocket is empty",
              file=sys.stderr)
    print(f"ligand_atoms={res.ligand_atoms} pocket_atoms={len(res.graph.atoms)} "
          f"edges={len(res.graph.edges)} truncated={res.truncated} untyped_h={res.unmapped}")
    return EXIT_OK


def _overrides(pairs: Sequence[str]) -> dict[str, str]:
    out = {}
    for p in pairs:
        if "=" not in p:
            raise UsageError(f"--set expects key=value, got {p!r}")
        k, v = p.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def cmd_train(a: argparse.Namespace) -> int:
    overrides = _overrides(a.set or [])
    if a.out:
        overrides["out_dir"] = a.out
    cfg = load_config(a.config, overrides)
    out = Path(cfg.out_dir)
    inputs = {"config": a.config, "general": cfg.general, "inhibitors": cfg.inhibitors, "pocket": cfg.pocket}
    RunManifest.create("train", cfg.to_dict(), cfg.seed, inputs).write(out / "manifest.json")
    bundle = load_bundle(cfg)
    (out / "config.cfg").write_text(cfg.to_text())
    trainer = train(cfg, bundle, out)
    last = trainer.records[-1] if trainer.records else None
    print(f"epochs={trainer.epoch} steps={trainer.step} checkpoints={len(trainer.checkpoints)}"
          + (f" validity={last.validity:.4f}" if last else ""))
    return EXIT_OK


def cmd_generate(a: argparse.Namespace) -> int:
    RunManifest.create("generate", _args(a), a.seed, {"checkpoint": a.checkpoint,
                                                  "seed_smiles": a.seed_smiles or ""}).write(_manifest_path(a.out))
    seeds = None
    if a.seed_smiles:
        graphs = read_molecules(a.seed_smiles)
        seeds = MolSet.from_graphs(graphs, max(len(g) for g in graphs))
    try:
        res = generate(a.checkpoint, a.n, a.mode, a.seed, a.tau, seeds)
    except ValueError as exc:
        if isinstance(exc, CheckpointCorrupt):
            raise
        raise UsageError(str(exc)) from exc
    write_smiles_file(a.out, res.smiles)
    blank = sum(not s for s in res.smiles)
    print(f"generated={len(res)} undecodable={blank}")
    return EXIT_OK


def cmd_eval(a: argparse.Namespace) -> int:
    inputs = {"generated": a.generated, "training": a.training, "inhibitors": a.inhibitors}
    RunManifest.create("eval", _args(a), None, inputs).write(_manifest_path(a.out))
    rep = report(read_smiles_file(a.generated), read_smiles_file(a.training),
                 read_smiles_file(a.inhibitors), a.threshold)
    rep.write_csv(a.out)
    for k, v in rep.rows():
        print(f"{k}={v:.6g}")
    return EXIT_OK


def cmd_filter(a: argparse.Namespace) -> int:
    inputs = {"generated": a.generated, "training": a.training, "inhibitors": a.inhibitors}
    RunManifest.create("filter", _args(a), None, inputs).write(_manifest_path(a.out))
    gen = _valid_graphs(read_smiles_file(a.generated))
    refs = _valid_graphs(read_smiles_file(a.training)) + _valid_graphs(read_smiles_file(a.inhibitors))
    sims = max_similarities(gen, refs)
    from ..chem import write_smiles

    kept = []
    report_path = Path(a.report) if a.report else Path(a.out).with_suffix(".csv")
    with open(report_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        flag_names = list(pass_flags(descriptors(gen[0])).keys()) if gen else []
        w.writerow(["smiles", "max_similarity", "similarity_pass", *flag_names, "passes"])
        for g, s in zip(gen, sims):
            flags = pass_flags(descriptors(g))
            ok_sim = not s > a.threshold
            ok = ok_sim and all(flags.values())
            smi = write_smiles(g)
            w.writerow([smi, repr(s), int(ok_sim), *(int(flags[k]) for k in flag_names), int(ok)])
            if ok:
                kept.append(smi)
    write_smiles_file(a.out, kept)
    print(f"valid={len(gen)} kept={len(kept)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="targetgan",
        description="Target-conditioned molecular graph GAN: featurization, training, sampling and evaluation.",
        epilog="exit codes: 0 success, 2 usage error, 3 data error, 4 numerical abort")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("featurize-mol", help="SMILES file to MOLM matrix records")
    s.add_argument("--in", dest="inp", required=True, help="SMILES file, one molecule per line")
    s.add_argument("--out", required=True, help="output MOLM file")
    s.add_argument("--max-atoms", type=int, default=45)
    s.add_argument("--skip-errors", action="store_true", help="exit 0 even if some lines fail to parse")
    s.set_defaults(func=cmd_featurize_mol)

    s = sub.add_parser("featurize-pocket", help="PDB binding site to POKM pocket matrices")
    s.add_argument("--pdb", required=True)
    s.add_argument("--ligand-selector", required=True, help="HETATM residue name of the ligand")
    s.add_argument("--cutoff", type=float, default=9.0, help="distance cutoff in angstrom (inclusive)")
    s.add_argument("--edges", help="CSV i,j,edge_type over binding-site atoms; inferred when absent")
    s.add_argument("--truncate", action="store_true", help="keep the closest atoms instead of failing on overflow")
    s.add_argument("--max-atoms", type=int, default=450)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_featurize_pocket)

    s = sub.add_parser("train", help="train a model from a key=value config")
    s.add_argument("--config", required=True)
    s.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key (repeatable)")
    s.add_argument("--out", help="output directory (overrides out_dir)")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("generate", help="sample molecules from a checkpoint")
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--mode", choices=("argmax", "temperature"), default="argmax")
    s.add_argument("--tau", type=float, default=1.0)
    s.add_argument("--seed-smiles", help="molecules to perturb when the model uses perturbed input")
    s.add_argument("--out", required=True, help="SMILES output; blank lines mark undecodable samples")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("eval", help="benchmark metrics for generated molecules")
    s.add_argument("--generated", required=True)
    s.add_argument("--training", required=True)
    s.add_argument("--inhibitors", required=True)
    s.add_argument("--threshold", type=float, default=0.7)
    s.add_argument("--out", required=True, help="metric CSV")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("filter", help="similarity and drug-likeness filtering")
    s.add_argument("--generated", required=True)
    s.add_argument("--training", required=True)
    s.add_argument("--inhibitors", required=True)
    s.add_argument("--threshold", type=float, default=0.7)
    s.add_argument("--out", required=True, help="SMILES file of survivors")
    s.add_argument("--report", help="per-molecule CSV (default: OUT with .csv suffix)")
    s.set_defaults(func=cmd_filter)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonFiniteLoss as exc:
        where = f" (diagnostic checkpoint: {exc.checkpoint})" if exc.checkpoint else ""
        print(f"numerical abort: {exc}{where}", file=sys.stderr)
        return EXIT_NUMERIC
    except NumcoreError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, CheckpointCorrupt, ChemError, PocketError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
