"""SMILES dataset files: UTF-8, one SMILES per line, ``#`` lines ignored."""

from __future__ import annotations

from pathlib import Path


def read_smiles_file(path: str | Path) -> list[str]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh.read().splitlines():
            if line.lstrip().startswith("#"):
                continue
            out.append(line.strip().split()[0] if line.strip() else "")
    return out


def write_smiles_file(path: str | Path, smiles: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in smiles:
            fh.write(s + "\n")
