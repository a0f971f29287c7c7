#!/usr/bin/env python3
#
# molmetric - Copyright 2026 The molmetric Authors.
# SPDX-License-Identifier: Apache-2.0
#
"""Regenerates data/corpus.csv from the MoleculeACE ChEMBL bioactivity sets.

Requires RDKit and the MoleculeACE wheel (MIT licensed), e.g.

    pip download MoleculeACE==3.0.0 --no-deps -d /tmp/ma
    python3 tools/build_corpus.py /tmp/ma/MoleculeACE-3.0.0-py3-none-any.whl

The wheel bundles 30 ChEMBL target sets. Their union is deduplicated by
SMILES string and written in sorted order (or a seeded sample of --size
molecules). Descriptor columns:

    logp      Wildman-Crippen logP (RDKit Crippen.MolLogP)
    qed       quantitative estimate of drug-likeness (RDKit QED.qed)
    sa_score  synthetic accessibility (RDKit Contrib SA_Score)
    activity  1.0 if the molecule has Ki <= 100 nM at the serotonin 5-HT1A
              receptor (ChEMBL target CHEMBL214), else 0.0
"""

import argparse
import csv
import io
import os
import random
import sys
import zipfile

from rdkit import Chem, RDConfig, RDLogger
from rdkit.Chem import QED, Crippen

sys.path.append(os.path.join(RDConfig.RDContribDir, "SA_Score"))
import sascorer  # noqa: E402

DATA_DIR = "MoleculeACE/Data/benchmark_data/"
TARGET = "CHEMBL214_Ki"
ACTIVE_NM = 100.0


def read_sets(wheel):
    potency = {}
    with zipfile.ZipFile(wheel) as z:
        for name in sorted(z.namelist()):
            if not (name.startswith(DATA_DIR) and name.endswith(".csv")):
                continue
            target = os.path.basename(name)[:-4]
            with z.open(name) as f:
                for row in csv.DictReader(io.TextIOWrapper(f, encoding="utf-8")):
                    entry = potency.setdefault(row["smiles"], {})
                    entry[target] = float(row["exp_mean [nM]"])
    return potency


def describe(smiles, targets):
    mol = Chem.MolFromSmiles(smiles)
    active = targets.get(TARGET, float("inf")) <= ACTIVE_NM
    return {
        "smiles": smiles,
        "logp": f"{Crippen.MolLogP(mol):.4f}",
        "qed": f"{QED.qed(mol):.4f}",
        "sa_score": f"{sascorer.calculateScore(mol):.4f}",
        "activity": "1.0" if active else "0.0",
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("wheel", help="path to the MoleculeACE wheel")
    parser.add_argument("--out", default="data/corpus.csv")
    parser.add_argument("--size", type=int, default=0, help="0 keeps all")
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()
    RDLogger.DisableLog("rdApp.*")
    rng = random.Random(args.seed)

    potency = read_sets(args.wheel)
    print(f"unique molecules: {len(potency)}", file=sys.stderr)
    picked = sorted(potency)
    if 0 < args.size < len(picked):
        picked = rng.sample(picked, args.size)
    rows = [describe(s, potency[s]) for s in picked]
    with open(args.out, "w", newline="") as f:
        writer = csv.DictWriter(
            f, fieldnames=["smiles", "logp", "qed", "sa_score", "activity"],
            lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)


if __name__ == "__main__":
    main()
