#!/usr/bin/env python3
"""Extract the benchmark datasets bundled inside public Python wheels.

Concrete compressive strength comes from the `rdatasets` wheel
(modeldata/concrete), California housing from the `pytorch-widedeep`
wheel. Both are written as CSV under data/, and Concrete is additionally
split into seed-pinned 5-fold partitions written in KEEL .dat format.
"""
import argparse
import io
import lzma
import pathlib
import pickle
import subprocess
import sys
import tempfile
import zipfile

import numpy as np
import pandas as pd


def download(package, dest):
    subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps", "-q",
                    "-d", str(dest), package], check=True)
    return next(pathlib.Path(dest).glob(package.replace("-", "_") + "*.whl"))


def write_keel(path, relation, frame, target):
    inputs = [c for c in frame.columns if c != target]
    with open(path, "w") as out:
        out.write(f"@relation {relation}\n")
        for col in frame.columns:
            lo, hi = frame[col].min(), frame[col].max()
            out.write(f"@attribute {col} real [{float(lo)!r}, {float(hi)!r}]\n")
        out.write(f"@inputs {', '.join(inputs)}\n")
        out.write(f"@outputs {target}\n")
        out.write("@data\n")
        for row in frame.itertuples(index=False):
            out.write(", ".join(repr(float(v)) for v in row) + "\n")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    parser.add_argument("--seed", type=int, default=20240501)
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory() as tmp:
        wheel = download("rdatasets", tmp)
        raw = zipfile.ZipFile(wheel).read("rdatasets/_data/modeldata/concrete.pkl.compress")
        concrete = pickle.loads(lzma.decompress(raw)).drop(columns=["rownames"])
        concrete = concrete.astype(float)
        concrete.to_csv(out / "concrete.csv", index=False)

        wheel = download("pytorch-widedeep", tmp)
        raw = zipfile.ZipFile(wheel).read("pytorch_widedeep/datasets/data/california_housing.parquet.brotli")
        california = pd.read_parquet(io.BytesIO(raw)).astype(float)
        california.to_csv(out / "california_housing.csv", index=False)

    folds_dir = out / "keel" / "concrete"
    folds_dir.mkdir(parents=True, exist_ok=True)
    order = np.random.default_rng(args.seed).permutation(len(concrete))
    chunks = np.array_split(order, 5)
    for k in range(5):
        test = concrete.iloc[np.sort(chunks[k])]
        train = concrete.iloc[np.sort(np.concatenate([chunks[j] for j in range(5) if j != k]))]
        write_keel(folds_dir / f"concrete-5-{k + 1}tra.dat", "concrete", train, "compressive_strength")
        write_keel(folds_dir / f"concrete-5-{k + 1}tst.dat", "concrete", test, "compressive_strength")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
