#!/usr/bin/env python3
"""Export the three real-world benchmark tables to CSV from scikit-learn.

The library does not bundle data files; this writes wine.csv,
breast_cancer.csv and mnist_8x8.csv (the 8x8 downsampled digits) into a
target directory so `riemred benchmark --include-real DIR` can pick
them up.  Requires scikit-learn, whose bundled copies are offline.

Usage: python scripts/export_real_datasets.py [outdir]
"""

import csv
import sys

from sklearn.datasets import load_breast_cancer, load_digits, load_wine


def write(path, X, y):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["f%d" % j for j in range(X.shape[1])] + ["label"])
        for row, lab in zip(X, y):
            w.writerow(["%.17g" % v for v in row] + [str(int(lab))])
    print("wrote %s (%d x %d)" % (path, X.shape[0], X.shape[1]))


def main():
    outdir = sys.argv[1] if len(sys.argv) > 1 else "data"
    import os

    os.makedirs(outdir, exist_ok=True)
    wine = load_wine()
    write(os.path.join(outdir, "wine.csv"), wine.data, wine.target)
    cancer = load_breast_cancer()
    write(os.path.join(outdir, "breast_cancer.csv"), cancer.data, cancer.target)
    digits = load_digits()
    write(os.path.join(outdir, "mnist_8x8.csv"), digits.data, digits.target)


if __name__ == "__main__":
    main()
