"""Write the Iris and Wine tables bundled with scikit-learn as CSV files.

Usage: export_sklearn_data.py OUT_DIR

Each file has a header row, the feature columns, and the class name last.
Exits with status 1 when scikit-learn is unavailable.
"""
import csv
import pathlib
import sys


def main() -> int:
    try:
        from sklearn import datasets
    except ImportError:
        return 1
    out = pathlib.Path(sys.argv[1])
    out.mkdir(parents=True, exist_ok=True)
    for name, loader in (("iris", datasets.load_iris), ("wine", datasets.load_wine)):
        bunch = loader()
        with open(out / f"{name}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([*bunch.feature_names, "class"])
            for row, target in zip(bunch.data, bunch.target):
                writer.writerow([*(repr(float(v)) for v in row), bunch.target_names[target]])
    return 0


if __name__ == "__main__":
    sys.exit(main())
