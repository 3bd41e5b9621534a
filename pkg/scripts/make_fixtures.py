"""Regenerate the CSV scenario fixtures shipped with the package."""

from pathlib import Path

import numpy as np

from rcond.core import RandomVector, ScenarioSpace, write_csv
from rcond.sparsity import threshold_fixture

OUT = Path(__file__).resolve().parents[1] / "src" / "rcond" / "fixtures"


def ensemble(rng, n, dim, cells):
    labels = np.concatenate([np.arange(cells), rng.integers(0, cells, n - cells)])
    space = ScenarioSpace(rng.uniform(0.2, 1.0, n), rng.uniform(0.2, 1.0, n), labels)
    return RandomVector(space, rng.normal(0.0, 1.0, (n, dim)))


def main():
    rng = np.random.default_rng(20240611)
    OUT.mkdir(parents=True, exist_ok=True)
    write_csv(ensemble(rng, 64, 1, 1), OUT / "oracle_trivial.csv")
    write_csv(ensemble(rng, 32, 1, 2), OUT / "oracle_two_cell.csv")
    write_csv(ensemble(rng, 12, 2, 2), OUT / "dykstra_plane.csv")
    X = threshold_fixture()[0]
    write_csv(X, OUT / "sparse_threshold.csv")


if __name__ == "__main__":
    main()
