"""Fano factor of the geometric-arrival / geometric-service queue over (p, alpha, t)."""
import argparse

import numpy as np

from transq.exact import mminf_moments


def main(t: int) -> None:
    grid = np.round(np.arange(0.1, 1.0, 0.1), 1)
    print("p\\alpha " + " ".join(f"{a:>7.1f}" for a in grid))
    for p in grid:
        print(f"{p:>7.1f} " + " ".join(f"{mminf_moments(p, a, t)[2]:7.4f}" for a in grid))


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--time", type=int, default=50)
    main(parser.parse_args().time)
