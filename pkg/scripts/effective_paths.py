"""Sample one trajectory and dump N(s) alongside N(s; t) for a few targets t."""
import argparse
import csv
import sys
from dataclasses import dataclass, field

from transq import catalog, sim


@dataclass
class Config:
    horizon: int = 40
    targets: list = field(default_factory=lambda: [10, 20, 30])
    seed: int = 1


def main(cfg: Config) -> None:
    model, law = catalog.five_batch_two_state(), catalog.five_batch_two_state_service()
    traj = sim.simulate_trajectory(model, law, cfg.horizon, sim.run_rng(cfg.seed, 0))
    paths = {t: sim.effective_path(traj, t) for t in cfg.targets}
    w = csv.writer(sys.stdout)
    w.writerow(["s", "N"] + [f"N_eff_t{t}" for t in cfg.targets])
    for s in range(cfg.horizon + 1):
        w.writerow([s, traj.counts[s]] + [paths[t][s] if s <= t else "" for t in cfg.targets])


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--horizon", type=int, default=40)
    parser.add_argument("--targets", type=int, nargs="+", default=[10, 20, 30])
    parser.add_argument("--seed", type=int, default=1)
    main(Config(**vars(parser.parse_args())))
