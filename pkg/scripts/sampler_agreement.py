"""Total-variation distance between simulated and exact K* laws as draws grow.

    python3 scripts/sampler_agreement.py --sizes 2,1 --m 3 --reps 1000 10000 100000
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field

import numpy as np

from gpk import PartitionState, PitmanYor, pmf_kstar
from gpk.cli import sample_rows


@dataclass
class AgreementConfig:
    alpha: float = 0.5
    theta: float = 0.5
    sizes: str = "2,1"
    m: int = 3
    seed: int = 2024
    workers: int = 1
    reps: list[int] = field(default_factory=lambda: [1_000, 10_000, 100_000])


def parse(argv=None) -> AgreementConfig:
    d = AgreementConfig()
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--alpha", type=float, default=d.alpha)
    p.add_argument("--theta", type=float, default=d.theta)
    p.add_argument("--sizes", default=d.sizes)
    p.add_argument("--m", type=int, default=d.m)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--workers", type=int, default=d.workers)
    p.add_argument("--reps", type=int, nargs="+", default=d.reps)
    return AgreementConfig(**vars(p.parse_args(argv)))


def main(argv=None):
    cfg = parse(argv)
    model, state = PitmanYor(cfg.alpha, cfg.theta), PartitionState.parse(cfg.sizes)
    exact = np.array(pmf_kstar(model, state, cfg.m).probs)
    print(f"exact K* pmf: {np.round(exact, 6).tolist()}")
    print("reps,tv,tv_x_sqrt_reps")
    for reps in cfg.reps:
        counts = np.zeros(cfg.m + 1)
        for _, _, o in sample_rows(model, state, cfg.m, cfg.seed, reps, cfg.workers):
            counts[o.kstar] += 1
        tv = 0.5 * np.abs(counts / reps - exact).sum()
        print(f"{reps},{tv:.5f},{tv * np.sqrt(reps):.3f}")


if __name__ == "__main__":
    main()
