"""Population-gradient descent on the hinge loss, with full trajectories.

The gradient at each step is the distribution-weighted average of per-point
hinge subgradients (exact on enumerated supports, quadrature/Monte Carlo on
the cube).  A run records loss, gradient norm and parameter distance at
every iterate.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, asdict

import numpy as np

from .mlp import Mlp, population_hinge_grad

__all__ = ["GdConfig", "Trajectory", "GdDivergence", "gd_train"]


class GdDivergence(RuntimeError):
    """Loss or gradient became non-finite during training."""


@dataclass(frozen=True)
class GdConfig:
    eta: float
    iters: int
    seed: int = 0
    estimator: str = "grid"  # "grid" or "mc"; which estimator built the dist
    resolution: int = 0      # grid points or Monte Carlo sample count

    def __post_init__(self):
        if not self.eta >= 0.0:
            raise ValueError("eta must be >= 0")
        if self.iters < 1:
            raise ValueError("iters must be >= 1")


@dataclass
class Trajectory:
    """Per-iteration records for t = 0..T; final_net is the trained net."""

    config: GdConfig
    iters: np.ndarray
    loss: np.ndarray
    grad_norm: np.ndarray
    param_dist: np.ndarray
    final_net: Mlp

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iter", "loss", "grad_norm", "param_dist"])
            for row in zip(self.iters, self.loss, self.grad_norm, self.param_dist):
                w.writerow([int(row[0])] + [repr(float(v)) for v in row[1:]])

    def to_json(self, path) -> None:
        doc = {
            "config": asdict(self.config),
            "records": [
                {
                    "iter": int(t),
                    "loss": float(l),
                    "grad_norm": float(g),
                    "param_dist": float(d),
                }
                for t, l, g, d in zip(
                    self.iters, self.loss, self.grad_norm, self.param_dist
                )
            ],
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, sort_keys=True)


def gd_train(net: Mlp, target, dist, cfg: GdConfig) -> Trajectory:
    """Run ``cfg.iters`` steps of theta <- theta - eta * population gradient.

    Records (loss, grad norm, distance from theta_0) at every iterate
    including the initial one, so the arrays have iters+1 entries and
    loss[-1] is the loss of the returned net.
    """
    theta0 = net.flat_params()
    theta = theta0.copy()
    T = cfg.iters
    loss = np.empty(T + 1)
    gnorm = np.empty(T + 1)
    pdist = np.empty(T + 1)
    current = net
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(T + 1):
            l, g = population_hinge_grad(current, target, dist)
            if not (np.isfinite(l) and np.isfinite(g).all()):
                raise GdDivergence(
                    f"non-finite loss or gradient at iteration {t} (loss={l})"
                )
            loss[t] = l
            gnorm[t] = np.linalg.norm(g)
            pdist[t] = np.linalg.norm(theta - theta0)
            if t < T:
                if cfg.eta != 0.0:
                    theta = theta - cfg.eta * g
                    if not np.isfinite(theta).all():
                        raise GdDivergence(f"non-finite parameters at iteration {t + 1}")
                    current = net.with_flat_params(theta)
                # eta == 0 keeps the exact same object: the zero step is exact
    return Trajectory(cfg, np.arange(T + 1), loss, gnorm, pdist, current)
