import numpy as np
import pytest

from depthlab.audit import audit_l_standard, param_lipschitz_ratio
from depthlab.mlp import Mlp, xavier_init


def test_affine_ratio_is_exactly_abs_x():
    # weight-only perturbation of g(x) = w x: ratio |dw * x| / |dw| = |x|
    a = Mlp([(np.array([[1.0]]), np.array([0.0]))])
    b = Mlp([(np.array([[1.5]]), np.array([0.0]))])
    assert param_lipschitz_ratio(a, b, [0.5]) == 0.5
    assert param_lipschitz_ratio(a, b, [2.0]) == 2.0


def test_coincident_probes_rejected():
    a = Mlp([(np.array([[1.0]]), np.array([0.0]))])
    with pytest.raises(ValueError):
        param_lipschitz_ratio(a, a, [1.0])


def xavier_factory(depth, width, d):
    return lambda s: xavier_init(depth, width, d, seed=s)


def test_xavier_draws_satisfy_ratio_bound():
    # depth 4, width 64 >= depth^2, d = 2: at least 95% of 100 draws stay
    # within 1.1 * ||x|| * 1.05 inside the 1/depth ball
    rep = audit_l_standard(xavier_factory(4, 64, 2), rho=0.25, trials=100,
                           probe_count=8, seed=7)
    assert rep.pass_fraction >= 0.95
    assert rep.lhat_theta >= 0.0 and rep.lhat_x >= 0.0 and rep.lhat_sup >= 0.0


def test_reported_ratios_monotone_in_rho():
    # dyadic radii ladder: the probe set for a larger rho is a superset
    factory = xavier_factory(3, 16, 2)
    reps = [audit_l_standard(factory, rho=r, trials=8, probe_count=4, seed=3)
            for r in (0.125, 0.25, 0.5)]
    assert reps[0].lhat_theta <= reps[1].lhat_theta <= reps[2].lhat_theta


def test_invalid_rho():
    with pytest.raises(ValueError):
        audit_l_standard(xavier_factory(3, 8, 1), rho=0.0, trials=1,
                         probe_count=1, seed=0)
