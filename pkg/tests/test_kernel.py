import numpy as np
import pytest

from depthlab.boolfn import BooleanFn, parity_family
from depthlab.dists import uniform_signs
from depthlab.kernel import (
    FeatureMap,
    depth2_to_kernel,
    feature_map_from_family,
    hardness_bound,
    hardness_bound_variants,
    min_hinge,
    min_hinge_family,
    random_sign_features,
    verify_linear_hardness,
)
from depthlab.boolfn import enumerate_signs
from depthlab.mlp import Mlp, forward_many


def grid_search_min(Phi, y, weights, B, resolution=0.05):
    """Brute-force hinge minimum over the B-ball, N <= 3."""
    N = Phi.shape[1]
    axis = np.arange(-B, B + 1e-9, resolution)
    grids = np.meshgrid(*[axis] * N, indexing="ij")
    W = np.stack([g.ravel() for g in grids], axis=0)
    W = W[:, np.sum(W**2, axis=0) <= B**2 + 1e-12]
    losses = weights @ np.maximum(0.0, 1.0 - y[:, None] * (Phi @ W))
    return float(losses.min())


@pytest.fixture(scope="module")
def parity6():
    return parity_family(6), uniform_signs(6)


class TestMinHinge:
    def test_zero_ball_loses_exactly_one(self, parity6):
        family, dist = parity6
        psi = feature_map_from_family(family[:4])
        res = min_hinge(psi, 0.0, family[1], dist)
        assert res.loss == 1.0
        assert np.all(res.w == 0.0)

    def test_realizable_direction(self, parity6):
        family, dist = parity6
        target = family[9]
        psi = feature_map_from_family([target, family[3], family[5]])
        res = min_hinge(psi, 1.0, target, dist, iters=10**4)
        assert res.loss <= 1e-3
        assert np.linalg.norm(res.w) <= 1.0 + 1e-9

    def test_doubling_b_never_hurts(self, parity6):
        family, dist = parity6
        target = family[21]
        psi = random_sign_features(6, 4, seed=8)
        l1 = min_hinge(psi, 1.0, target, dist, iters=5000).loss
        l2 = min_hinge(psi, 2.0, target, dist, iters=5000).loss
        assert l2 <= l1 + 2e-3

    @pytest.mark.parametrize("N", [1, 2, 3])
    def test_matches_grid_search(self, N, parity6):
        family, dist = parity6
        target = family[13]
        psi = random_sign_features(6, N, seed=100 + N)
        B = 1.5
        res = min_hinge(psi, B, target, dist, iters=2 * 10**4)
        oracle = grid_search_min(psi(dist.points), target(dist.points),
                                 dist.weights, B)
        assert abs(res.loss - oracle) <= 2e-2
        assert res.loss >= oracle - 1e-9  # the solver is a feasible point

    def test_certificate_fields(self, parity6):
        family, dist = parity6
        psi = feature_map_from_family(family[:4])
        res = min_hinge(psi, 1.0, family[1], dist, iters=400)
        assert res.regret_bound == pytest.approx(1.0 * 2.0 / np.sqrt(400))
        assert res.iters == 400
        doc = res.to_dict()
        assert "w" in doc and doc["w_norm"] <= 1.0 + 1e-9

    def test_cross_validated_against_convex_solver(self, parity6):
        # the stated 8-feature instance is far beyond grid search, so an
        # interior-point SOCP stands in as the independent oracle
        cvxpy = pytest.importorskip("cvxpy")
        family, dist = parity6
        target = family[13]
        psi = random_sign_features(6, 8, seed=4)
        B = 5.0
        res = min_hinge(psi, B, target, dist, iters=4 * 10**4)
        Phi = psi(dist.points)
        y = target(dist.points)
        w = cvxpy.Variable(8)
        obj = cvxpy.Minimize(dist.weights @ cvxpy.pos(1 - cvxpy.multiply(y, Phi @ w)))
        cvxpy.Problem(obj, [cvxpy.norm(w, 2) <= B]).solve()
        assert abs(res.loss - obj.value) <= 2e-2


class TestFeatureMaps:
    def test_singleton_family(self, parity6):
        family, dist = parity6
        psi = feature_map_from_family([family[7]])
        vals = psi(dist.points)
        assert vals.shape == (64, 1)
        assert np.array_equal(vals[:, 0], family[7](dist.points))

    def test_range_enforced(self):
        bad = FeatureMap(2, lambda X: np.full((len(X), 2), 1.5))
        with pytest.raises(ValueError):
            bad(np.zeros((3, 1)))

    def test_weak_approximation_from_correlation(self, parity6):
        # loss <= 1 - max_i |<f_i, target>| + tol for random sign targets
        family, dist = parity6
        feats = family[:16]
        psi = feature_map_from_family(feats)
        F = np.stack([f.table for f in feats]).astype(np.float64)
        rng = np.random.default_rng(3)
        for _ in range(10):
            table = (rng.integers(0, 2, size=64) * 2 - 1).astype(np.int8)
            target = BooleanFn(6, table)
            corr = np.abs(F @ (dist.weights * table.astype(np.float64)))
            res = min_hinge(psi, 1.0, target, dist, iters=10**4)
            assert res.loss <= 1.0 - corr.max() + 1e-2


class TestHardnessBound:
    def test_zero_predictor(self):
        assert hardness_bound(10, 0.0, 100) == 1.0

    def test_paper_scale_value(self):
        # N=1, B=1, d=2^72: 1 - sqrt(2 sqrt 5)/2^6
        got = hardness_bound(1, 1.0, 2**72)
        assert got == pytest.approx(1.0 - np.sqrt(2 * np.sqrt(5.0)) / 64.0, abs=1e-12)
        assert got == pytest.approx(0.9669, abs=1e-4)

    def test_vacuous_clamp(self):
        assert hardness_bound(64, 10.0, 1) == 0.0

    def test_variants_recorded(self):
        v = hardness_bound_variants(4, 0.001, 2**60)
        assert set(v) == {"proof_end_sqrt_2sqrt5N_d112", "statement_sqrt_5N_d112",
                          "corollary_sqrt_5N_d15"}
        assert all(0.0 <= x <= 1.0 for x in v.values())


class TestVerifyLinearHardness:
    def test_realizable_family_has_tiny_average(self, parity6):
        # features = the family itself: every target is a unit direction
        family, dist = parity6
        fam8 = family[:8]
        psi = feature_map_from_family(fam8)
        rep = verify_linear_hardness(psi, 1.0, fam8, dist, iters=4000)
        assert rep.average_loss <= 1e-3
        assert rep.bound_vacuous

    def test_grad_identity_and_report_shape(self, parity6):
        family, dist = parity6
        psi = random_sign_features(6, 8, seed=0)
        rep = verify_linear_hardness(psi, 2.0, family[:32], dist, iters=500)
        assert rep.grad_identity_max_err <= 1e-9
        assert rep.losses.shape == (32,)
        assert rep.slack == pytest.approx(rep.average_loss - rep.bound)
        rows = rep.to_csv_rows()
        assert rows[0][0] == 0 and len(rows) == 32


def random_depth2_pair_net(rng, k, n, scale=0.3):
    W1 = rng.normal(0.0, scale, size=(k, 2 * n))
    b1 = rng.normal(0.0, scale, size=k)
    W2 = rng.normal(0.0, scale, size=(1, k))
    return Mlp([(W1, b1), (W2, np.zeros(1))])


class TestDepth2Reduction:
    def test_grid_weights_reproduce_exactly(self, rng):
        n, k, delta = 5, 3, 0.25
        net = random_depth2_pair_net(rng, k, n)
        W1, b1 = net.layers[0]
        W1q = W1.copy()
        W1q[:, n:] = delta * np.floor(W1[:, n:] / delta)
        netq = Mlp([(W1q, b1), net.layers[1]])
        R = 1.0 + max(np.linalg.norm(W1q[i]) for i in range(k))
        red = depth2_to_kernel(netq, delta, R, n)
        for (Wa, ba), (Wb, bb) in zip(netq.layers, red.rounded_net.layers):
            assert np.array_equal(Wa, Wb) and np.array_equal(ba, bb)
        U = enumerate_signs(2 * n).astype(np.float64)
        assert np.array_equal(forward_many(netq, U), forward_many(red.rounded_net, U))

    def test_identity_and_rounding_bound(self, rng):
        n, k, delta = 6, 4, 0.25
        net = random_depth2_pair_net(rng, k, n)
        W1, b1 = net.layers[0]
        W2 = net.layers[1][0]
        R = max([np.linalg.norm(W2), np.linalg.norm(b1)]
                + [np.linalg.norm(W1[i, :n]) for i in range(k)]
                + [np.linalg.norm(W1[i, n:]) for i in range(k)])
        red = depth2_to_kernel(net, delta, R, n)
        U = enumerate_signs(2 * n).astype(np.float64)
        g = forward_many(net, U)
        ghat = forward_many(red.rounded_net, U)
        assert np.max(np.abs(g - ghat)) <= red.rounding_bound
        Xs = enumerate_signs(n).astype(np.float64)
        Psi = red.feature_map(Xs)
        n_x = 2**n
        for zi in range(0, n_x, 7):
            z = Xs[zi]
            u = red.selector(z)
            rows = np.arange(n_x) * n_x + zi
            assert np.max(np.abs(Psi @ u - ghat[rows])) <= 1e-9
            assert np.linalg.norm(u) <= red.coefficient_bound + 1e-12
        assert red.coefficient_bound <= 3 * R**2 * np.sqrt(n) + 1e-12

    def test_norm_precondition(self, rng):
        net = random_depth2_pair_net(rng, 3, 4, scale=1.0)
        with pytest.raises(ValueError):
            depth2_to_kernel(net, 0.25, R=1e-3, n=4)

    def test_output_bias_must_vanish(self, rng):
        net = random_depth2_pair_net(rng, 3, 4)
        biased = Mlp([net.layers[0], (net.layers[1][0], np.array([0.5]))])
        with pytest.raises(ValueError):
            depth2_to_kernel(biased, 0.25, R=10.0, n=4)


def test_min_hinge_family_matches_single_solves(parity6):
    family, dist = parity6
    psi = feature_map_from_family(family[:6])
    targets = family[:4]
    batched = min_hinge_family(psi, 1.5, targets, dist, iters=3000)
    singles = [min_hinge(psi, 1.5, t, dist, iters=3000).loss for t in targets]
    assert np.allclose(batched, singles, atol=1e-12)


def test_solve_report_omits_giant_w():
    import numpy as _np
    from depthlab.kernel import KernelSolveResult
    res = KernelSolveResult(w=_np.zeros(10**4 + 1), loss=1.0, B=1.0, iters=1,
                            regret_bound=1.0, final_step_norm=0.0,
                            loss_decrease_last_window=0.0)
    doc = res.to_dict()
    assert "w" not in doc and doc["w_norm"] == 0.0
