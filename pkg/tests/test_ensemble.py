import numpy as np
import pytest

from conftest import random_dataset
from randlink.deep import train_drvfl
from randlink.ensemble import (
    TrueEnsemble,
    combine_scores,
    ensemble_forward,
    ensemble_predict,
    train_edrvfl,
    train_edsp_rvfl,
    train_tedrvfl,
)
from randlink.shallow import NetworkConfig, output_design, train_rvfl


def _onehot_rows(labels, K):
    return np.eye(K)[labels]


class TestCombineScores:
    def test_unanimous(self):
        scores = [_onehot_rows([3, 3], 5) * w for w in (1.0, 0.4, 2.0)]
        assert combine_scores(scores).tolist() == [3, 3]

    def test_strict_majority(self):
        scores = [_onehot_rows([k], 2) for k in (0, 1, 1)]
        assert combine_scores(scores).tolist() == [1]

    def test_two_two_tie_by_hand(self):
        members = np.array([
            # row 0: votes 0,0,1,1; mean(class0)=0.4 < mean(class1)=0.475
            # row 1: votes 0,0,1,1; means 0.5 vs 0.5, lowest index wins
            # row 2: votes 0,0,1,1; class 2 has the top mean but holds no votes
            [[0.9, 0.1, 0.0], [1.0, 0.0, 0.0], [0.5, 0.0, 0.45]],
            [[0.6, 0.3, 0.1], [1.0, 0.0, 0.0], [0.5, 0.0, 0.45]],
            [[0.0, 0.8, 0.2], [0.0, 1.0, 0.0], [0.0, 0.5, 0.45]],
            [[0.1, 0.7, 0.5], [0.0, 1.0, 0.0], [0.0, 0.5, 0.45]],
        ])
        assert combine_scores(list(members), "majority_vote").tolist() == [1, 0, 0]

    def test_average(self, rng):
        members = [rng.normal(size=(12, 4)) for _ in range(3)]
        expected = np.argmax((members[0] + members[1] + members[2]) / 3, axis=1)
        np.testing.assert_array_equal(combine_scores(members, "score_average"), expected)

    def test_average_order_invariant(self, rng):
        members = [rng.normal(size=(20, 3)) for _ in range(5)]
        perm = rng.permutation(5)
        np.testing.assert_array_equal(combine_scores(members, "average"),
                                      combine_scores([members[i] for i in perm], "average"))

    def test_single_member_vote_is_argmax(self, rng):
        S = rng.normal(size=(30, 4))
        np.testing.assert_array_equal(combine_scores([S]), np.argmax(S, axis=1))

    def test_unknown_rule(self):
        with pytest.raises(ValueError):
            combine_scores([np.zeros((1, 2))], "median")


class TestTrainEdrvfl:
    def test_single_layer_is_rvfl(self, rng):
        ds = random_dataset(rng, T=50, d=4, K=3)
        cfg = NetworkConfig(n_hidden=15, lam=0.5, seed=2)
        ens, shallow = train_edrvfl(ds, cfg), train_rvfl(ds, cfg)
        assert ens.betas[0].tobytes() == shallow.beta.tobytes()
        np.testing.assert_array_equal(ens.predict(ds.features), shallow.predict(ds.features))

    def test_first_hidden_matches_rvfl(self, rng):
        ds = random_dataset(rng, T=50, d=4, K=3)
        cfg = NetworkConfig(n_hidden=15, n_layers=4, seed=2)
        ens, shallow = train_edrvfl(ds, cfg), train_rvfl(ds, cfg.replace(n_layers=1))
        Xn = ens.norm_params.apply(ds.features)
        first = ensemble_forward(Xn, ens.layers)[0]
        np.testing.assert_array_equal(first, shallow.layer.forward(Xn))

    @pytest.mark.parametrize("direct", [True, False])
    def test_widths(self, rng, direct):
        ds = random_dataset(rng, T=40, d=6, K=2)
        ens = train_edrvfl(ds, NetworkConfig(n_hidden=9, n_layers=4, direct_links=direct))
        rows = 9 + 6 if direct else 9 + 1
        assert [b.shape for b in ens.betas] == [(rows, 2)] * 4
        upper = 9 + 6 if direct else 9
        assert [l.W.shape for l in ens.layers] == [(6, 9)] + [(upper, 9)] * 3

    def test_member_scores_replay(self, rng):
        ds = random_dataset(rng, T=40, d=3, K=3)
        ens = train_edrvfl(ds, NetworkConfig(n_hidden=7, n_layers=3))
        Xn = ens.norm_params.apply(ds.features)
        sig = lambda z: 1.0 / (1.0 + np.exp(-z))  # noqa: E731
        inputs, expected = Xn, []
        for layer, beta in zip(ens.layers, ens.betas):
            H = sig(inputs @ layer.W + layer.b)
            expected.append(np.hstack([H, Xn]) @ beta)
            inputs = np.hstack([H, Xn])
        labels, member = ensemble_predict(ens, ds.features)
        for got, want in zip(member, expected):
            np.testing.assert_allclose(got, want, atol=1e-10)
        np.testing.assert_array_equal(labels, combine_scores(expected))

    def test_per_layer_lambda_independence(self, rng):
        ds = random_dataset(rng, T=40, d=3, K=2)
        base = NetworkConfig(n_hidden=6, n_layers=3, layer_lambdas=(0.1, 0.1, 0.1))
        a = train_edrvfl(ds, base)
        b = train_edrvfl(ds, base.replace(layer_lambdas=(0.1, 50.0, 0.1)))
        assert a.betas[0].tobytes() == b.betas[0].tobytes()
        assert a.betas[2].tobytes() == b.betas[2].tobytes()
        assert a.betas[1].tobytes() != b.betas[1].tobytes()

    def test_rule_override(self, rng):
        ds = random_dataset(rng, T=40, d=3, K=2)
        ens = train_edrvfl(ds, NetworkConfig(n_hidden=6, n_layers=3), combine_rule="vote")
        assert ens.combine_rule == "majority_vote"
        np.testing.assert_array_equal(ens.predict(ds.features, "average"),
                                      np.argmax(ens.scores(ds.features), axis=1))

    def test_edsp_shapes(self, rng):
        ds = random_dataset(rng, T=30, d=4, K=2)
        ens = train_edsp_rvfl(ds, NetworkConfig(n_hidden=5, n_layers=3))
        assert [b.shape for b in ens.betas] == [(9, 2)] * 3
        assert ens.kind == "edsp-rvfl"


class TestTrueEnsemble:
    def test_single_member(self, rng):
        ds = random_dataset(rng, T=40, d=4, K=3)
        cfg = NetworkConfig(n_hidden=8, n_layers=2, seed=3)
        te = train_tedrvfl(ds, cfg, member_count=1)
        np.testing.assert_array_equal(te.predict(ds.features), train_drvfl(ds, cfg).predict(ds.features))

    def test_default_size_and_seeds(self, rng):
        ds = random_dataset(rng, T=40, d=4, K=2)
        te = train_tedrvfl(ds, NetworkConfig(n_hidden=8, n_layers=3, seed=10))
        assert len(te.members) == 3
        assert [m.config.seed for m in te.members] == [10, 11, 12]
        assert te.members[0].layers[0].W.tobytes() != te.members[1].layers[0].W.tobytes()

    def test_mean_of_members(self, rng):
        ds = random_dataset(rng, T=40, d=4, K=3)
        te = train_tedrvfl(ds, NetworkConfig(n_hidden=8, n_layers=2), member_count=3)
        parts = [m.scores(ds.features) for m in te.members]
        np.testing.assert_allclose(te.scores(ds.features), (parts[0] + parts[1] + parts[2]) / 3,
                                   atol=1e-14)

    def test_rejects_mixed_architectures(self, rng):
        ds = random_dataset(rng, T=30, d=3, K=2)
        a = train_drvfl(ds, NetworkConfig(n_hidden=5, n_layers=2))
        b = train_drvfl(ds, NetworkConfig(n_hidden=6, n_layers=2))
        with pytest.raises(ValueError):
            TrueEnsemble((a, b))
        with pytest.raises(ValueError):
            TrueEnsemble(())

    def test_member_count_validation(self, toy):
        with pytest.raises(ValueError):
            train_tedrvfl(toy, NetworkConfig(n_hidden=4), member_count=0)


def test_output_design_order(rng):
    H, X = rng.normal(size=(3, 2)), rng.normal(size=(3, 4))
    D = output_design([H], X, True, True)
    np.testing.assert_array_equal(D, np.hstack([H, X, np.ones((3, 1))]))
