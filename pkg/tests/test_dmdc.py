import json

import numpy as np
import pytest

from statesel.benchgen import RlcParams
from statesel.datamodel import SnapshotSet, assemble_snapshots
from statesel.dmdc import (
    StateSpaceModel,
    TruncationPolicy,
    c2d_zoh,
    fit_dynamics,
    fit_model,
    fit_output_map,
    load_model,
    rollout,
    save_model,
    truncated_svd,
)
from statesel.errors import DegenerateSnapshots

from conftest import random_stable_discrete, simulate_discrete


def make_model(Ad, Bd, Cd, dt=0.1):
    n, m = Bd.shape
    p = Cd.shape[0]
    return StateSpaceModel(
        Ad=Ad,
        Bd=Bd,
        Cd=Cd,
        state_names=tuple(f"x{i}" for i in range(n)),
        input_names=tuple(f"u{i}" for i in range(m)),
        output_names=tuple(f"y{i}" for i in range(p)),
        dt=dt,
    )


class TestTruncatedSvd:
    def test_condition_cap(self):
        M = np.diag([1.0, 1e-3, 1e-12])
        _, s, _, q = truncated_svd(M, TruncationPolicy(1e9))
        assert q == 2
        assert np.allclose(s, [1.0, 1e-3])

    def test_identity(self):
        _, s, _, q = truncated_svd(np.eye(3), TruncationPolicy())
        assert q == 3
        assert np.allclose(s, 1.0)

    def test_known_rank_by_construction(self):
        rng = np.random.default_rng(3)
        M = rng.standard_normal((10, 4)) @ rng.standard_normal((4, 40))
        *_, q = truncated_svd(M, TruncationPolicy())
        assert q == 4

    def test_zero_matrix_degenerate(self):
        with pytest.raises(DegenerateSnapshots):
            truncated_svd(np.zeros((3, 5)), TruncationPolicy())

    def test_factorization_reconstructs(self):
        rng = np.random.default_rng(4)
        M = rng.standard_normal((5, 20))
        U, s, W, q = truncated_svd(M, TruncationPolicy())
        assert q == 5
        assert np.allclose(U @ np.diag(s) @ W.T, M)

    def test_policy_validated(self):
        with pytest.raises(ValueError):
            TruncationPolicy(0.5)


class TestFitDynamics:
    def test_recovers_random_stable_system(self):
        rng = np.random.default_rng(11)
        Ad, Bd, _ = random_stable_discrete(rng, n=3, m=1, p=1)
        V = rng.standard_normal((1, 200))
        X = simulate_discrete(Ad, Bd, V, x0=rng.standard_normal(3))
        snaps = SnapshotSet(X=X[:, :-1], Xp=X[:, 1:], V=V, Y=np.zeros((1, 200)))
        Ad_hat, Bd_hat = fit_dynamics(snaps)
        assert np.max(np.abs(Ad_hat - Ad)) < 1e-8
        assert np.max(np.abs(Bd_hat - Bd)) < 1e-8

    def test_identity_dynamics(self):
        rng = np.random.default_rng(12)
        X = rng.standard_normal((2, 200))
        V = rng.standard_normal((1, 200))
        snaps = SnapshotSet(X=X, Xp=X.copy(), V=V, Y=np.zeros((1, 200)))
        Ad_hat, Bd_hat = fit_dynamics(snaps)
        assert np.max(np.abs(Ad_hat - np.eye(2))) < 1e-10
        assert np.max(np.abs(Bd_hat)) < 1e-10

    def test_rlc_matches_zoh_oracle(self, rlc_split, rlc_dataset):
        train, _ = rlc_split
        idx = [rlc_dataset.index_of("capacitor.v"), rlc_dataset.index_of("capacitor.p.i")]
        snaps = assemble_snapshots(train, idx)
        Ad_hat, Bd_hat = fit_dynamics(snaps)
        params = RlcParams()
        A, B = params.continuous()
        Ad, Bd = c2d_zoh(A, B, params.dt)
        assert np.max(np.abs(Ad_hat - Ad)) < 1e-6
        assert np.max(np.abs(Bd_hat - Bd)) < 1e-6

    def test_residual_matches_dense_reference(self):
        rng = np.random.default_rng(13)
        X = rng.standard_normal((3, 60))
        V = rng.standard_normal((2, 60))
        Xp = rng.standard_normal((3, 60))
        snaps = SnapshotSet(X=X, Xp=Xp, V=V, Y=np.zeros((1, 60)))
        Ad_hat, Bd_hat = fit_dynamics(snaps)
        res = np.linalg.norm(Xp - Ad_hat @ X - Bd_hat @ V)
        omega = np.vstack([X, V])
        G_ref, *_ = np.linalg.lstsq(omega.T, Xp.T, rcond=None)
        res_ref = np.linalg.norm(Xp - G_ref.T @ omega)
        assert res <= res_ref * (1 + 1e-9)

    def test_truncation_monotonicity(self):
        rng = np.random.default_rng(14)
        # badly scaled states force the cap to bite
        X = rng.standard_normal((4, 120)) * np.array([1.0, 1e-4, 1e-7, 1e-10])[:, None]
        V = rng.standard_normal((1, 120))
        Xp = rng.standard_normal((4, 120))
        snaps = SnapshotSet(X=X, Xp=Xp, V=V, Y=np.zeros((1, 120)))
        residuals = []
        for cap in (1e2, 1e5, 1e8, 1e12):
            Ad_hat, Bd_hat = fit_dynamics(snaps, TruncationPolicy(cap))
            residuals.append(np.linalg.norm(Xp - Ad_hat @ X - Bd_hat @ V))
        assert all(a >= b - 1e-12 for a, b in zip(residuals, residuals[1:]))


class TestFitOutputMap:
    def test_doubling_map(self):
        rng = np.random.default_rng(21)
        X = rng.standard_normal((3, 50))
        Cd = fit_output_map(X, 2.0 * X)
        assert np.max(np.abs(Cd - 2.0 * np.eye(3))) < 1e-12

    def test_recovers_known_map(self):
        rng = np.random.default_rng(22)
        X = rng.standard_normal((4, 100))
        C0 = rng.standard_normal((2, 4))
        Cd = fit_output_map(X, C0 @ X)
        assert np.max(np.abs(Cd - C0)) < 1e-10

    def test_rlc_output_map(self, rlc_split, rlc_dataset):
        train, _ = rlc_split
        idx = [rlc_dataset.index_of("capacitor.v"), rlc_dataset.index_of("capacitor.p.i")]
        snaps = assemble_snapshots(train, idx)
        Cd = fit_output_map(snaps.X, snaps.Y)
        R = RlcParams().R
        assert np.max(np.abs(Cd - np.array([[1.0, 0.0], [0.0, R]]))) < 1e-6

    def test_minimum_norm_property(self):
        rng = np.random.default_rng(23)
        # rank-deficient states: two directions never excited
        basis = rng.standard_normal((4, 2))
        X = basis @ rng.standard_normal((2, 80))
        Y = rng.standard_normal((2, 4)) @ X
        Cd = fit_output_map(X, Y)
        base_res = np.linalg.norm(Y - Cd @ X)
        # any row-null-space direction of X leaves the residual, grows the norm
        _, _, vh = np.linalg.svd(X.T, full_matrices=True)
        null_dir = vh[-1]
        assert np.max(np.abs(X.T @ null_dir)) < 1e-10
        perturbed = Cd + 0.5 * np.outer(np.ones(2), null_dir)
        assert np.linalg.norm(Y - perturbed @ X) == pytest.approx(base_res, abs=1e-9)
        assert np.linalg.norm(perturbed) > np.linalg.norm(Cd)

    def test_column_mismatch(self):
        with pytest.raises(Exception):
            fit_output_map(np.ones((2, 5)), np.ones((1, 4)))


class TestRollout:
    def test_zero_dynamics(self):
        model = make_model(np.zeros((2, 2)), np.zeros((2, 1)), np.eye(2))
        Xh, Yh = rollout(model, np.array([3.0, -1.0]), np.zeros((1, 5)))
        assert np.all(Xh == 0)
        assert np.all(Yh == 0)

    def test_identity_holds_state(self):
        model = make_model(np.eye(2), np.zeros((2, 1)), np.eye(2))
        x0 = np.array([1.5, -2.5])
        Xh, _ = rollout(model, x0, np.zeros((1, 7)))
        assert np.allclose(Xh, x0[:, None])

    def test_matches_naive_loop(self):
        rng = np.random.default_rng(31)
        Ad, Bd, Cd = random_stable_discrete(rng, n=4, m=2, p=3)
        model = make_model(Ad, Bd, Cd)
        x0 = rng.standard_normal(4)
        V = rng.standard_normal((2, 50))
        Xh, Yh = rollout(model, x0, V)
        x = x0.copy()
        for k in range(50):
            x = Ad @ x + Bd @ V[:, k]
            assert np.max(np.abs(Xh[:, k] - x)) < 1e-12
            assert np.max(np.abs(Yh[:, k] - Cd @ x)) < 1e-12

    def test_linearity(self):
        rng = np.random.default_rng(32)
        Ad, Bd, Cd = random_stable_discrete(rng, n=3, m=1, p=2)
        model = make_model(Ad, Bd, Cd)
        x0 = rng.standard_normal(3)
        V = rng.standard_normal((1, 30))
        alpha = 2.75
        X1, Y1 = rollout(model, x0, V)
        X2, Y2 = rollout(model, alpha * x0, alpha * V)
        assert np.allclose(X2, alpha * X1, rtol=1e-12)
        assert np.allclose(Y2, alpha * Y1, rtol=1e-12)

    def test_dimension_mismatch(self):
        model = make_model(np.eye(2), np.zeros((2, 1)), np.eye(2))
        with pytest.raises(ValueError):
            rollout(model, np.ones(3), np.zeros((1, 4)))
        with pytest.raises(ValueError):
            rollout(model, np.ones(2), np.zeros((2, 4)))


class TestC2d:
    def test_zero_dynamics(self):
        B = np.array([[2.0], [1.0]])
        Ad, Bd = c2d_zoh(np.zeros((2, 2)), B, 0.25)
        assert np.allclose(Ad, np.eye(2))
        assert np.allclose(Bd, 0.25 * B)

    def test_scalar_decay(self):
        Ad, _ = c2d_zoh(np.array([[-1.0]]), np.array([[1.0]]), 1.0)
        assert Ad[0, 0] == pytest.approx(np.exp(-1.0), rel=1e-12)

    def test_rlc_matches_eigendecomposition(self):
        params = RlcParams()
        A, B = params.continuous()
        Ad, Bd = c2d_zoh(A, B, params.dt)
        # closed form through diagonalization of the augmented block
        n, m = 2, 1
        block = np.zeros((n + m, n + m))
        block[:n, :n] = A
        block[:n, n:] = B
        w, P = np.linalg.eig(block * params.dt)
        E = (P @ np.diag(np.exp(w)) @ np.linalg.inv(P)).real
        assert np.max(np.abs(Ad - E[:n, :n])) / np.max(np.abs(Ad)) < 1e-10
        assert np.max(np.abs(Bd - E[:n, n:])) / np.max(np.abs(Bd)) < 1e-10

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            c2d_zoh(np.ones((2, 3)), np.ones((2, 1)), 0.1)

    def test_bad_dt(self):
        with pytest.raises(ValueError):
            c2d_zoh(np.eye(2), np.ones((2, 1)), 0.0)


class TestModelIO:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(41)
        Ad, Bd, Cd = random_stable_discrete(rng, n=3, m=2, p=2)
        model = make_model(Ad, Bd, Cd, dt=0.05)
        path = tmp_path / "model.json"
        save_model(model, path)
        back = load_model(path)
        assert np.array_equal(back.Ad, model.Ad)
        assert np.array_equal(back.Bd, model.Bd)
        assert np.array_equal(back.Cd, model.Cd)
        assert back.state_names == model.state_names
        assert back.dt == model.dt

    def test_schema_fields(self, tmp_path):
        model = make_model(np.eye(2) * 0.5, np.ones((2, 1)), np.eye(2))
        path = tmp_path / "model.json"
        save_model(model, path)
        doc = json.loads(path.read_text())
        assert set(doc) == {"dt", "state_names", "input_names", "output_names", "Ad", "Bd", "Cd"}

    def test_validation(self):
        with pytest.raises(ValueError):
            make_model(np.eye(2), np.ones((3, 1)), np.eye(2))
        with pytest.raises(ValueError):
            make_model(np.array([[np.inf, 0], [0, 1.0]]), np.ones((2, 1)), np.eye(2))


def test_fit_model_binds_names(rlc_split, rlc_dataset):
    train, _ = rlc_split
    idx = [rlc_dataset.index_of("capacitor.v"), rlc_dataset.index_of("capacitor.p.i")]
    model = fit_model(train, idx)
    assert model.state_names == ("capacitor.v", "capacitor.p.i")
    assert model.input_names == ("source.v",)
    assert model.output_names == ("monitor.v_C", "monitor.v_R")
    assert model.dt == rlc_dataset.dt
    assert np.all(model.Dd == 0)
