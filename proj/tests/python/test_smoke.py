import numpy as np
import pytest

import evoeq


def test_schur_components_of_coupled_operator():
    m = np.array([[2.0, 1.0], [1.0, 2.0]], dtype=complex)
    dec = evoeq.Decomposition.coordinate_split(1, 1)
    q = evoeq.schur_components(m, dec)
    assert q.a[0, 0] == pytest.approx(0.5)
    assert q.b[0, 0] == pytest.approx(0.5)
    assert q.c[0, 0] == pytest.approx(0.5)
    assert q.d[0, 0] == pytest.approx(1.5)
    back = evoeq.schur_reconstruct(q, dec)
    assert np.linalg.norm(back - m) < 1e-12


def test_alpha_fit_matches_hand_computation():
    m = np.array([[2.0, 1.0], [1.0, 2.0]], dtype=complex)
    dec = evoeq.Decomposition.coordinate_split(1, 1)
    alpha = evoeq.alpha_fit(m, dec)
    assert alpha.a00 == pytest.approx(1.5)
    assert alpha.a11 == pytest.approx(2.0)
    assert alpha.a01 == pytest.approx(0.5)
    assert alpha.a10 == pytest.approx(0.5)


def test_alpha_fit_rejects_indefinite_operator():
    m = np.diag([1.0, -1.0]).astype(complex)
    dec = evoeq.Decomposition.coordinate_split(1, 1)
    with pytest.raises(evoeq.MembershipError):
        evoeq.alpha_fit(m, dec)


def test_material_law_eval_and_derivative():
    law = evoeq.MaterialLaw.laurent(
        0.0,
        [(0, np.diag([1.0, 0.0]).astype(complex)),
         (-1, np.diag([0.0, 1.0]).astype(complex))],
        "heat",
    )
    value = law.eval(2.0 + 0.0j)
    assert value[0, 0] == pytest.approx(1.0)
    assert value[1, 1] == pytest.approx(0.5)
    deriv = law.derivative(2.0 + 0.0j)
    assert deriv[1, 1] == pytest.approx(-0.25)


def test_picard_solver_round_trip():
    grid = evoeq.TimeGrid(t0=0.0, dt=1.0 / 32.0, n_steps=1024, nu=1.0)
    law = evoeq.MaterialLaw.constant(np.eye(1, dtype=complex))
    a = np.zeros((1, 1), dtype=complex)
    t = np.array([grid.time(j) for j in range(grid.n_steps)])
    values = np.exp(-0.5 * ((t - 12.0) / 1.5) ** 2).astype(complex)[:, None]
    f = evoeq.WeightedSignal(grid, values)
    u = evoeq.evo_solve(law, a, grid, f)
    residual = evoeq.td_apply(u)
    diff = evoeq.WeightedSignal(grid, residual.values - f.values)
    assert evoeq.weighted_norm(diff) / evoeq.weighted_norm(f) < 1e-9
    assert evoeq.weighted_norm(u) <= evoeq.weighted_norm(f) + 1e-9


def test_wot_gap_zero_for_equal_operators():
    probes = evoeq.ProbeSet.make(4, 4)
    t = np.random.default_rng(0).normal(size=(4, 4)).astype(complex)
    report = evoeq.wot_gap(t, t, probes)
    assert report.sup_gap == 0.0


def test_sr_operator_is_identity_at_r0():
    grid = evoeq.DomainGrid(dim=1, extent=[1.0, 1.0], n_cells=[32, 1])
    op = evoeq.make_sr_operator(grid, 0.0)
    assert np.linalg.norm(op.dense - np.eye(op.dense.shape[0])) < 1e-12


def test_suites_pass():
    results = evoeq.run_all_suites(seed=7, instances=25, max_dim=8)
    assert all(r.passed for r in results)
