import os

import numpy as np
import pytest

from risnoma import sdp
from risnoma.sdp import SdpProblem, project_psd, solve


def _random_hermitian(rng, n, scale=1.0):
    b = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (b + b.conj().T)


def test_project_psd_idempotent_on_cone():
    rng = np.random.default_rng(0)
    l = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    x = l @ l.conj().T
    assert np.linalg.norm(project_psd(x) - x) <= 1e-10 * np.linalg.norm(x)


def test_project_psd_clamps_eigenvalue():
    out = project_psd(np.diag([1.0, -1.0]).astype(complex))
    assert np.allclose(out, np.diag([1.0, 0.0]), atol=1e-12)


def test_project_psd_is_frobenius_nearest():
    rng = np.random.default_rng(1)
    m = _random_hermitian(rng, 8)
    star = project_psd(m)
    d_star = np.linalg.norm(m - star)
    for _ in range(1000):
        l = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        cand = l @ l.conj().T
        cand *= np.linalg.norm(star) / max(np.linalg.norm(cand), 1e-12)
        assert d_star <= np.linalg.norm(m - cand) + 1e-12
        # also convex combinations near the projection
        t = rng.uniform(0, 0.5)
        mix = (1 - t) * star + t * cand
        assert d_star <= np.linalg.norm(m - mix) + 1e-12


def test_project_psd_rejects_nonfinite():
    bad = np.array([[np.inf, 0], [0, 1.0]], dtype=complex)
    with pytest.raises(ValueError):
        sdp.check_hermitian(bad)


def test_solve_trace_fixed_by_diagonal():
    prob = SdpProblem(objective=np.eye(2, dtype=complex),
                      unit_diag=[(0, 1.0), (1, 1.0)])
    x, stats = solve(prob)
    assert stats.converged
    assert np.trace(x).real == pytest.approx(2.0, abs=1e-5)


def test_solve_indefinite_diag_objective():
    prob = SdpProblem(objective=np.diag([1.0, -1.0]).astype(complex),
                      unit_diag=[(0, 1.0), (1, 1.0)])
    x, stats = solve(prob)
    assert stats.objective == pytest.approx(0.0, abs=1e-5)


def test_solver_output_feasibility_invariants():
    rng = np.random.default_rng(2)
    n = 6
    c = _random_hermitian(rng, n)
    v = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    a = np.outer(v, v.conj())
    prob = SdpProblem(objective=c, ineq_constraints=[(a, 2.0)],
                      unit_diag=[(i, 1.0) for i in range(n)], schur_block=True)
    tol = 1e-6
    x, stats = solve(prob, tol=tol)
    assert stats.converged
    sdp.check_hermitian(x, tol=1e-10)
    w = np.linalg.eigvalsh(x)
    assert w.min() >= -tol * max(1.0, w.max())
    assert np.abs(np.diagonal(x).real - 1.0).max() <= 50 * tol
    assert float(np.vdot(a, x[:n, :n]).real) >= 2.0 - 50 * tol


def test_relaxation_dominance_over_unit_modulus_points():
    rng = np.random.default_rng(3)
    n = 4
    c = _random_hermitian(rng, n)
    v = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    a = np.outer(v, v.conj())
    b = 1.0
    prob = SdpProblem(objective=c, ineq_constraints=[(a, b)],
                      unit_diag=[(i, 1.0) for i in range(n)], schur_block=True)
    x, stats = solve(prob, tol=1e-8)
    assert stats.converged
    count = 0
    for _ in range(1000):
        psi = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
        lift = np.outer(psi, psi.conj())
        if float(np.vdot(a, lift).real) < b:
            continue
        count += 1
        lifted_obj = float(np.vdot(c, lift).real)
        assert lifted_obj <= stats.objective + 1e-5 * (1 + abs(stats.objective))
    assert count > 10


def test_solver_determinism():
    rng = np.random.default_rng(4)
    n = 5
    prob = SdpProblem(objective=_random_hermitian(rng, n),
                      unit_diag=[(i, 1.0) for i in range(n)])
    x1, s1 = solve(prob)
    x2, s2 = solve(prob)
    assert np.array_equal(x1, x2)
    assert s1 == s2


def test_infeasible_detection():
    # diag fixes the trace at 2; demanding trace >= 100 is impossible
    prob = SdpProblem(objective=np.eye(2, dtype=complex),
                      ineq_constraints=[(np.eye(2, dtype=complex), 100.0)],
                      unit_diag=[(0, 1.0), (1, 1.0)])
    _, stats = solve(prob, max_iter=3000)
    assert not stats.converged
    assert stats.infeasible


def test_residual_csv_dump(tmp_path):
    prob = SdpProblem(objective=np.eye(2, dtype=complex),
                      unit_diag=[(0, 1.0), (1, 1.0)])
    path = os.fspath(tmp_path / "resid.csv")
    solve(prob, residual_log_path=path)
    lines = open(path).read().strip().splitlines()
    assert lines[0] == "iteration,primal,dual,rho"
    assert len(lines) > 1


def test_problem_validation():
    with pytest.raises(ValueError):
        SdpProblem(objective=np.array([[0.0, 1.0], [0.0, 0.0]],
                                      dtype=complex)).validate()
    with pytest.raises(ValueError):
        SdpProblem(objective=np.eye(2, dtype=complex),
                   unit_diag=[(5, 1.0)]).validate()
