"""Small dense SDP solver for Hermitian trace-linear programs.

Maximizes ``Tr(C X)`` subject to trace inequalities ``Tr(A_m X) >= b_m``,
unit-diagonal equalities, the PSD cone, and optionally a bordered block
with a unit corner (the Schur-complement surrogate for rank one).

The method is over-relaxed ADMM: one step projects onto the affine
constraint set (a linearly-constrained least-squares solve with the
objective folded in), the other projects onto the PSD cone through a real
symmetric eigendecomposition of the doubled-dimension embedding
``[Re, -Im; Im, Re]``.  Sized for n <= 65; everything is dense.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SdpError(RuntimeError):
    pass


@dataclass
class SdpProblem:
    """Problem data over Hermitian matrices of dimension ``n``.

    When ``schur_block`` is set the data live on the leading n x n block
    and the solver augments the variable with one bordered column plus a
    unit corner; the border is otherwise unconstrained.
    """

    objective: np.ndarray
    ineq_constraints: list[tuple[np.ndarray, float]] = field(default_factory=list)
    unit_diag: list[tuple[int, float]] = field(default_factory=list)
    schur_block: bool = False

    @property
    def n(self) -> int:
        return self.objective.shape[0]

    def validate(self) -> None:
        n = self.n
        check_hermitian(self.objective, "objective")
        for m, (a, _) in enumerate(self.ineq_constraints):
            if a.shape != (n, n):
                raise ValueError(f"inequality {m} has wrong dimension")
            check_hermitian(a, f"inequality {m}")
        for k, _ in self.unit_diag:
            if not 0 <= k < n:
                raise ValueError(f"diagonal index {k} out of range")


@dataclass(frozen=True)
class SolveStats:
    iterations: int
    primal_residual: float
    dual_residual: float
    converged: bool
    infeasible: bool
    objective: float


def check_hermitian(m: np.ndarray, name: str = "matrix", tol: float = 1e-12) -> None:
    scale = max(1.0, float(np.abs(m).max()) if m.size else 0.0)
    if not np.all(np.isfinite(m.view(float))):
        raise ValueError(f"{name} has non-finite entries")
    if np.abs(m - m.conj().T).max() > tol * scale:
        raise ValueError(f"{name} is not Hermitian within {tol}")


def _embed_real(m: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
    n = m.shape[0]
    if out is None:
        out = np.empty((2 * n, 2 * n))
    a, b = m.real, m.imag
    out[:n, :n] = a
    out[n:, n:] = a
    out[:n, n:] = -b
    out[n:, :n] = b
    return out


def project_psd(m: np.ndarray, _buf: np.ndarray | None = None) -> np.ndarray:
    """Frobenius-nearest PSD matrix via the real symmetric embedding."""
    m = np.asarray(m, dtype=complex)
    m = 0.5 * (m + m.conj().T)
    n = m.shape[0]
    r = _embed_real(m, _buf)
    try:
        w, v = np.linalg.eigh(r)
    except np.linalg.LinAlgError as exc:
        raise SdpError(
            f"eigendecomposition failed: n={n}, fro={np.linalg.norm(m):.3e}, "
            f"max={np.abs(m).max():.3e}") from exc
    np.maximum(w, 0.0, out=w)
    rp = (v * w) @ v.T
    a = rp[:n, :n]
    a = a + rp[n:, n:]
    b = rp[n:, :n] - rp[:n, n:]
    x = 0.5 * (a + 1j * b)
    return 0.5 * (x + x.conj().T)


class _HermitianVectorizer:
    """Isometric real coordinates for Hermitian matrices of dimension n."""

    def __init__(self, n: int):
        self.n = n
        self.iu, self.ju = np.triu_indices(n, k=1)
        self.dim = n + 2 * self.iu.size
        self._sqrt2 = np.sqrt(2.0)
        self._pos = {(int(i), int(j)): idx
                     for idx, (i, j) in enumerate(zip(self.iu, self.ju))}

    def offdiag_coords(self, i: int, j: int) -> tuple[int, int]:
        """(real, imaginary) coordinate indices of off-diagonal entry (i, j)."""
        idx = self._pos[(min(i, j), max(i, j))]
        return self.n + idx, self.n + self.iu.size + idx

    def to_vec(self, m: np.ndarray) -> np.ndarray:
        off = m[self.iu, self.ju]
        return np.concatenate([m.diagonal().real,
                               self._sqrt2 * off.real,
                               self._sqrt2 * off.imag])

    def to_mat(self, v: np.ndarray) -> np.ndarray:
        n, k = self.n, self.iu.size
        m = np.zeros((n, n), dtype=complex)
        off = (v[n:n + k] + 1j * v[n + k:]) / self._sqrt2
        m[self.iu, self.ju] = off
        m += m.conj().T
        m[np.diag_indices(n)] = v[:n]
        return m


def _augment(prob: SdpProblem):
    """Apply the bordered-block augmentation if requested.

    The border column is otherwise unconstrained (zero always satisfies the
    block PSD condition), which leaves a flat solution manifold; it is
    pinned at zero, which keeps the feasible set of the leading block
    unchanged and the iteration well conditioned.
    """
    if not prob.schur_block:
        return prob.objective, prob.ineq_constraints, list(prob.unit_diag), []
    n = prob.n
    obj = np.zeros((n + 1, n + 1), dtype=complex)
    obj[:n, :n] = prob.objective
    ineq = []
    for a, b in prob.ineq_constraints:
        a_full = np.zeros((n + 1, n + 1), dtype=complex)
        a_full[:n, :n] = a
        ineq.append((a_full, b))
    diag = list(prob.unit_diag) + [(n, 1.0)]
    pinned = [(i, n) for i in range(n)]
    return obj, ineq, diag, pinned


def solve(prob: SdpProblem, tol: float = 1e-6, max_iter: int = 5000,
          initial: np.ndarray | None = None, over_relax: float = 1.6,
          residual_log_path: str | None = None) -> tuple[np.ndarray, SolveStats]:
    """Run the splitting iteration; returns (X, stats).

    X has the augmented dimension when the problem carries the bordered
    block.  Deterministic for fixed inputs.  ``residual_log_path`` dumps a
    per-iteration residual CSV when set.
    """
    prob.validate()
    obj, ineq, diag, pinned = _augment(prob)
    n = obj.shape[0]
    vec = _HermitianVectorizer(n)
    n_slack = len(ineq)
    dim = vec.dim + n_slack

    c_full = np.zeros(dim)
    c_full[:vec.dim] = vec.to_vec(obj)
    c_scale = np.linalg.norm(c_full)
    c_unit = c_full / c_scale if c_scale > 0 else c_full

    rows = []
    rhs = []
    for k, val in diag:
        row = np.zeros(dim)
        row[k] = 1.0  # diagonal reals lead the vectorization
        rows.append(row)
        rhs.append(float(val))
    for i, j in pinned:
        for coord in vec.offdiag_coords(i, j):
            row = np.zeros(dim)
            row[coord] = 1.0
            rows.append(row)
            rhs.append(0.0)
    for m, (a, b) in enumerate(ineq):
        # equilibrate so the slack column carries weight comparable to the
        # matrix block (otherwise the slack converges by a slow crawl)
        mu = float(np.linalg.norm(a))
        mu = mu if mu > 0 else 1.0
        row = np.zeros(dim)
        row[:vec.dim] = vec.to_vec(a) / mu
        row[vec.dim + m] = -1.0
        rows.append(row)
        rhs.append(float(b) / mu)
    mat = np.asarray(rows)
    rhs = np.asarray(rhs)
    if mat.size:
        norms = np.linalg.norm(mat, axis=1)
        norms[norms == 0] = 1.0
        mat = mat / norms[:, None]
        rhs = rhs / norms
        gram = mat @ mat.T
        gram[np.diag_indices_from(gram)] += 1e-12
        gram_inv = np.linalg.inv(gram)
        mat_t = np.ascontiguousarray(mat.T)

    def affine_project(v: np.ndarray) -> np.ndarray:
        if not mat.size:
            return v
        y = gram_inv @ (mat @ v - rhs)
        return v - mat_t @ y

    embed_buf = np.empty((2 * n, 2 * n))

    def cone_project(v: np.ndarray) -> np.ndarray:
        out = np.empty_like(v)
        out[:vec.dim] = vec.to_vec(project_psd(vec.to_mat(v[:vec.dim]),
                                               _buf=embed_buf))
        out[vec.dim:] = np.maximum(v[vec.dim:], 0.0)
        return out

    z = np.zeros(dim)
    if initial is None:
        # identity start: satisfies the diagonal rows and the PSD cone
        z[:vec.dim] = vec.to_vec(np.eye(n, dtype=complex))
    else:
        init = np.asarray(initial, dtype=complex)
        if init.shape == (prob.n, prob.n) and prob.schur_block:
            padded = np.zeros((n, n), dtype=complex)
            padded[:prob.n, :prob.n] = init
            padded[n - 1, n - 1] = 1.0
            init = padded
        z[:vec.dim] = vec.to_vec(0.5 * (init + init.conj().T))
    u = np.zeros(dim)

    rho = 1.0
    alpha = over_relax
    sqrt_dim = np.sqrt(dim)
    log_rows = []
    primal = dual = np.inf
    converged = False
    it = 0
    stall_window: list[float] = []
    for it in range(1, max_iter + 1):
        x = affine_project(z - u + c_unit / rho)
        x_relaxed = alpha * x + (1.0 - alpha) * z
        z_new = cone_project(x_relaxed + u)
        u = u + x_relaxed - z_new
        primal = float(np.linalg.norm(x - z_new))
        dual = float(rho * np.linalg.norm(z_new - z))
        z = z_new
        eps_pri = sqrt_dim * tol + tol * max(float(np.linalg.norm(x)),
                                             float(np.linalg.norm(z)))
        eps_dual = sqrt_dim * tol + tol * float(rho * np.linalg.norm(u))
        if residual_log_path is not None:
            log_rows.append((it, primal, dual, rho))
        if primal <= eps_pri and dual <= eps_dual:
            converged = True
            break
        stall_window.append(primal / max(eps_pri, 1e-300))
        if it % 50 == 0:
            if primal > 10.0 * dual and rho < 1e4:
                rho *= 2.0
                u /= 2.0
            elif dual > 10.0 * primal and rho > 1e-4:
                rho /= 2.0
                u *= 2.0

    infeasible = False
    if not converged and len(stall_window) >= 200:
        half = len(stall_window) // 2
        early = min(stall_window[half // 2:half])
        late = min(stall_window[half:])
        if late > 0.99 * early and late > 100.0:
            infeasible = True
    if mat.size:
        affine_viol = float(np.abs(mat @ z - rhs).max())
        if not converged and affine_viol > max(1e-3, 100.0 * tol):
            infeasible = True

    if residual_log_path is not None:
        with open(residual_log_path, "w", encoding="utf-8") as fh:
            fh.write("iteration,primal,dual,rho\n")
            for row in log_rows:
                fh.write(f"{row[0]},{row[1]!r},{row[2]!r},{row[3]!r}\n")

    x_mat = vec.to_mat(z[:vec.dim])
    objective = float(np.real(np.trace(obj @ x_mat)))
    stats = SolveStats(iterations=it, primal_residual=primal,
                       dual_residual=dual, converged=converged,
                       infeasible=infeasible, objective=objective)
    return x_mat, stats
