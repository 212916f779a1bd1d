"""Nonnegative-matrix realizations of spectra and their channel lifts.

The route to a channel goes target spectrum -> nonnegative matrix M with that
spectrum -> column-stochastic form S = X M X^-1 (X = diag of the left Perron
vector) -> entanglement-breaking channel T(rho) = sum_ij S_ij <j|rho|j>
|i><i|.  The lifted channel has spectrum spec(S) plus N(N-1) zeros and a
diagonal Choi matrix, so its CP margin is exactly min_ij S_ij.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Channel
from .errors import InfeasibleError, NumericalError, SynthesisError
from .linalg import (
    SPECTRUM_MATCH_TOL,
    as_complex_values,
    as_matrix,
    companion_matrix,
    eig_multiset,
    multiset_match,
    symmetrize_conjugates,
)

MOMENT_HORIZON = 64
PERRON_CAP = 10**5
PERRON_TOL = 1e-12
CHARPOLY_RESIDUAL_TOL = 1e-10
SPECTRUM_FIT_TOL = 1e-7


@dataclass(frozen=True)
class MomentReport:
    """Finite-horizon screening of the power sums mu_k = sum lambda^k.

    Necessary conditions only: passing says nothing about sufficiency, and
    ``horizon`` records how far the screen looked.  ``first_violation`` is the
    smallest k with mu_k < -1e-10; ``mucond2_violation`` is a pair (m, km)
    with mu_m > 0 but mu_km not; ``jll_violations`` maps a dimension d to the
    first (k, m) with mu_k^m > d^(m-1) mu_km.
    """

    mu: tuple[float, ...]
    horizon: int
    mucond1_ok: bool
    mucond2_ok: bool
    jll_ok: dict[int, bool]
    first_violation: int | None
    mucond2_violation: tuple[int, int] | None
    jll_violations: dict[int, tuple[int, int]]
    max_imag: float


def moment_report(values, horizon: int = MOMENT_HORIZON, d_list=()) -> MomentReport:
    vals = np.array(as_complex_values(values))
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    powers = np.ones_like(vals)
    mu = np.empty(horizon)
    max_imag = 0.0
    for k in range(horizon):
        powers = powers * vals
        s = powers.sum()
        max_imag = max(max_imag, abs(s.imag))
        mu[k] = s.real

    first_violation = None
    for k in range(horizon):
        if mu[k] < -1e-10:
            first_violation = k + 1
            break
    mucond1_ok = first_violation is None and max_imag <= 1e-10 * max(1.0, float(np.abs(mu).max()))

    mucond2_violation = None
    for m in range(1, horizon + 1):
        if mu[m - 1] <= 1e-10:
            continue
        for k in range(2, horizon // m + 1):
            if mu[k * m - 1] <= 1e-10:
                mucond2_violation = (m, k * m)
                break
        if mucond2_violation:
            break

    jll_ok: dict[int, bool] = {}
    jll_violations: dict[int, tuple[int, int]] = {}
    for d in d_list:
        ok = True
        for m in range(2, horizon + 1):
            for k in range(1, horizon // m + 1):
                lhs = mu[k - 1] ** m
                rhs = d ** (m - 1) * mu[k * m - 1]
                if lhs > rhs + 1e-8 * (1.0 + abs(lhs) + abs(rhs)):
                    jll_violations[d] = (k, m)
                    ok = False
                    break
            if not ok:
                break
        jll_ok[d] = ok

    return MomentReport(
        mu=tuple(mu.tolist()),
        horizon=horizon,
        mucond1_ok=mucond1_ok,
        mucond2_ok=mucond2_violation is None,
        jll_ok=jll_ok,
        first_violation=first_violation,
        mucond2_violation=mucond2_violation,
        jll_violations=jll_violations,
        max_imag=max_imag,
    )


@dataclass(frozen=True)
class NonnegRealization:
    """Nonnegative matrix M, stochastic similarity S, and the left Perron vector."""

    M: np.ndarray
    S: np.ndarray
    left_perron: np.ndarray
    provenance: str


def _strongly_connected(adj: np.ndarray) -> bool:
    n = adj.shape[0]

    def reach(mat):
        seen = {0}
        stack = [0]
        while stack:
            i = stack.pop()
            for j in range(n):
                if mat[i, j] and j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == n

    return reach(adj) and reach(adj.T)


def to_stochastic(
    m,
    max_iter: int = PERRON_CAP,
    tol: float = PERRON_TOL,
    provenance: str = "direct",
) -> NonnegRealization:
    """Column-stochastic similarity S = X M X^-1 via the left Perron vector.

    The input must be entrywise nonnegative with spectral radius 1 (within
    1e-8; the caller rescales).  Column-stochastic inputs short-circuit to
    S = M with a uniform left vector.  The Perron vector comes from power
    iteration on (M^T + I)/2, which has the same fixed vector but converges
    even when M is imprimitive; reducible inputs fail with advice to perturb.
    """
    mat = np.real_if_close(as_matrix(m, square=True, name="M"))
    if np.abs(mat.imag).max() > 1e-12:
        raise ValueError("M must be real")
    mat = mat.real.copy()
    n = mat.shape[0]
    if mat.min() < -1e-12:
        raise ValueError(f"M has negative entry {mat.min():.3e}")
    mat[mat < 0] = 0.0
    radius = eig_multiset(mat).spectral_radius()
    if abs(radius - 1.0) > 1e-8:
        raise ValueError(f"spectral radius {radius} must be 1 within 1e-8 (rescale first)")

    colsums = mat.sum(axis=0)
    if np.max(np.abs(colsums - 1.0)) <= 1e-10:
        return NonnegRealization(mat, mat, np.ones(n) / n, provenance)

    if not _strongly_connected(mat > 1e-14):
        raise NumericalError(
            "M is reducible: no positive Perron similarity; consider an eps-perturbation "
            "of the zero entries"
        )
    a = (mat.T + np.eye(n)) / 2.0
    left = np.ones(n) / n
    converged = False
    for it in range(max_iter):
        nxt = a @ left
        nxt = nxt / nxt.sum()
        delta = float(np.abs(nxt - left).max())
        left = nxt
        if delta <= tol:
            # keep polishing until the stochastic defect is small too
            s_try = (left[:, None] * mat) / left[None, :]
            if np.max(np.abs(s_try.sum(axis=0) - 1.0)) <= 1e-11 or it == max_iter - 1:
                converged = True
                break
    if not converged:
        raise NumericalError("Perron power iteration did not converge within the cap")
    if left.min() <= 1e-10:
        raise NumericalError(
            f"left Perron vector has entry {left.min():.3e} <= 1e-10 (numerically reducible); "
            "consider an eps-perturbation"
        )
    s = (left[:, None] * mat) / left[None, :]
    defect = float(np.max(np.abs(s.sum(axis=0) - 1.0)))
    if defect > 1e-10:
        raise NumericalError(f"stochastic form has column-sum defect {defect:.3e}")
    return NonnegRealization(mat, s, left, provenance)


def suleimanova_companion(values, tol: float = 1e-12) -> NonnegRealization:
    """Companion realization for spectra {1} cup nonpositive reals, sum >= 0.

    For such spectra every non-leading coefficient of prod (x - lambda_i) is
    nonpositive, so the companion matrix is nonnegative; with 1 in the
    spectrum it is already column-stochastic.
    """
    vals = as_complex_values(values)
    reals = []
    for v in vals:
        if abs(v.imag) > tol:
            raise ValueError("spectrum must be real")
        reals.append(v.real)
    ones = [x for x in reals if x > tol]
    if len(ones) != 1 or abs(ones[0] - 1.0) > 1e-9:
        raise ValueError("spectrum must contain exactly one positive element, equal to 1")
    if sum(reals) < -1e-12:
        raise InfeasibleError(f"trace sum {sum(reals):.3e} is negative; no nonneg realization")
    coeffs = np.atleast_1d(np.real_if_close(np.poly(np.array(reals))))
    if coeffs[1:].max() > tol:
        # Cannot happen for these spectra; defensive escalation hook.
        raise NumericalError(
            f"companion coefficient {coeffs[1:].max():.3e} positive; escalate to the optimizer"
        )
    comp = companion_matrix(coeffs).real
    comp[np.abs(comp) < 1e-15] = 0.0
    return to_stochastic(comp, provenance="companion")


def _char_coeffs(m: np.ndarray) -> np.ndarray:
    """Faddeev-LeVerrier characteristic coefficients [c1..cN] of x^N + c1 x^(N-1) + ..."""
    n = m.shape[0]
    out = np.empty(n)
    mk = m.copy()
    for k in range(1, n + 1):
        ck = -np.trace(mk) / k
        out[k - 1] = ck
        if k < n:
            mk = m @ (mk + ck * np.eye(n))
    return out


def _numerical_jacobian(fun, x: np.ndarray, r0: np.ndarray) -> np.ndarray:
    jac = np.empty((r0.shape[0], x.shape[0]))
    for j in range(x.shape[0]):
        h = 1e-6 * max(abs(x[j]), 1.0)
        xp = x.copy()
        xp[j] += h
        jac[:, j] = (fun(xp) - r0) / h
    return jac


def _levenberg_marquardt(fun, x0: np.ndarray, max_iter: int = 250, cost_tol: float = 1e-28):
    x = x0.copy()
    r = fun(x)
    cost = float(r @ r)
    mu = 1e-3
    for _ in range(max_iter):
        if cost < cost_tol:
            break
        jac = _numerical_jacobian(fun, x, r)
        jtj = jac.T @ jac
        jtr = jac.T @ r
        if float(np.linalg.norm(jtr)) < 1e-16:
            break
        accepted = False
        for _ in range(40):
            try:
                step = np.linalg.solve(jtj + mu * np.eye(x.shape[0]), -jtr)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(jtj + mu * np.eye(x.shape[0]), -jtr, rcond=None)[0]
            xn = x + step
            rn = fun(xn)
            cn = float(rn @ rn)
            if cn < cost:
                x, r, cost = xn, rn, cn
                mu = max(mu * 0.3, 1e-14)
                accepted = True
                break
            mu *= 5.0
            if mu > 1e14:
                break
        if not accepted:
            break
    return x, r, cost


def nniep_optimize(
    values,
    size: int,
    restarts: int = 50,
    seed: int = 0,
    strict_positive: bool = False,
    floor: float = 0.0,
) -> NonnegRealization:
    """Search for a column-stochastic nonnegative matrix with a target spectrum.

    Entries are parameterized as M_ij = q_ij^2 (+ floor when strict_positive)
    and a damped least-squares descent fits the characteristic-polynomial
    coefficients of M to those of prod (x - lambda_i) * x^(size - n), jointly
    with the column-sum constraints so the optimum is directly stochastic.
    Each restart draws a fresh seeded start; entries that collapse to zero are
    frozen and the rest re-polished to restore fast convergence.  Success
    needs coefficient residual < 1e-10 and a spectrum match within 1e-7;
    otherwise :class:`SynthesisError` (existence is not refuted).
    """
    vals = symmetrize_conjugates(as_complex_values(values))
    n = len(vals)
    if size < n:
        raise ValueError(f"size {size} smaller than spectrum ({n})")
    if strict_positive and floor <= 0.0:
        floor = 1e-3 / size
    delta = floor if strict_positive else 0.0
    roots = np.concatenate([np.array(vals), np.zeros(size - n)])
    target = np.atleast_1d(np.poly(roots))
    if np.abs(np.imag(target)).max() > 1e-9:
        raise ValueError("target spectrum is not conjugation closed")
    target = np.real(target)[1:]

    def matrix_of(q: np.ndarray) -> np.ndarray:
        return q.reshape(size, size) ** 2 + delta

    def residual_of(q: np.ndarray) -> np.ndarray:
        m = matrix_of(q)
        return np.concatenate([_char_coeffs(m) - target, m.sum(axis=0) - 1.0])

    rng = np.random.default_rng(seed)
    last_failure = "no restart converged"
    for attempt in range(restarts):
        # alternate dense simplex, sparse simplex, and Birkhoff-extreme starts
        kind = attempt % 3
        if kind == 2 and not strict_positive:
            # exact zeros so the descent stays on the sparse face
            m0 = np.eye(size)[rng.permutation(size)]
            q0 = np.sqrt(m0).reshape(-1)
        else:
            alpha = 1.0 if kind == 0 else 0.3
            m0 = rng.dirichlet(np.full(size, alpha), size=size).T
            q0 = np.sqrt(np.maximum(m0 - delta, 1e-6)).reshape(-1)
        q, r, cost = _levenberg_marquardt(residual_of, q0)
        # freeze collapsed entries at exact zero and re-polish the rest
        for _ in range(2):
            mask = np.abs(q) < 1e-4
            if delta > 0.0 or not mask.any() or mask.all():
                break
            frozen = q.copy()
            frozen[mask] = 0.0
            free = ~mask

            def masked_residual(x: np.ndarray) -> np.ndarray:
                full = frozen.copy()
                full[free] = x
                return residual_of(full)

            x, r, cost = _levenberg_marquardt(masked_residual, q[free])
            qn = frozen.copy()
            qn[free] = x
            if float(np.max(np.abs(qn - q))) == 0.0:
                q = qn
                break
            q = qn
        m = matrix_of(q)
        char_res = float(np.linalg.norm(_char_coeffs(m) - target))
        col_res = float(np.max(np.abs(m.sum(axis=0) - 1.0)))
        if char_res >= CHARPOLY_RESIDUAL_TOL or col_res > 1e-11:
            last_failure = f"residual {char_res:.2e} / column defect {col_res:.2e}"
            continue
        if not multiset_match(eig_multiset(m).values, tuple(roots), SPECTRUM_FIT_TOL).matched:
            last_failure = "converged matrix spectrum does not match the target"
            continue
        try:
            realization = to_stochastic(m, provenance="optimizer")
        except (NumericalError, ValueError) as exc:
            last_failure = f"stochastic form failed: {exc}"
            continue
        return realization
    raise SynthesisError(
        f"no nonnegative realization found in {restarts} restarts ({last_failure}); "
        "existence is not refuted"
    )


def lift_to_channel(s) -> Channel:
    """Entanglement-breaking lift of a column-stochastic matrix.

    Kraus operators are sqrt(S_ij) |i><j| over the nonzero entries; the Choi
    matrix is diagonal with entries S_ij, so the CP margin equals min S_ij and
    the channel spectrum is spec(S) together with N(N-1) zeros.
    """
    mat = as_matrix(s, square=True, name="S")
    if np.abs(mat.imag).max() > 1e-12:
        raise ValueError("S must be real")
    mat = mat.real
    n = mat.shape[0]
    if mat.min() < -1e-12:
        raise ValueError(f"S has negative entry {mat.min():.3e}")
    if np.max(np.abs(mat.sum(axis=0) - 1.0)) > 1e-9:
        raise ValueError("S columns must sum to 1")
    kraus = []
    for i in range(n):
        for j in range(n):
            if mat[i, j] > 0.0:
                k = np.zeros((n, n), dtype=complex)
                k[i, j] = np.sqrt(mat[i, j])
                kraus.append(k)
    if not kraus:
        raise ValueError("S has no positive entries")
    return Channel(n, kraus=kraus)
