"""Linear maps on d x d matrices in Kraus, superoperator, and Choi form.

Conventions
-----------
The superoperator is written in the matrix-unit basis with index pairs
flattened row-major: ``That[(k, l), (i, j)] = <k| T(|i><j|) |l>`` where the
row index is ``k*d + l`` and the column index ``i*d + j``.  With the row-major
vectorization ``vec(X) = X.reshape(-1)`` this gives ``That @ vec(X) =
vec(T(X))`` and, for Kraus operators ``K_m``, ``That = sum_m kron(K_m,
conj(K_m))``.

The Choi matrix is ``C = (T otimes id)(|Om><Om|)`` with the unnormalized
maximally entangled vector ``|Om> = sum_i |ii>``; it is the reshuffle
``C[(a, i), (b, j)] = That[(a, b), (i, j)]``, an involution.

The classical submatrix ``S_ij = <i| T(|j><j|) |i>`` is column-stochastic for
positive trace-preserving maps: columns sum to one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import NotCompletelyPositive, NumericalError
from .linalg import (
    HERMITICITY_TOL,
    PSD_MARGIN_TOL,
    SPECTRUM_MATCH_TOL,
    SpectrumMultiset,
    as_matrix,
    eig_multiset,
    herm_eigensystem,
    multiset_match,
)

KRAUS_CUTOFF = 1e-10
MOMENT_BUDGET = 10**6


def _vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x).reshape(-1)


def _unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape(d, d)


def kraus_to_superop(kraus: list[np.ndarray]) -> np.ndarray:
    return sum(np.kron(k, k.conj()) for k in kraus)


def kraus_to_choi(kraus: list[np.ndarray]) -> np.ndarray:
    d = kraus[0].shape[0]
    c = np.zeros((d * d, d * d), dtype=complex)
    for k in kraus:
        v = _vec(k)
        c += np.outer(v, v.conj())
    return c


def reshuffle(m: np.ndarray, d: int) -> np.ndarray:
    """Superop <-> Choi basis change; applying it twice is the identity."""
    return m.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)


def choi_to_kraus(choi: np.ndarray, d: int, cutoff: float = KRAUS_CUTOFF) -> list[np.ndarray]:
    """Kraus operators from the Choi eigensystem.

    Eigenvalues below ``cutoff`` (relative to the trace) are dropped; negative
    eigenvalues beyond the cutoff mean the map is not completely positive.
    """
    w, v = herm_eigensystem(choi)
    scale = max(1.0, abs(float(np.trace(choi).real)))
    if w[0] < -cutoff * scale:
        raise NotCompletelyPositive(
            f"Choi matrix has negative eigenvalue {w[0]:.3e}; no Kraus decomposition"
        )
    ops = []
    for wi, vi in zip(w, v.T):
        if wi > cutoff * scale:
            ops.append(np.sqrt(wi) * _unvec(vi, d))
    if not ops:
        # the zero map still gets one (zero) Kraus operator for shape sanity
        ops.append(np.zeros((d, d), dtype=complex))
    return ops


class Channel:
    """A linear map on M_d held in one of three representations.

    Conversion results are cached write-once; the stored arrays are marked
    read-only.  A ``Channel`` is just a container: nothing here assumes the
    map is CPTP.  Use :func:`verify` for that.
    """

    def __init__(self, d: int, *, kraus=None, superop=None, choi=None):
        if d < 1:
            raise ValueError("dimension must be at least 1")
        given = [x is not None for x in (kraus, superop, choi)]
        if sum(given) != 1:
            raise ValueError("exactly one representation must be provided")
        self._d = int(d)
        self._kraus = None
        self._superop = None
        self._choi = None
        if kraus is not None:
            ops = [as_matrix(k, square=True, name="Kraus operator") for k in kraus]
            if not ops:
                raise ValueError("need at least one Kraus operator")
            for k in ops:
                if k.shape[0] != d:
                    raise ValueError(f"Kraus operator has dimension {k.shape[0]}, expected {d}")
                k.setflags(write=False)
            self._kraus = ops
        elif superop is not None:
            s = as_matrix(superop, square=True, name="superoperator")
            if s.shape[0] != d * d:
                raise ValueError(f"superoperator must be {d * d} x {d * d}")
            s.setflags(write=False)
            self._superop = s
        else:
            c = as_matrix(choi, square=True, name="Choi matrix")
            if c.shape[0] != d * d:
                raise ValueError(f"Choi matrix must be {d * d} x {d * d}")
            c.setflags(write=False)
            self._choi = c

    @classmethod
    def from_kraus(cls, kraus, d: int | None = None) -> "Channel":
        ops = list(kraus)
        if not ops:
            raise ValueError("need at least one Kraus operator")
        dim = d if d is not None else np.asarray(ops[0]).shape[0]
        return cls(dim, kraus=ops)

    @classmethod
    def from_superop(cls, superop) -> "Channel":
        s = as_matrix(superop, square=True, name="superoperator")
        d = int(round(np.sqrt(s.shape[0])))
        if d * d != s.shape[0]:
            raise ValueError(f"superoperator side {s.shape[0]} is not a perfect square")
        return cls(d, superop=s)

    @classmethod
    def from_choi(cls, choi) -> "Channel":
        c = as_matrix(choi, square=True, name="Choi matrix")
        d = int(round(np.sqrt(c.shape[0])))
        if d * d != c.shape[0]:
            raise ValueError(f"Choi side {c.shape[0]} is not a perfect square")
        return cls(d, choi=c)

    @property
    def d(self) -> int:
        return self._d

    @property
    def native_repr(self) -> str:
        if self._kraus is not None:
            return "kraus"
        if self._superop is not None:
            return "superop"
        return "choi"

    @property
    def superop(self) -> np.ndarray:
        if self._superop is None:
            if self._kraus is not None:
                s = kraus_to_superop(self._kraus)
            else:
                s = reshuffle(self._choi, self._d)
            s.setflags(write=False)
            self._superop = s
        return self._superop

    @property
    def choi(self) -> np.ndarray:
        if self._choi is None:
            if self._kraus is not None:
                c = kraus_to_choi(self._kraus)
            else:
                c = reshuffle(self._superop, self._d)
            c.setflags(write=False)
            self._choi = c
        return self._choi

    @property
    def kraus(self) -> list[np.ndarray]:
        """Kraus operators; raises :class:`NotCompletelyPositive` if unavailable."""
        if self._kraus is None:
            ops = choi_to_kraus(self.choi, self._d)
            for k in ops:
                k.setflags(write=False)
            self._kraus = ops
        return self._kraus

    def apply(self, rho) -> np.ndarray:
        """T(rho) by the native representation."""
        r = as_matrix(rho, square=True, name="rho")
        if r.shape[0] != self._d:
            raise ValueError("state dimension mismatch")
        if self._kraus is not None:
            return sum(k @ r @ k.conj().T for k in self._kraus)
        return _unvec(self.superop @ _vec(r), self._d)

    def spectrum(self, tol: float = SPECTRUM_MATCH_TOL) -> SpectrumMultiset:
        return eig_multiset(self.superop, tol)

    def __repr__(self) -> str:
        return f"Channel(d={self._d}, repr={self.native_repr!r})"


def convert_repr(channel: Channel, target: str) -> Channel:
    """Return a channel natively stored in ``target`` (kraus/superop/choi)."""
    if target == "kraus":
        return Channel(channel.d, kraus=[k.copy() for k in channel.kraus])
    if target == "superop":
        return Channel(channel.d, superop=channel.superop.copy())
    if target == "choi":
        return Channel(channel.d, choi=channel.choi.copy())
    raise ValueError(f"unknown representation {target!r}")


@dataclass(frozen=True)
class VerificationReport:
    """Diagnostics for how close a map is to a CPTP channel.

    All errors are Frobenius norms; ``cp_margin`` is the minimum eigenvalue of
    the Hermitized Choi matrix (negative means not completely positive).
    """

    trace_preserving_error: float
    unital_error: float
    hermiticity_error: float
    cp_margin: float
    contains_one_error: float
    spectral_radius: float

    def is_cptp(self, tol: float = PSD_MARGIN_TOL) -> bool:
        return (
            self.trace_preserving_error <= 1e-9
            and self.hermiticity_error <= 1e-9
            and self.cp_margin >= -tol
        )


def verify(channel: Channel) -> VerificationReport:
    d = channel.d
    s = channel.superop
    # trace preservation: tr T(E_ij) = delta_ij, read off diagonal-pair rows
    g = np.zeros((d, d), dtype=complex)
    for k in range(d):
        g += s[k * d + k, :].reshape(d, d)
    tp_err = float(np.linalg.norm(g - np.eye(d)))
    unital_err = float(np.linalg.norm(channel.apply(np.eye(d)) - np.eye(d)))
    choi = channel.choi
    herm_err = float(np.linalg.norm(choi - choi.conj().T))
    w, _ = np.linalg.eigh((choi + choi.conj().T) / 2.0)
    spectrum = channel.spectrum()
    return VerificationReport(
        trace_preserving_error=tp_err,
        unital_error=unital_err,
        hermiticity_error=herm_err,
        cp_margin=float(w[0]),
        contains_one_error=float(min(abs(v - 1.0) for v in spectrum)),
        spectral_radius=float(spectrum.spectral_radius()),
    )


def moments(channel: Channel, k_max: int, method: str = "superop") -> np.ndarray:
    """Spectral power sums mu_k = sum_i lambda_i^k for k = 1..k_max.

    ``superop`` traces powers of the superoperator and works for any map.
    ``kraus`` sums |tr(K_j1 ... K_jk)|^2 over all tuples, which equals the
    same quantity for completely positive maps; it refuses budgets above
    ``MOMENT_BUDGET`` tuples.
    """
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if method == "superop":
        s = channel.superop
        out = np.empty(k_max, dtype=complex)
        p = s.copy()
        for k in range(k_max):
            out[k] = np.trace(p)
            if k + 1 < k_max:
                p = p @ s
        return out
    if method == "kraus":
        ops = channel.kraus
        m = len(ops)
        if m**k_max > MOMENT_BUDGET:
            raise ValueError(
                f"kraus moment budget exceeded ({m}^{k_max} tuples); use method='superop'"
            )
        out = np.empty(k_max, dtype=complex)
        for k in range(1, k_max + 1):
            total = 0.0
            for tup in itertools.product(range(m), repeat=k):
                prod = ops[tup[0]]
                for j in tup[1:]:
                    prod = prod @ ops[j]
                total += abs(np.trace(prod)) ** 2
            out[k - 1] = total
        return out
    raise ValueError(f"unknown method {method!r}")


def _hermiticity_preserving_defect(s: np.ndarray, d: int) -> float:
    s4 = s.reshape(d, d, d, d)
    return float(np.linalg.norm(s4 - s4.conj().transpose(1, 0, 3, 2)))


def _rough_radius(s: np.ndarray, steps: int = 32) -> float:
    """Gelfand-style spectral radius estimate via normalized power iteration."""
    n = s.shape[0]
    v = np.ones(n, dtype=complex) / np.sqrt(n)
    acc = 0.0
    for _ in range(steps):
        v = s @ v
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return 0.0
        acc += np.log(nv)
        v = v / nv
    return float(np.exp(acc / steps))


@dataclass(frozen=True)
class NormalizationResult:
    channel: Channel
    spectral_radius: float
    error_estimate: float


def _normalize_once(s: np.ndarray, d: int, epsilon: float, max_iter: int, tol: float):
    vec_id = _vec(np.eye(d, dtype=complex))
    s_eps = s + epsilon * np.outer(vec_id, vec_id)
    shift = max(_rough_radius(s_eps), 1e-12)
    scale = max(float(np.linalg.norm(s_eps)), 1e-300)
    z = np.eye(d, dtype=complex) / np.linalg.norm(np.eye(d))
    # The fixed point can be nearly singular, in which case the similarity by
    # P^{-1/2} amplifies any leftover eigen-residual by roughly 1/eps.  Iterate
    # on the residual itself down to the round-off floor instead of stopping on
    # iterate increments.
    best_z = z
    best_res = np.inf
    stall = 0
    for _ in range(max_iter):
        t_z = _unvec(s_eps @ _vec(z), d)
        rho_z = float(np.real(np.vdot(z, t_z)))
        res = float(np.linalg.norm(t_z - rho_z * z))
        if res < best_res * (1.0 - 1e-3):
            best_z, best_res, stall = z, res, 0
        else:
            stall += 1
        if res <= 2.0 * np.finfo(float).eps * scale or stall >= 50:
            break
        zn = t_z + shift * z
        zn = (zn + zn.conj().T) / 2.0
        z = zn / np.linalg.norm(zn)
    if best_res > max(100.0 * tol, 1e-10) * scale:
        raise NumericalError("fixed-point power iteration did not converge within cap")
    p = best_z / float(np.trace(best_z).real)
    w, v = herm_eigensystem(p)
    if w[0] <= 1e-13:
        raise NumericalError(f"fixed point is not positive definite (min eig {w[0]:.3e})")
    rho = float(np.real(np.vdot(_vec(p), s_eps @ _vec(p)) / np.vdot(_vec(p), _vec(p))))
    p_half = (v * np.sqrt(w)) @ v.conj().T
    p_ihalf = (v / np.sqrt(w)) @ v.conj().T
    unital = np.kron(p_ihalf, p_ihalf.T) @ s_eps @ np.kron(p_half, p_half.T) / rho
    return unital.conj().T, rho


def normalize_trace_preserving(
    superop,
    epsilon: float = 1e-8,
    max_iter: int = 10**5,
    tol: float = 1e-13,
) -> NormalizationResult:
    """Rescale a positive map to a trace-preserving one with the same spectrum shape.

    Builds ``T_eps = T + eps * tr(.) * Id``, finds its positive definite fixed
    point P by (shifted) power iteration, and returns the trace-preserving map
    T' with ``spec(T_eps) = rho * spec(T')`` together with the radius ``rho``.
    A second evaluation at ``2 * eps`` provides the Richardson-style error
    estimate on ``rho``.
    """
    s = as_matrix(superop, square=True, name="superoperator")
    d = int(round(np.sqrt(s.shape[0])))
    if d * d != s.shape[0]:
        raise ValueError("superoperator side is not a perfect square")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    defect = _hermiticity_preserving_defect(s, d)
    if defect > 1e-8 * max(1.0, float(np.linalg.norm(s))):
        raise ValueError(f"map is not Hermiticity-preserving (defect {defect:.3e})")
    if _rough_radius(s) < 1e-12:
        raise ValueError("spectral radius is numerically zero")
    t1, rho1 = _normalize_once(s, d, epsilon, max_iter, tol)
    t2, rho2 = _normalize_once(s, d, 2.0 * epsilon, max_iter, tol)
    vec_id = _vec(np.eye(d, dtype=complex))
    s_eps = s + epsilon * np.outer(vec_id, vec_id)
    target = [v * rho1 for v in eig_multiset(t1)]
    if not multiset_match(eig_multiset(s_eps).values, target, 1e-6).matched:
        raise NumericalError("normalized spectrum does not match rho * spec(T')")
    return NormalizationResult(
        channel=Channel(d, superop=t1),
        spectral_radius=rho1,
        error_estimate=abs(rho2 - rho1),
    )


def _peripheral_candidate(spectrum: SpectrumMultiset, gap: float = 1e-8):
    """The (approximately real positive) eigenvalue at the spectral radius."""
    radius = spectrum.spectral_radius()
    peripheral = [v for v in spectrum if abs(v) >= radius - gap]
    top = max(peripheral, key=lambda z: z.real)
    copies = sum(1 for v in spectrum if abs(v - top) <= gap)
    return radius, top, copies, len(peripheral)


def _fixed_point_matrix(s: np.ndarray, d: int, eigenvalue: complex) -> np.ndarray:
    vals, vecs = np.linalg.eig(s)
    idx = int(np.argmin(np.abs(vals - eigenvalue)))
    x = _unvec(vecs[:, idx], d)
    h = (x + x.conj().T) / 2.0
    tr = float(np.trace(h).real)
    if abs(tr) > 1e-12:
        h = h / tr
    else:
        h = h / np.linalg.norm(h)
    return h


def is_irreducible(channel: Channel, gap: float = 1e-8, definite_tol: float = 1e-10) -> bool:
    """Simple radius eigenvalue with a definite Hermitized fixed point."""
    spectrum = channel.spectrum()
    _, top, copies, _ = _peripheral_candidate(spectrum, gap)
    if copies != 1:
        return False
    h = _fixed_point_matrix(channel.superop, channel.d, top)
    w, _ = np.linalg.eigh(h)
    return bool(w[0] > definite_tol or w[-1] < -definite_tol)


def wielandt_bound(d: int) -> int:
    return (d * d - 2) * (d * d - 1)


def _span_basis(mats: list[np.ndarray], d: int, rtol: float = 1e-10) -> list[np.ndarray]:
    stack = np.array([_vec(m) for m in mats])
    u, sv, vh = np.linalg.svd(stack, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        return []
    keep = sv > rtol * sv[0]
    return [_unvec(row, d) for row in vh[keep]]


def kraus_span_saturation(channel: Channel, cap: int | None = None) -> int | None:
    """Smallest n with span{K_j1 ... K_jn} = M_d, or None up to the cap.

    The cap defaults to the quantum Wielandt bound (d^2 - 2)(d^2 - 1), beyond
    which saturation can no longer occur for any channel.
    """
    d = channel.d
    if cap is None:
        cap = wielandt_bound(d)
    basis = _span_basis(channel.kraus, d)
    for n in range(1, cap + 1):
        if len(basis) == d * d:
            return n
        products = [k @ b for k in channel.kraus for b in basis]
        basis = _span_basis(products, d)
    return None


@dataclass(frozen=True)
class PrimitivityReport:
    primitive: bool
    spectral_primitive: bool
    span_primitive: bool
    span_saturation_step: int | None
    peripheral_count: int
    fixed_point_min_eig: float


def is_primitive(channel: Channel, gap: float = 1e-8) -> PrimitivityReport:
    """Decide primitivity by two independent certificates.

    Spectral: exactly one eigenvalue of modulus >= 1 - gap and a positive
    definite fixed point.  Kraus span: product spans saturate M_d within the
    quantum Wielandt bound.  Disagreement raises :class:`NumericalError`.
    """
    spectrum = channel.spectrum()
    peripheral = [v for v in spectrum if abs(v) >= 1.0 - gap]
    top = max(spectrum, key=lambda z: (abs(z), z.real))
    h = _fixed_point_matrix(channel.superop, channel.d, top)
    w, _ = np.linalg.eigh(h)
    min_eig = float(w[0])
    spectral_ok = len(peripheral) == 1 and min_eig > 1e-10
    step = kraus_span_saturation(channel)
    span_ok = step is not None
    if spectral_ok != span_ok:
        raise NumericalError(
            f"primitivity certificates disagree (spectral={spectral_ok}, span={span_ok})"
        )
    return PrimitivityReport(
        primitive=spectral_ok,
        spectral_primitive=spectral_ok,
        span_primitive=span_ok,
        span_saturation_step=step,
        peripheral_count=len(peripheral),
        fixed_point_min_eig=min_eig,
    )


def stochastic_submatrix(channel: Channel, tol: float = 1e-9) -> np.ndarray:
    """Classical action S_ij = <i|T(|j><j|)|i> of a positive TP map.

    Positivity and trace preservation are screened through their necessary
    consequences: entries >= -1e-10 and columns summing to one within ``tol``.
    """
    d = channel.d
    s = channel.superop
    out = np.empty((d, d), dtype=float)
    max_imag = 0.0
    for i in range(d):
        for j in range(d):
            v = s[i * d + i, j * d + j]
            max_imag = max(max_imag, abs(v.imag))
            out[i, j] = v.real
    if max_imag > 1e-9:
        raise ValueError(f"diagonal action has imaginary part {max_imag:.3e}")
    if out.min() < -1e-10:
        raise ValueError(f"diagonal action has negative entry {out.min():.3e}; map not positive")
    colsums = out.sum(axis=0)
    if np.max(np.abs(colsums - 1.0)) > tol:
        raise ValueError("columns do not sum to one; map not trace-preserving")
    return out


def random_channel(d: int, n_kraus: int, seed: int) -> Channel:
    """Seeded Haar-flavored random CPTP map with ``n_kraus`` Kraus operators."""
    if d < 1 or n_kraus < 1:
        raise ValueError("d and n_kraus must be positive")
    rng = np.random.default_rng(seed)
    ops = [
        rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        for _ in range(n_kraus)
    ]
    gram = sum(k.conj().T @ k for k in ops)
    w, v = herm_eigensystem(gram)
    inv_sqrt = (v / np.sqrt(w)) @ v.conj().T
    return Channel(d, kraus=[k @ inv_sqrt for k in ops])
