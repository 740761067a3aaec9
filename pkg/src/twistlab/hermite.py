"""Scaled Hermite basis, ladder operators and spectral calculus.

Everything downstream works in the truncated basis

    { Phi_alpha^lam : |alpha| <= K },   Phi_alpha^lam(x) = |lam|^{n/4} Phi_alpha(sqrt|lam| x),

ordered graded-lexicographically (grade ascending, then ascending lex within a
grade).  The scaled functions are eigenfunctions of H(lam) = -Delta + lam^2|x|^2
with eigenvalue (2|alpha| + n)|lam|; creation/annihilation shift one index by
e_j with weight sqrt(2 alpha_j + 2) sqrt|lam| resp. sqrt(2 alpha_j) sqrt|lam|.

Truncation is never silent: ladder applications report the squared mass of the
coefficients they push past K, and operator products accumulate a leakage
bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def multi_indices(n: int, kmax: int) -> tuple[tuple[int, ...], ...]:
    """All multi-indices alpha in N^n with |alpha| <= kmax, graded-lex order."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    out = []
    for grade in range(kmax + 1):
        out.extend(_compositions(grade, n))
    return tuple(out)


def _compositions(total, n):
    if n == 1:
        return [(total,)]
    out = []
    for first in range(total + 1):
        out.extend((first,) + rest for rest in _compositions(total - first, n - 1))
    return out


@dataclass(frozen=True)
class HermiteBasisSpec:
    """Truncated scaled Hermite basis: dimension n, scaling lam != 0, cut K."""

    n: int
    lam: float
    kmax: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be a positive integer")
        if self.lam == 0 or not np.isfinite(self.lam):
            raise ValueError("scaling lam must be nonzero and finite")
        if self.kmax < 1:
            raise ValueError("truncation K must be >= 1")

    @property
    def indices(self) -> tuple[tuple[int, ...], ...]:
        return multi_indices(self.n, self.kmax)

    @property
    def size(self) -> int:
        return len(self.indices)

    def index_of(self, alpha) -> int:
        return _index_lookup(self.n, self.kmax)[tuple(alpha)]

    def levels(self) -> np.ndarray:
        """|alpha| for each basis slot, in basis order."""
        return np.array([sum(a) for a in self.indices])

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues (2|alpha| + n)|lam| of H(lam), in basis order."""
        return (2 * self.levels() + self.n) * abs(self.lam)


@lru_cache(maxsize=None)
def _index_lookup(n, kmax):
    return {a: i for i, a in enumerate(multi_indices(n, kmax))}


def hermite_functions(kmax: int, u: np.ndarray) -> np.ndarray:
    """Normalized 1-D Hermite functions h_0..h_kmax at points u, shape (kmax+1, *u.shape).

    Upward recurrence in the function normalization (the functions themselves,
    not the polynomials), which stays bounded for orders into the hundreds.
    """
    u = np.asarray(u, dtype=float)
    out = np.empty((kmax + 1,) + u.shape)
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * u * u)
    if kmax >= 1:
        out[1] = np.sqrt(2.0) * u * out[0]
    for k in range(1, kmax):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * u * out[k] - np.sqrt(k / (k + 1.0)) * out[k - 1]
    return out


def hermite_eval(spec: HermiteBasisSpec, alpha, points) -> np.ndarray:
    """Evaluate Phi_alpha^lam at points in R^n.

    ``points``: array of shape (m, n) (or (m,) when n == 1).  Uses the stable
    three-term recurrence on each axis; the scaled function is the tensor
    product of |lam|^{1/4} h_{alpha_j}(sqrt|lam| x_j).
    """
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != spec.n or any(a < 0 for a in alpha):
        raise ValueError("alpha must be a multi-index of length n with entries >= 0")
    if sum(alpha) > spec.kmax:
        raise ValueError(f"|alpha| = {sum(alpha)} exceeds truncation K = {spec.kmax}")
    pts = np.asarray(points, dtype=float)
    if spec.n == 1 and pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[1] != spec.n:
        raise ValueError("points must have shape (m, n)")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    root = np.sqrt(abs(spec.lam))
    vals = np.ones(pts.shape[0])
    for j, aj in enumerate(alpha):
        table = hermite_functions(aj, root * pts[:, j])
        vals = vals * (root ** 0.5) * table[aj]
    return vals


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor Gauss-Hermite rule adapted to the weight exp(-|lam| |x|^2).

    ``nodes`` has shape (m^n, n); ``weights`` integrate against the Gaussian
    weight (sum to (pi/|lam|)^{n/2}), while ``lifted_weights`` integrate plain
    functions that carry their own Gaussian decay.
    """

    nodes: np.ndarray
    weights: np.ndarray
    lifted_weights: np.ndarray
    accuracy_degree: int

    def integrate(self, values: np.ndarray) -> complex:
        """Integral of a function sampled at ``nodes`` (decay supplied by the samples)."""
        return np.tensordot(self.lifted_weights, values, axes=(0, 0))


@lru_cache(maxsize=None)
def _gh_nodes(m: int):
    t, w = np.polynomial.hermite.hermgauss(m)
    return t, w


def gauss_hermite_grid(spec: HermiteBasisSpec, points_per_axis: int) -> QuadratureGrid:
    """Gauss-Hermite rule for the weight exp(-|lam||x|^2), exact for products of basis functions."""
    minimum = 2 * spec.kmax + 2
    if points_per_axis < minimum:
        raise ValueError(
            f"points_per_axis = {points_per_axis} is below the exactness threshold; "
            f"need at least 2K + 2 = {minimum} for K = {spec.kmax}"
        )
    t, w = _gh_nodes(points_per_axis)
    root = np.sqrt(abs(spec.lam))
    x1 = t / root
    w1 = w / root
    lift1 = w1 * np.exp(t * t)
    axes = [x1] * spec.n
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=-1)
    wprod = w1
    lprod = lift1
    for _ in range(spec.n - 1):
        wprod = np.outer(wprod, w1).ravel()
        lprod = np.outer(lprod, lift1).ravel()
    return QuadratureGrid(nodes=nodes, weights=wprod, lifted_weights=lprod,
                          accuracy_degree=2 * points_per_axis - 1)


@dataclass
class OperatorMatrix:
    """Dense truncation of an operator on L^2(R^n) in the scaled Hermite basis.

    mat[i, j] = <T Phi_beta_j, Phi_alpha_i>.  ``leakage`` is a cumulative upper
    bound (Hilbert-Schmidt scale) on mass lost to truncation while the matrix
    was assembled or composed.
    """

    basis: HermiteBasisSpec
    mat: np.ndarray
    leakage: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.mat = np.asarray(self.mat, dtype=complex)
        size = self.basis.size
        if self.mat.shape != (size, size):
            raise ValueError(f"matrix shape {self.mat.shape} does not match basis size {size}")

    def hs_norm(self) -> float:
        return float(np.linalg.norm(self.mat))

    def hs_inner(self, other: "OperatorMatrix") -> complex:
        self._check_basis(other)
        return complex(np.vdot(other.mat, self.mat))  # tr(S* T)

    def adjoint(self) -> "OperatorMatrix":
        return OperatorMatrix(self.basis, self.mat.conj().T, self.leakage)

    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        return self.mat @ np.asarray(coeffs, dtype=complex)

    def _check_basis(self, other):
        if self.basis != other.basis:
            raise ValueError("operands live on different bases")

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_basis(other)
        leak = (self.leakage * other.hs_norm() + other.leakage * self.hs_norm()
                + self.leakage * other.leakage)
        return OperatorMatrix(self.basis, self.mat @ other.mat, leak)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_basis(other)
        return OperatorMatrix(self.basis, self.mat + other.mat, self.leakage + other.leakage)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_basis(other)
        return OperatorMatrix(self.basis, self.mat - other.mat, self.leakage + other.leakage)

    def __mul__(self, scalar) -> "OperatorMatrix":
        return OperatorMatrix(self.basis, self.mat * scalar, abs(scalar) * self.leakage)

    __rmul__ = __mul__


def identity(spec: HermiteBasisSpec) -> OperatorMatrix:
    return OperatorMatrix(spec, np.eye(spec.size, dtype=complex))


def ladder_apply(spec: HermiteBasisSpec, kind: str, j: int, coeffs: np.ndarray):
    """Apply A_j(lam) ('annihilate') or A_j(lam)* ('create') to a coefficient vector.

    Returns ``(new_coeffs, dropped_mass)`` where ``dropped_mass`` is the squared
    norm of the part pushed beyond the truncation (creation only).
    """
    if kind not in ("annihilate", "create"):
        raise ValueError("kind must be 'annihilate' or 'create'")
    if not 1 <= j <= spec.n:
        raise ValueError(f"axis j = {j} out of range 1..{spec.n}")
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.shape != (spec.size,):
        raise ValueError("coefficient vector does not match basis size")
    root = np.sqrt(abs(spec.lam))
    out = np.zeros_like(coeffs)
    dropped = 0.0
    jj = j - 1
    for i, alpha in enumerate(spec.indices):
        c = coeffs[i]
        if c == 0:
            continue
        if kind == "create":
            factor = np.sqrt(2.0 * alpha[jj] + 2.0) * root
            if sum(alpha) + 1 > spec.kmax:
                dropped += (abs(c) * factor) ** 2
                continue
            target = alpha[:jj] + (alpha[jj] + 1,) + alpha[jj + 1:]
            out[spec.index_of(target)] += factor * c
        else:
            if alpha[jj] == 0:
                continue
            factor = np.sqrt(2.0 * alpha[jj]) * root
            target = alpha[:jj] + (alpha[jj] - 1,) + alpha[jj + 1:]
            out[spec.index_of(target)] += factor * c
    return out, dropped


def ladder_matrix(spec: HermiteBasisSpec, kind: str, j: int) -> OperatorMatrix:
    """Truncated matrix of A_j(lam) or A_j(lam)*; leakage records clipped creation weight."""
    size = spec.size
    mat = np.zeros((size, size), dtype=complex)
    total_dropped = 0.0
    e = np.zeros(size, dtype=complex)
    for col in range(size):
        e[:] = 0
        e[col] = 1.0
        out, dropped = ladder_apply(spec, kind, j, e)
        mat[:, col] = out
        total_dropped += dropped
    return OperatorMatrix(spec, mat, leakage=np.sqrt(total_dropped))


def spectral_multiplier(spec: HermiteBasisSpec, scalar_map) -> OperatorMatrix:
    """Diagonal operator with entry scalar_map(|alpha|) at (alpha, alpha); exact."""
    levels = spec.levels()
    values = np.array([scalar_map(int(k)) for k in range(spec.kmax + 1)], dtype=complex)
    if not np.all(np.isfinite(values)):
        raise ValueError("scalar_map produced non-finite values on 0..K")
    return OperatorMatrix(spec, np.diag(values[levels]))


def projection(spec: HermiteBasisSpec, k: int) -> OperatorMatrix:
    """Orthogonal projection onto the eigenspace E_k = span{Phi_alpha : |alpha| = k}."""
    if not 0 <= k <= spec.kmax:
        raise ValueError(f"level k = {k} outside 0..{spec.kmax}")
    return spectral_multiplier(spec, lambda level: 1.0 if level == k else 0.0)


def hermite_operator(spec: HermiteBasisSpec) -> OperatorMatrix:
    """H(lam) as a diagonal matrix: eigenvalue (2k + n)|lam| on level k."""
    n, lam = spec.n, abs(spec.lam)
    return spectral_multiplier(spec, lambda k: (2 * k + n) * lam)
