"""Bigraded solid harmonics and their operator counterparts.

A polynomial P(z) = sum a_{alpha beta} z^alpha conj(z)^beta of bidegree (a, b)
is solid-harmonic when Delta P = 4 sum_j d^2 P / dz_j dconj(z_j) = 0.  The
harmonicity system is solved exactly in rational arithmetic; orthonormalization
under the Gaussian pairing

    (f, g) = 2^{-(n+a+b-1)} / Gamma(n+a+b) * int f conj(g) e^{-|z|^2/2} dz / (2 pi)^n

is also exact (the Gram matrix of monomials is rational), with a single float
square root at the end.  The normalized-measure convention is a registry pin;
it is what makes the operator-level normalizing constants

    c(n, a, b; k)^2 = 4^{a+b} 2^{n+a+b-1} [G(k+n+b)/G(k-a+1)] [G(k+1)G(n)/G(k+n)]

agree exactly with the level inner products of the correspondence operators.

Operator homogeneity of degree zero means: the normalized coefficients
c(n,a,b;2k+n)^{-1} (M, G(P_j))_k do not depend on the level k.  This is a
strictly stronger notion than dilation covariance of a spectral multiplier;
the first-order Riesz multiplier A H^{-1/2} is dilation-covariant but fails
the level test (its coefficient drifts like sqrt(2k/(2k+1))).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .hermite import HermiteBasisSpec, OperatorMatrix, spectral_multiplier
from .weyl import weyl_correspondence


# ---------------------------------------------------------------------------
# solid harmonics
# ---------------------------------------------------------------------------

def _monomials(n, degree):
    """Multi-indices of total degree ``degree`` in n variables, ascending lex."""
    if n == 1:
        return [(degree,)]
    out = []
    for first in range(degree + 1):
        out.extend((first,) + rest for rest in _monomials(n - 1, degree - first))
    return out


@dataclass
class SolidHarmonic:
    """Bigraded polynomial with certified harmonicity.

    ``coeffs`` maps (alpha, beta) with |alpha| = a, |beta| = b to complex
    coefficients.  Instances built by :func:`solid_harmonic_basis` carry exact
    rational coefficient data, so the harmonicity identity Delta P = 0 is
    checked with no rounding at all.
    """

    n: int
    a: int
    b: int
    coeffs: dict
    exact: dict = field(default=None, repr=False)

    def __post_init__(self):
        for (alpha, beta) in self.coeffs:
            if len(alpha) != self.n or len(beta) != self.n:
                raise ValueError("monomial index length must equal n")
            if sum(alpha) != self.a or sum(beta) != self.b:
                raise ValueError("monomials must have the declared bidegree")

    def laplacian_coeffs(self):
        """Coefficients of Delta P = 4 sum_j a_j b_j z^{alpha-e_j} conj(z)^{beta-e_j}."""
        source = self.exact if self.exact is not None else self.coeffs
        out = {}
        for (alpha, beta), c in source.items():
            for j in range(self.n):
                if alpha[j] > 0 and beta[j] > 0:
                    key = (alpha[:j] + (alpha[j] - 1,) + alpha[j + 1:],
                           beta[:j] + (beta[j] - 1,) + beta[j + 1:])
                    out[key] = out.get(key, 0) + 4 * alpha[j] * beta[j] * c
        return out

    def is_harmonic(self) -> bool:
        lap = self.laplacian_coeffs()
        if self.exact is not None:
            return all(v == 0 for v in lap.values())
        scale = max((abs(v) for v in self.coeffs.values()), default=1.0) or 1.0
        return all(abs(v) <= 1e-12 * scale for v in lap.values())

    def evaluate(self, points) -> np.ndarray:
        """P at complex points of shape (m, n)."""
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        out = np.zeros(pts.shape[0], dtype=complex)
        for (alpha, beta), c in self.coeffs.items():
            term = np.full(pts.shape[0], c, dtype=complex)
            for j in range(self.n):
                if alpha[j]:
                    term = term * pts[:, j] ** alpha[j]
                if beta[j]:
                    term = term * np.conj(pts[:, j]) ** beta[j]
            out += term
        return out


def _monomial_pairing(n, key_p, key_q):
    """Exact Gaussian pairing of two monomials, without the bidegree prefactor.

    int z^alpha conj(z)^beta conj(z^gamma conj(z)^delta) e^{-|z|^2/2} dz/(2 pi)^n
    equals prod_j 2^{p_j} p_j!  when alpha + delta = beta + gamma, else 0.
    """
    (alpha, beta), (gamma, delta) = key_p, key_q
    value = Fraction(1)
    for j in range(n):
        p = alpha[j] + delta[j]
        if p != beta[j] + gamma[j]:
            return Fraction(0)
        value *= Fraction(2) ** p * math.factorial(p)
    return value


def _bidegree_prefactor(n, a, b) -> Fraction:
    return Fraction(1, 2 ** (n + a + b - 1)) * Fraction(1, math.factorial(n + a + b - 1))


def gaussian_inner_product(P: SolidHarmonic, Q: SolidHarmonic) -> complex:
    """Gaussian pairing of bigraded polynomials; exact moment formulas, no quadrature."""
    if P.n != Q.n:
        raise ValueError("polynomials live on different C^n")
    pref = float(_bidegree_prefactor(P.n, P.a, P.b))
    total = 0j
    for kp, cp in P.coeffs.items():
        for kq, cq in Q.coeffs.items():
            m = _monomial_pairing(P.n, kp, kq)
            if m:
                total += cp * np.conj(cq) * float(m)
    return complex(pref * total)


def _exact_nullspace(rows, ncols):
    """Nullspace basis of an exact rational matrix given as list of rows."""
    mat = [list(r) for r in rows]
    nrows = len(mat)
    pivots = {}
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if mat[i][c] != 0), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        inv = Fraction(1) / mat[r][c]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(nrows):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        pivots[c] = r
        r += 1
    basis = []
    free = [c for c in range(ncols) if c not in pivots]
    for c in free:
        vec = [Fraction(0)] * ncols
        vec[c] = Fraction(1)
        for pc, pr in pivots.items():
            vec[pc] = -mat[pr][c]
        basis.append(vec)
    return basis


def solid_harmonic_basis(n: int, a: int, b: int) -> list:
    """Orthonormal basis of the bigraded solid harmonics of bidegree (a, b).

    The harmonicity nullspace is computed in rational arithmetic, then
    Gram-Schmidt runs exactly in the Gaussian pairing (pivot to the largest
    remaining norm, ties broken by monomial order); only the final
    normalization introduces a float square root.
    """
    if n not in (1, 2):
        raise ValueError("implemented for n in {1, 2}")
    if a < 0 or b < 0:
        raise ValueError("bidegree must be non-negative")
    keys = [(al, be) for al in _monomials(n, a) for be in _monomials(n, b)]
    # harmonicity system: rows indexed by target monomials of bidegree (a-1, b-1)
    targets = {}
    for ci, (alpha, beta) in enumerate(keys):
        for j in range(n):
            if alpha[j] > 0 and beta[j] > 0:
                key = (alpha[:j] + (alpha[j] - 1,) + alpha[j + 1:],
                       beta[:j] + (beta[j] - 1,) + beta[j + 1:])
                targets.setdefault(key, [Fraction(0)] * len(keys))[ci] += Fraction(4 * alpha[j] * beta[j])
    null = _exact_nullspace(list(targets.values()), len(keys))
    if not null:
        return []

    pref = _bidegree_prefactor(n, a, b)
    gram_cache = {}

    def pairing(u, v):
        total = Fraction(0)
        for i, cu in enumerate(u):
            if cu == 0:
                continue
            for j, cv in enumerate(v):
                if cv == 0:
                    continue
                if (i, j) not in gram_cache:
                    gram_cache[(i, j)] = _monomial_pairing(n, keys[i], keys[j])
                total += cu * cv * gram_cache[(i, j)]
        return pref * total

    remaining = [list(v) for v in null]
    chosen = []
    while remaining:
        norms = [pairing(v, v) for v in remaining]
        pick = max(range(len(remaining)), key=lambda i: (norms[i], -i))
        v = remaining.pop(pick)
        chosen.append(v)
        nv = pairing(v, v)
        remaining = [[x - (pairing(w, v) / nv) * y for x, y in zip(w, v)] for w in remaining]
        remaining = [w for w in remaining if any(x != 0 for x in w)]

    out = []
    for v in chosen:
        nv = pairing(v, v)
        scale = 1.0 / math.sqrt(float(nv))
        coeffs = {keys[i]: scale * float(c) for i, c in enumerate(v) if c != 0}
        exact = {keys[i]: c for i, c in enumerate(v) if c != 0}
        out.append(SolidHarmonic(n, a, b, coeffs, exact=exact))
    return out


# ---------------------------------------------------------------------------
# operator-level machinery
# ---------------------------------------------------------------------------

def operator_harmonic_norm(n: int, a: int, b: int, k: int) -> float:
    """Normalizing constant c(n,a,b;2k+n): positive square root via log-Gamma.

    Defined for k >= a (the falling factorial k(k-1)...(k-a+1) vanishes below).
    """
    if k < a:
        raise ValueError(f"level k = {k} must be >= a = {a}")
    log_sq = ((a + b) * math.log(4.0) + (n + a + b - 1) * math.log(2.0)
              + gammaln(k + n + b) - gammaln(k - a + 1)
              + gammaln(k + 1) + gammaln(n) - gammaln(k + n))
    return float(np.exp(0.5 * log_sq))


def level_inner_product(T: OperatorMatrix, S: OperatorMatrix, k: int) -> complex:
    """(T, S)_k = [dim E_k]^{-1} sum_{|alpha| = k} <T Phi_alpha, S Phi_alpha>."""
    if T.basis != S.basis:
        raise ValueError("operands live on different bases")
    spec = T.basis
    if k > spec.kmax or k < 0:
        raise ValueError("level outside truncation")
    cols = np.flatnonzero(spec.levels() == k)
    block_t = T.mat[:, cols]
    block_s = S.mat[:, cols]
    return complex(np.vdot(block_s, block_t) / cols.size)


@lru_cache(maxsize=None)
def _delta_basis(n, a, b):
    return tuple(solid_harmonic_basis(n, a, b))


def _correspondence(spec, P) -> OperatorMatrix:
    return weyl_correspondence(P, spec)


def default_deltas(n: int, max_band: int = 3):
    """Class-one labels (a, b) with nonempty harmonic space, |a - b| <= max_band."""
    out = []
    for a in range(max_band + 1):
        for b in range(max_band + 1):
            if abs(a - b) <= max_band and _delta_basis(n, a, b):
                out.append((a, b))
    return out


def harmonic_coefficients(M: OperatorMatrix, k_range, deltas=None):
    """Coefficient table of M against the operator harmonics.

    Returns a list of cells ``{a, b, j, k, raw, normalized, flagged}`` where
    ``raw`` is c^{-2} (M, G(P_j))_k (the expansion coefficient) and
    ``normalized`` is c^{-1} (M, G(P_j))_k (the homogeneity diagnostic).
    Levels whose correspondence operator leaks past the truncation are flagged.
    """
    spec = M.basis
    if deltas is None:
        deltas = default_deltas(spec.n)
    cells = []
    for (a, b) in deltas:
        basis = _delta_basis(spec.n, a, b)
        for j, P in enumerate(basis, start=1):
            try:
                G = _correspondence(spec, P)
            except ValueError:
                continue  # monomial restriction: not constructible
            for k in k_range:
                if k < a or k > spec.kmax:
                    continue
                flagged = (k - a + b) > spec.kmax
                c = operator_harmonic_norm(spec.n, a, b, k)
                ip = level_inner_product(M, G, k)
                cells.append({
                    "a": a, "b": b, "j": j, "k": int(k),
                    "raw": ip / c ** 2,
                    "normalized": ip / c,
                    "flagged": bool(flagged),
                })
    return cells


@dataclass
class HomogeneityReport:
    """Outcome of the degree-zero homogeneity diagnostic."""

    tol: float
    cells: list
    sequences: dict          # (a, b, j) -> complex ndarray over k-window
    deviations: dict         # (a, b, j) -> max |coeff - mean|
    verdicts: dict           # (a, b, j) -> bool
    coefficients: dict       # (a, b, j) -> mean coefficient (B when homogeneous)
    homogeneous: bool
    reconstruction: OperatorMatrix = None
    reconstruction_distance: dict = None
    operator_id: str = ""

    def to_json(self) -> str:
        payload = {
            "operator_id": self.operator_id,
            "tol": self.tol,
            "homogeneous": self.homogeneous,
            "cells": [
                {"a": c["a"], "b": c["b"], "j": c["j"], "k": c["k"],
                 "coeff_re": c["normalized"].real, "coeff_im": c["normalized"].imag,
                 "flagged": c["flagged"]}
                for c in self.cells
            ],
            "verdicts": {f"{a},{b},{j}": bool(v) for (a, b, j), v in sorted(self.verdicts.items())},
            "reconstructed_B": {f"{a},{b},{j}": [v.real, v.imag]
                                for (a, b, j), v in sorted(self.coefficients.items())},
        }
        if self.reconstruction_distance is not None:
            payload["reconstruction_distance"] = {
                str(k): v for k, v in sorted(self.reconstruction_distance.items())}
        return json.dumps(payload, sort_keys=True)


def homogeneity_test(M: OperatorMatrix, tol: float = 1e-8, k_window=None,
                     deltas=None, operator_id: str = "") -> HomogeneityReport:
    """Check k-independence of the normalized harmonic coefficients of M.

    Each (delta, j) cell passes when its coefficient sequence over the level
    window deviates from its mean by less than ``tol`` relative to the overall
    coefficient scale.  If every unflagged cell passes, the coefficients are
    synthesized back into an operator and per-level reconstruction distances
    are reported.
    """
    spec = M.basis
    if deltas is None:
        deltas = default_deltas(spec.n)
    max_a = max(a for a, _ in deltas)
    if k_window is None:
        k_window = range(max_a, min(max_a + 12, spec.kmax) + 1)
    k_window = list(k_window)
    if len([k for k in k_window if k >= max_a]) < 5:
        raise ValueError("k-window must span at least 5 usable levels")

    cells = harmonic_coefficients(M, k_window, deltas)
    sequences, deviations, verdicts, coefficients = {}, {}, {}, {}
    scale = max((abs(c["normalized"]) for c in cells if not c["flagged"]), default=0.0)
    denom = max(scale, 1e-300)
    for (a, b) in deltas:
        js = sorted({c["j"] for c in cells if (c["a"], c["b"]) == (a, b)})
        for j in js:
            seq = np.array([c["normalized"] for c in cells
                            if (c["a"], c["b"], c["j"]) == (a, b, j) and not c["flagged"]])
            if seq.size == 0:
                continue
            mean = seq.mean()
            dev = float(np.abs(seq - mean).max())
            sequences[(a, b, j)] = seq
            deviations[(a, b, j)] = dev
            verdicts[(a, b, j)] = dev <= tol * denom
            coefficients[(a, b, j)] = complex(mean)

    homogeneous = all(verdicts.values()) if verdicts else True
    report = HomogeneityReport(tol=tol, cells=cells, sequences=sequences,
                               deviations=deviations, verdicts=verdicts,
                               coefficients=coefficients, homogeneous=homogeneous,
                               operator_id=operator_id)
    if homogeneous:
        B = {key: val for key, val in coefficients.items() if abs(val) > tol * denom}
        recon = homogeneous_synthesis(B, spec)
        report.reconstruction = recon
        dists = {}
        levels = spec.levels()
        for k in k_window:
            cols = np.flatnonzero(levels == k)
            dists[int(k)] = float(np.linalg.norm(M.mat[:, cols] - recon.mat[:, cols]))
        report.reconstruction_distance = dists
    return report


def harmonic_scale_inverse(spec: HermiteBasisSpec, a: int, b: int) -> OperatorMatrix:
    """The bounded diagonal operator with entry c(n,a,b;2k+n)^{-1} on levels k >= a, 0 below."""
    n = spec.n

    def entry(k):
        return 0.0 if k < a else 1.0 / operator_harmonic_norm(n, a, b, k)

    return spectral_multiplier(spec, entry)


def homogeneous_synthesis(B: dict, spec: HermiteBasisSpec) -> OperatorMatrix:
    """Assemble sum B_j^delta G(P_j^delta) c_delta(H)^{-1} from a coefficient map.

    ``B`` maps (a, b, j) to complex coefficients; j is 1-based within the
    orthonormal harmonic basis of bidegree (a, b).
    """
    total = OperatorMatrix(spec, np.zeros((spec.size, spec.size), dtype=complex))
    for (a, b, j), coeff in sorted(B.items()):
        basis = _delta_basis(spec.n, a, b)
        if not 1 <= j <= len(basis):
            raise ValueError(f"no harmonic with index j = {j} at bidegree ({a}, {b})")
        G = _correspondence(spec, basis[j - 1])
        total = total + coeff * (G @ harmonic_scale_inverse(spec, a, b))
    return total


def band_projection(M: OperatorMatrix, a: int, b: int) -> OperatorMatrix:
    """Character-averaged piece of M for the circle action at n = 1.

    The diagonal U(1) action multiplies level k by a phase e^{i k theta}, so
    averaging against the (a, b) character keeps exactly the matrix band where
    column level - row level = a - b.
    """
    spec = M.basis
    if spec.n != 1:
        raise ValueError("band projection is implemented for n = 1 only")
    if a < 0 or b < 0 or (a > 0 and b > 0):
        raise ValueError("need a, b >= 0 with at most one of them nonzero")
    levels = spec.levels()
    keep = (levels[None, :] - levels[:, None]) == (a - b)
    return OperatorMatrix(spec, np.where(keep, M.mat, 0.0), M.leakage)


def sqrt_series_coeff(i: int) -> float:
    """Coefficient c_i in (1 - d)^{1/2} = 1 - sum_{i>=1} c_i d^i, via log-Gamma."""
    if i < 1:
        raise ValueError("series index starts at 1")
    return float(np.exp(gammaln(2 * i + 1) - 2 * i * math.log(2.0)
                        - 2 * gammaln(i + 1)) / (2 * i - 1))


@dataclass
class TransferOperator:
    """Diagonal comparison operator c_delta(H) H^{-(a+b)/2} and its factor split."""

    op: OperatorMatrix
    factors: list                # (a+b) arrays over levels 0..K
    prefactor: float             # constant 4^{a+b} 2^{n+a+b-1} Gamma(n), square-rooted


def transfer_operator(n: int, a: int, b: int, kmax: int, lam: float = 1.0) -> TransferOperator:
    """Factorized diagonal of c(n,a,b;2k+n) (2k+n)^{-(a+b)/2}, zero on levels k < a."""
    if kmax < a:
        raise ValueError("truncation must reach the first admissible level k = a")
    spec = HermiteBasisSpec(n, lam, kmax)
    ks = np.arange(kmax + 1, dtype=float)
    denominator = 2 * ks + n
    factors = []
    for j in range(n, n + b):
        factors.append(np.sqrt((ks + j) / denominator))
    for j in range(a):
        vals = (ks - j) / denominator
        vals[ks < a] = 0.0
        factors.append(np.sqrt(np.clip(vals, 0.0, None)))
    prefactor = math.sqrt(4 ** (a + b) * 2 ** (n + a + b - 1) * math.gamma(n))
    diag = np.full(kmax + 1, prefactor)
    for f in factors:
        diag = diag * f
    op = spectral_multiplier(spec, lambda k: diag[k])
    return TransferOperator(op=op, factors=factors, prefactor=prefactor)
