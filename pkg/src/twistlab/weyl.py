"""Quadrature Weyl transform, twisted convolution and symplectic Fourier transform.

Grid functions live on uniform FFT-style grids over [-R, R)^{2n} (endpoint
excluded) so that differences of grid points land on grid points again; the
twisted convolution is then an exact lattice sum

    (f *_lam g)(z) = sum_w f(z - w) g(w) exp(i (lam/2) Im(z . conj w)) dV

with f extended by zero.  The Weyl transform pairs a grid quadrature in z with
a Gauss-Hermite rule in the representation variable:

    W_lam(f)[a, b] = int f(z) <pi_lam(z, 0) Phi_b^lam, Phi_a^lam> dz,
    <pi_lam(z,0) Phi_b, Phi_a> = int e^{i lam (x.xi + x.y/2)} Phi_b(xi + y) Phi_a(xi) dxi.

The xi-integrand is Gaussian with centre -y/2, so the rule is recentred there.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .hermite import HermiteBasisSpec, OperatorMatrix, hermite_functions, _gh_nodes


# ---------------------------------------------------------------------------
# grid functions on C^n ~ R^{2n}
# ---------------------------------------------------------------------------

def grid_axis(extent: float, m: int) -> np.ndarray:
    """Uniform grid -R + k h, k = 0..m-1, h = 2R/m (endpoint-exclusive)."""
    h = 2.0 * extent / m
    return -extent + h * np.arange(m)


@dataclass
class GridFunction:
    """Complex samples over the tensor grid [-R, R)^{2n}, axes (x1, y1, ..., xn, yn)."""

    n: int
    extent: float
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 2 * self.n:
            raise ValueError("values must have 2n axes")
        m = self.values.shape[0]
        if any(s != m for s in self.values.shape):
            raise ValueError("grid must have equal points per axis")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid samples must be finite")

    @property
    def points_per_axis(self) -> int:
        return self.values.shape[0]

    @property
    def spacing(self) -> float:
        return 2.0 * self.extent / self.points_per_axis

    @property
    def cell_volume(self) -> float:
        return self.spacing ** (2 * self.n)

    def axis(self) -> np.ndarray:
        return grid_axis(self.extent, self.points_per_axis)

    def zpoints(self) -> np.ndarray:
        """Grid points as complex coordinates, shape (N, n), N = m^{2n}."""
        ax = self.axis()
        mesh = np.meshgrid(*([ax] * (2 * self.n)), indexing="ij")
        flat = [m.ravel() for m in mesh]
        return np.stack([flat[2 * j] + 1j * flat[2 * j + 1] for j in range(self.n)], axis=-1)

    def l2_norm_sq(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.cell_volume)

    def integral(self) -> complex:
        return complex(np.sum(self.values) * self.cell_volume)

    def boundary_decay(self) -> float:
        """Largest |sample| on the outermost grid shell."""
        v = np.abs(self.values)
        worst = 0.0
        for axis in range(v.ndim):
            sl0 = [slice(None)] * v.ndim
            sl0[axis] = 0
            sl1 = [slice(None)] * v.ndim
            sl1[axis] = -1
            worst = max(worst, v[tuple(sl0)].max(), v[tuple(sl1)].max())
        return float(worst)

    def same_grid(self, other: "GridFunction") -> bool:
        return (self.n == other.n and self.extent == other.extent
                and self.points_per_axis == other.points_per_axis)


def grid_from_callable(fn: Callable, n: int, extent: float, m: int) -> GridFunction:
    """Sample a callable of complex points (shape (N, n) -> (N,)) onto a grid."""
    probe = GridFunction(n, extent, np.zeros((m,) * (2 * n)))
    z = probe.zpoints()
    vals = np.asarray(fn(z), dtype=complex).reshape((m,) * (2 * n))
    return GridFunction(n, extent, vals)


# ---------------------------------------------------------------------------
# smooth evaluator bundles
# ---------------------------------------------------------------------------

@dataclass
class SmoothFunction:
    """Evaluator bundle: f and first partials at arbitrary points of C^n.

    All callables take complex points of shape (m, n) and return (m,) arrays.
    ``dx[j]``/``dy[j]`` are d/dx_j, d/dy_j; ``lap`` (optional) is the full
    Laplacian on R^{2n}, needed only by second-order operators; ``fourier``
    (optional) evaluates the Euclidean Fourier transform at real frequency
    points of shape (m, 2n).
    """

    n: int
    value: Callable
    dx: Callable = None          # dx(points, j) -> array
    dy: Callable = None
    lap: Callable = None
    fourier: Callable = None
    meta: dict = field(default_factory=dict)

    def d_z(self, points, j=1):
        """Wirtinger derivative d/dz_j = (d/dx_j - i d/dy_j)/2."""
        return 0.5 * (self.dx(points, j) - 1j * self.dy(points, j))

    def d_zbar(self, points, j=1):
        return 0.5 * (self.dx(points, j) + 1j * self.dy(points, j))


def as_zpoints(points, n: int) -> np.ndarray:
    pts = np.asarray(points, dtype=complex)
    if n == 1 and pts.ndim <= 1:
        pts = np.atleast_1d(pts)[:, None]
    if pts.ndim != 2 or pts.shape[1] != n:
        raise ValueError("points must have shape (m, n) as complex coordinates")
    return pts


# ---------------------------------------------------------------------------
# matrix coefficients and the Weyl transform
# ---------------------------------------------------------------------------

def _axis_coefficient_tables(lam, x, y, kmax, mquad):
    """Per-axis <pi_lam(z,0) phi_b, phi_a> assembled from Gauss-Hermite data.

    Returns (mc) array of shape (kmax+1, kmax+1) for a single axis value
    z = x + iy.  The quadrature variable is recentred at -y/2 where the
    Gaussian part of the integrand sits.
    """
    t, w = _gh_nodes(mquad)
    root = np.sqrt(abs(lam))
    xi = t / root - 0.5 * y
    lift = w * np.exp(t * t) / root
    ha = hermite_functions(kmax, root * xi) * root ** 0.5
    hb = hermite_functions(kmax, root * (xi + y)) * root ** 0.5
    phase = np.exp(1j * lam * (x * xi + 0.5 * x * y)) * lift
    return np.einsum("ai,i,bi->ab", ha, phase, hb)


def matrix_coefficient(spec: HermiteBasisSpec, z, alpha, beta,
                       points_per_axis: Optional[int] = None) -> complex:
    """<pi_lam(z, 0) Phi_beta^lam, Phi_alpha^lam> by Gauss-Hermite quadrature.

    ``z`` is a complex n-vector (scalar for n = 1).  The shift xi -> xi + y is
    handled by evaluating Phi_beta at shifted nodes; the rule is exact for the
    polynomial part and converges super-exponentially in the oscillation.
    """
    alpha = tuple(int(a) for a in alpha)
    beta = tuple(int(b) for b in beta)
    if sum(alpha) > spec.kmax or sum(beta) > spec.kmax:
        raise ValueError("multi-index order exceeds truncation K")
    zv = np.atleast_1d(np.asarray(z, dtype=complex))
    if zv.shape != (spec.n,):
        raise ValueError("z must be a complex n-vector")
    if not np.all(np.isfinite(zv)):
        raise ValueError("z must be finite")
    m = points_per_axis or (2 * spec.kmax + 8)
    out = 1.0 + 0j
    for j in range(spec.n):
        table = _axis_coefficient_tables(spec.lam, zv[j].real, zv[j].imag, spec.kmax, m)
        out *= table[alpha[j], beta[j]]
    return complex(out)


def weyl_transform(f: GridFunction, spec: HermiteBasisSpec,
                   points_per_axis: Optional[int] = None) -> OperatorMatrix:
    """W_lam(f) = int f(z) pi_lam(z, 0) dz as a truncated matrix.

    Trapezoidal in z over the grid, Gauss-Hermite in the representation
    variable.  A weak boundary-decay check downgrades to metadata.
    """
    if f.n != spec.n:
        raise ValueError("grid dimension does not match basis dimension")
    meta = {}
    decay = f.boundary_decay()
    peak = float(np.abs(f.values).max()) or 1.0
    if decay > 1e-10 * peak:
        meta["boundary_decay_warning"] = decay
    m = points_per_axis or (2 * spec.kmax + 8)
    if spec.n == 1:
        mat = _weyl_transform_1d(f, spec, m)
    else:
        mat = _weyl_transform_generic(f, spec, m)
    return OperatorMatrix(spec, mat * f.cell_volume, meta=meta)


def _weyl_transform_1d(f, spec, mquad):
    kmax, lam = spec.kmax, spec.lam
    t, w = _gh_nodes(mquad)
    root = np.sqrt(abs(lam))
    ax = f.axis()
    vals = f.values  # [ix, iy]
    size = spec.size
    mat = np.zeros((size, size), dtype=complex)
    lift = w * np.exp(t * t) / root
    # loop over y (shifted Hermite tables depend on y only); vectorise over x
    for iy, y in enumerate(ax):
        xi = t / root - 0.5 * y
        ha = hermite_functions(kmax, root * xi) * root ** 0.5          # (K+1, m)
        hb = hermite_functions(kmax, root * (xi + y)) * root ** 0.5    # (K+1, m)
        # e^{i lam x (xi + y/2)} for all grid x and nodes xi
        phases = np.exp(1j * lam * np.multiply.outer(ax, xi + 0.5 * y))
        col = vals[:, iy]  # f(x + iy) over x
        weighted = (col[:, None] * phases).sum(axis=0) * lift          # (m,)
        mat += np.einsum("ai,i,bi->ab", ha, weighted, hb)
    return mat


def _weyl_transform_generic(f, spec, mquad):
    zpts = f.zpoints()
    vals = f.values.ravel()
    size = spec.size
    mat = np.zeros((size, size), dtype=complex)
    idx = spec.indices
    for zi, fv in zip(zpts, vals):
        if fv == 0:
            continue
        tables = [_axis_coefficient_tables(spec.lam, zi[j].real, zi[j].imag, spec.kmax, mquad)
                  for j in range(spec.n)]
        block = np.ones((size, size), dtype=complex)
        for j in range(spec.n):
            aj = np.array([a[j] for a in idx])
            block *= tables[j][np.ix_(aj, aj)]
        mat += fv * block
    return mat


# ---------------------------------------------------------------------------
# twisted convolution and symplectic Fourier transform
# ---------------------------------------------------------------------------

def _imag_pairing(z, w):
    """Im(z . conj(w)) for stacks of complex points of shape (..., n)."""
    return np.sum(z.imag * w.real - z.real * w.imag, axis=-1)


def twisted_convolution(f: GridFunction, g: GridFunction, lam: float,
                        chunk: int = 256) -> GridFunction:
    """Direct O(N^2) quadrature of (f *_lam g)(z) on the common grid."""
    if not f.same_grid(g):
        raise ValueError("grids do not match")
    m = f.points_per_axis
    naxes = 2 * f.n
    # difference lattice: f((i - j) h) = values[i - j + m//2] when in range
    pad = np.zeros((2 * m - 1,) * naxes, dtype=complex)
    core = tuple(slice(m // 2, m // 2 + m) for _ in range(naxes))
    pad[core] = np.zeros_like(f.values)  # allocate then fill to keep shape checks obvious
    pad[core] = f.values
    padflat = pad.ravel()
    strides = np.array([(2 * m - 1) ** (naxes - 1 - a) for a in range(naxes)])

    zp = f.zpoints()
    gv = g.values.ravel()
    N = zp.shape[0]
    grid_idx = np.stack(np.unravel_index(np.arange(N), f.values.shape), axis=-1)

    out = np.empty(N, dtype=complex)
    half = 1j * 0.5 * lam
    for start in range(0, N, chunk):
        stop = min(start + chunk, N)
        di = grid_idx[start:stop, None, :] - grid_idx[None, :, :] + (m - 1)  # within padded range
        flat = (di * strides).sum(axis=-1)
        fdiff = padflat[flat]
        phase = np.exp(half * _imag_pairing(zp[start:stop, None, :], zp[None, :, :]))
        out[start:stop] = (fdiff * gv[None, :] * phase).sum(axis=1)
    out *= f.cell_volume
    return GridFunction(f.n, f.extent, out.reshape(f.values.shape))


def symplectic_fourier(f: GridFunction, lam: float, chunk: int = 512) -> GridFunction:
    """F_lam f(z) = (2 pi)^{-n} int f(w) e^{-i (lam/2) Im(z . conj w)} dw  (= f *_lam 1)."""
    zp = f.zpoints()
    gv = f.values.ravel()
    N = zp.shape[0]
    out = np.empty(N, dtype=complex)
    half = -1j * 0.5 * lam
    for start in range(0, N, chunk):
        stop = min(start + chunk, N)
        phase = np.exp(half * _imag_pairing(zp[start:stop, None, :], zp[None, :, :]))
        out[start:stop] = phase @ gv
    out *= f.cell_volume * (2 * np.pi) ** (-f.n)
    return GridFunction(f.n, f.extent, out.reshape(f.values.shape))


def euclidean_fourier(f: GridFunction, freqs: np.ndarray) -> np.ndarray:
    """f_hat(xi) = int f(w) e^{-i xi . w} dw at real frequency points (m, 2n)."""
    freqs = np.atleast_2d(np.asarray(freqs, dtype=float))
    zp = f.zpoints()
    w_real = np.concatenate([np.stack([zp[:, j].real, zp[:, j].imag], axis=-1)
                             for j in range(f.n)], axis=-1)
    phase = np.exp(-1j * freqs @ w_real.T)
    return phase @ f.values.ravel() * f.cell_volume


# ---------------------------------------------------------------------------
# Weyl correspondence of bigraded monomials / polynomials
# ---------------------------------------------------------------------------

def weyl_correspondence_monomial(spec: HermiteBasisSpec, j: int, k: int,
                                 a: int, b: int) -> OperatorMatrix:
    """Matrix of the correspondence of z_j^a conj(z_k)^b.

    Implemented as  c(a,b) lam^{-(a+b)} (A_k*)^b (A_j)^a  with the constant
    taken from the calibration registry (c(0,0) = 1 pins the identity).  The
    mixed same-axis case a, b > 0 with j == k is not constructible here and is
    rejected.
    """
    from .registry import monomial_constant

    if a < 0 or b < 0:
        raise ValueError("monomial exponents must be >= 0")
    if not (1 <= j <= spec.n and 1 <= k <= spec.n):
        raise ValueError("axis out of range")
    if a > 0 and b > 0 and j == k:
        raise ValueError(
            "same-axis mixed monomials z_j^a conj(z_j)^b with a, b > 0 are outside "
            "the implemented correspondence (stated only for distinct axes)")
    from .hermite import identity, ladder_matrix
    op = identity(spec)
    for _ in range(a):
        op = op @ ladder_matrix(spec, "annihilate", j)
    for _ in range(b):
        op = ladder_matrix(spec, "create", k) @ op
    lam = spec.lam
    c = monomial_constant(a, b) * abs(lam) ** (0.5 * (a + b))
    return (c * lam ** (-(a + b))) * op


def weyl_correspondence(P, spec: HermiteBasisSpec) -> OperatorMatrix:
    """Linear extension of the monomial correspondence to a bigraded polynomial.

    ``P`` is a SolidHarmonic (or anything with a ``coeffs`` mapping
    (alpha, beta) -> complex).  Each monomial must touch at most one z-axis and
    one conj-axis; unsupported monomials propagate the restriction error.
    """
    from .hermite import OperatorMatrix as OM
    total = OM(spec, np.zeros((spec.size, spec.size), dtype=complex))
    for (alpha, beta), coeff in P.coeffs.items():
        if coeff == 0:
            continue
        ja = [i for i, e in enumerate(alpha) if e > 0]
        jb = [i for i, e in enumerate(beta) if e > 0]
        if len(ja) > 1 or len(jb) > 1:
            raise ValueError(f"monomial {alpha}|{beta} touches several axes; not implemented")
        a = alpha[ja[0]] if ja else 0
        b = beta[jb[0]] if jb else 0
        j = ja[0] + 1 if ja else 1
        k = jb[0] + 1 if jb else j
        total = total + coeff * weyl_correspondence_monomial(spec, j, k, a, b)
    return total


# ---------------------------------------------------------------------------
# JSON serialization (binary-free)
# ---------------------------------------------------------------------------

def operator_to_json(op: OperatorMatrix) -> str:
    """Documented schema: basis {n, lambda, trunc_k}, shape, row-major re/im pairs."""
    payload = {
        "kind": "operator_matrix",
        "basis": {"n": op.basis.n, "lambda": op.basis.lam, "trunc_k": op.basis.kmax},
        "shape": list(op.mat.shape),
        "leakage": op.leakage,
        "entries": [[v.real, v.imag] for v in op.mat.ravel()],
    }
    return json.dumps(payload, sort_keys=True)


def operator_from_json(text: str) -> OperatorMatrix:
    payload = json.loads(text)
    if payload.get("kind") != "operator_matrix":
        raise ValueError("not an operator_matrix payload")
    b = payload["basis"]
    spec = HermiteBasisSpec(b["n"], b["lambda"], b["trunc_k"])
    flat = np.array([complex(re, im) for re, im in payload["entries"]])
    return OperatorMatrix(spec, flat.reshape(payload["shape"]), payload.get("leakage", 0.0))


def gridfunction_to_json(f: GridFunction) -> str:
    payload = {
        "kind": "grid_function",
        "n": f.n,
        "extent": f.extent,
        "points_per_axis": f.points_per_axis,
        "entries": [[v.real, v.imag] for v in f.values.ravel()],
    }
    return json.dumps(payload, sort_keys=True)


def gridfunction_from_json(text: str) -> GridFunction:
    payload = json.loads(text)
    if payload.get("kind") != "grid_function":
        raise ValueError("not a grid_function payload")
    m, n = payload["points_per_axis"], payload["n"]
    flat = np.array([complex(re, im) for re, im in payload["entries"]])
    return GridFunction(n, payload["extent"], flat.reshape((m,) * (2 * n)))
