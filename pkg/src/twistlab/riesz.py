"""Scaled Riesz transforms of the twisted Laplacian and their lam -> 0 limits.

The negative fractional power acts on the Fourier side as

    L(-lam)^{-s} f(z) = (2 pi)^{-2} int f_hat(zeta) e^{i zeta . z}
                        w_s(|zeta + (lam/2) J z|^2) d zeta,
    w_s(rho) = Gamma(s)^{-1} int_0^inf t^{s-1} cosh(lam t)^{-n}
               exp(-(tanh(lam t)/lam) rho) dt,          J(x, y) = (y, -x),

obtained by taking the Gaussian heat factor to the frequency side; as lam -> 0
the weight tends to |zeta|^{-2s} and the J-shift disappears, leaving the
Euclidean operator.  Fields are applied under the integral sign: each
application of Z(-lam) = d/dz + (lam/4) conj(z) or Zbar(-lam) = d/dconj(z)
- (lam/4) z either multiplies the integrand by an explicit factor or by a
coordinate monomial, so arbitrary first/second order combinations reduce to a
handful of frequency-side weights.

The proportionality constant between the scaled and Euclidean transforms is
never assumed: it is fitted by least squares at the smallest lam in a run and
reported as an empirical quantity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .weyl import SmoothFunction, as_zpoints


# ---------------------------------------------------------------------------
# vector fields
# ---------------------------------------------------------------------------

FIELD_KINDS = ("Z", "Zbar", "Z_right", "Zbar_right")


@dataclass(frozen=True)
class FieldSpec:
    """One of Z_j(lam), Zbar_j(lam) or their right-invariant versions Z_j(-lam)."""

    kind: str
    axis: int = 1
    lam: float = 1.0

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise ValueError(f"kind must be one of {FIELD_KINDS}")


def field_apply(field: FieldSpec, f: SmoothFunction, points) -> np.ndarray:
    """Pointwise exact application of the twisted field to a smooth evaluator."""
    if field.axis < 1 or field.axis > f.n:
        raise ValueError("field axis out of range")
    pts = as_zpoints(points, f.n)
    j = field.axis
    zj = pts[:, j - 1]
    lam = field.lam if field.kind in ("Z", "Zbar") else -field.lam
    if field.kind in ("Z", "Z_right"):
        return f.d_z(pts, j) - 0.25 * lam * np.conj(zj) * f.value(pts)
    return f.d_zbar(pts, j) + 0.25 * lam * zj * f.value(pts)


def dilate_smooth(f: SmoothFunction, lam: float) -> SmoothFunction:
    """f_lam(z) = f(z / sqrt(lam)) with analytically rescaled partials."""
    root = np.sqrt(lam)

    def value(pts):
        return f.value(pts / root)

    def dx(pts, j=1):
        return f.dx(pts / root, j) / root

    def dy(pts, j=1):
        return f.dy(pts / root, j) / root

    lap = None
    if f.lap is not None:
        def lap(pts):  # noqa: F811
            return f.lap(pts / root) / lam

    return SmoothFunction(n=f.n, value=value, dx=dx, dy=dy, lap=lap)


# ---------------------------------------------------------------------------
# field composition algebra: ops as {(i, j, p, q): coeff} meaning
# z^p conj(z)^q d_z^i d_zbar^j
# ---------------------------------------------------------------------------

def _compose_field(op: dict, which: str, lam: float) -> dict:
    out = {}

    def add(key, val):
        out[key] = out.get(key, 0.0) + val

    for (i, j, p, q), c in op.items():
        if which == "Z":       # d_z + (lam/4) conj(z)
            add((i + 1, j, p, q), c)
            if p:
                add((i, j, p - 1, q), c * p)
            add((i, j, p, q + 1), c * lam / 4.0)
        else:                   # d_zbar - (lam/4) z
            add((i, j + 1, p, q), c)
            if q:
                add((i, j, p, q - 1), c * q)
            add((i, j, p + 1, q), -c * lam / 4.0)
    return {k: v for k, v in out.items() if v != 0}


def _riesz_field_op(alpha: int, beta: int, lam: float) -> dict:
    """Z(-lam)^alpha Zbar(-lam)^beta as a composed operator table (n = 1)."""
    op = {(0, 0, 0, 0): 1.0}
    for _ in range(beta):
        op = _compose_field(op, "Zbar", -lam)
    for _ in range(alpha):
        op = _compose_field(op, "Z", -lam)
    return op


# ---------------------------------------------------------------------------
# frequency grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FourierGrid:
    """Uniform frequency lattice on [-F, F)^2 used by both transform routes."""

    extent: float = 12.0
    points_per_axis: int = 128

    def axes(self):
        h = 2.0 * self.extent / self.points_per_axis
        ax = -self.extent + h * np.arange(self.points_per_axis)
        return ax, h

    def mesh(self):
        ax, h = self.axes()
        zu, zv = np.meshgrid(ax, ax, indexing="ij")
        return zu.ravel(), zv.ravel(), h * h


def _fourier_samples(f: SmoothFunction, grid: FourierGrid):
    zu, zv, dzeta = grid.mesh()
    freqs = np.stack([zu, zv], axis=-1)
    if f.fourier is not None:
        fh = f.fourier(freqs)
    else:
        raise ValueError("smooth function must carry a Fourier evaluator")
    return zu, zv, fh, dzeta


# ---------------------------------------------------------------------------
# the subordinated transform engine (n = 1)
# ---------------------------------------------------------------------------

def _t_nodes(s: float, lam: float, panels: int = 36, order: int = 8,
             t_min: float = 1e-10, t_max: float = None):
    t_max = t_max or (60.0 + 10.0 * s) / max(lam, 1e-12)
    gl_x, gl_w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(np.log(t_min), np.log(t_max), panels + 1)
    t, w = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        u = mid + half * gl_x
        t.append(np.exp(u))
        w.append(gl_w * half * np.exp(u))   # du-measure times dt/du
    return np.concatenate(t), np.concatenate(w), t_min


def subordination_weight(s: float, lam: float, rho, n: int = 1) -> np.ndarray:
    """w_s(rho): frequency-side weight of L(-lam)^{-s}; tends to rho^{-s} as lam -> 0."""
    from scipy.special import gamma
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    t, w, t_min = _t_nodes(s, lam)
    tau = np.tanh(lam * t) / lam if lam != 0 else t
    body = (t ** (s - 1.0) * np.cosh(lam * t) ** (-n) * w)[None, :] \
        * np.exp(-np.outer(rho, tau))
    head = t_min ** s / s * np.exp(-rho * 0.0)  # small-t slab, integrand -> 1
    return (body.sum(axis=1) + head) / gamma(s)


def _apply_op_transform(f: SmoothFunction, op: dict, s: float, lam: float,
                        points, grid: FourierGrid) -> np.ndarray:
    """sum over op terms of z^p conj(z)^q d_z^i d_zbar^j L(-lam)^{-s} f at points."""
    from scipy.special import gamma

    if f.n != 1:
        raise NotImplementedError("the subordinated transform is implemented for n = 1")
    pts = as_zpoints(points, 1)[:, 0]
    zu, zv, fh, dzeta = _fourier_samples(f, grid)
    t_nodes, t_w, t_min = _t_nodes(s, lam)
    pref = dzeta / (2 * np.pi) ** 2 / gamma(s)
    need = sorted({(i, j) for (i, j, _, _) in op})

    tau_nodes = np.tanh(lam * t_nodes) / lam if lam != 0 else t_nodes
    mass = t_w * t_nodes ** (s - 1.0) * np.cosh(lam * t_nodes) ** (-1.0)

    out = np.zeros(pts.shape, dtype=complex)
    for ip, z in enumerate(pts):
        x, y = z.real, z.imag
        xi_u = zu + 0.5 * lam * y
        xi_v = zv - 0.5 * lam * x
        rho = xi_u ** 2 + xi_v ** 2
        plane = fh * np.exp(1j * (zu * x + zv * y))
        sums = {ij: 0j for ij in need}
        for tau, wn in zip(tau_nodes, mass):
            pg = plane * np.exp(-tau * rho)
            for ij in need:
                d = _derivative_factor(*ij, zu, zv, xi_u, xi_v, tau, lam)
                sums[ij] += wn * np.sum(pg * d)
        for ij in need:  # small-t slab, integrand at tau = 0
            d0 = _derivative_factor(*ij, zu, zv, xi_u, xi_v, 0.0, lam)
            sums[ij] = (sums[ij] + (t_min ** s / s) * np.sum(plane * d0)) * pref
        total = 0j
        for (i, j, p, q), c in op.items():
            total += c * z ** p * np.conj(z) ** q * sums[(i, j)]
        out[ip] = total
    return out


def _derivative_factor(i, j, zu, zv, xi_u, xi_v, tau, lam):
    """Frequency-side factor of d_z^i d_zbar^j on the shifted Gaussian integrand."""
    if i == j == 0:
        return 1.0
    bz = 0.5 * (1j * (zu + tau * lam * xi_u) + (zv + tau * lam * xi_v))
    bzb = 0.5 * (1j * (zu - tau * lam * xi_u) - (zv - tau * lam * xi_v))
    if (i, j) == (1, 0):
        return bz
    if (i, j) == (0, 1):
        return bzb
    if (i, j) == (2, 0):
        return bz * bz
    if (i, j) == (0, 2):
        return bzb * bzb
    if (i, j) == (1, 1):
        return bz * bzb - tau * lam ** 2 / 4.0
    raise ValueError("field orders above two are out of scope")


def _orders(alpha, beta):
    def one(m):
        if np.isscalar(m):
            return int(m)
        m = tuple(m)
        if len(m) != 1:
            raise NotImplementedError("implemented for n = 1 (length-1 multi-indices)")
        return int(m[0])
    a, b = one(alpha), one(beta)
    if a < 0 or b < 0:
        raise ValueError("orders must be non-negative")
    if a + b > 2:
        raise ValueError("total order above two is out of scope")
    return a, b


def fractional_twisted_inverse(f: SmoothFunction, s: float, lam: float, points,
                               grid: FourierGrid = None) -> np.ndarray:
    """L(-lam)^{-s} f at the given points (s > 0, lam > 0)."""
    if s <= 0:
        raise ValueError("s must be positive")
    if lam <= 0:
        raise ValueError("lam must be positive (limits are taken from above)")
    grid = grid or FourierGrid()
    return _apply_op_transform(f, {(0, 0, 0, 0): 1.0}, s, lam, points, grid)


def scaled_riesz(f: SmoothFunction, alpha, beta, lam: float, points,
                 grid: FourierGrid = None) -> np.ndarray:
    """Z(-lam)^alpha Zbar(-lam)^beta L(-lam)^{-(|alpha|+|beta|)/2} f at points."""
    a, b = _orders(alpha, beta)
    if a == b == 0:
        return f.value(as_zpoints(points, f.n))
    grid = grid or FourierGrid()
    op = _riesz_field_op(a, b, lam)
    return _apply_op_transform(f, op, 0.5 * (a + b), lam, points, grid)


def euclidean_riesz(f: SmoothFunction, alpha, beta, points,
                    grid: FourierGrid = None) -> np.ndarray:
    """(d/dx - i d/dy)^alpha (d/dx + i d/dy)^beta (-Delta)^{-(|alpha|+|beta|)/2} f."""
    a, b = _orders(alpha, beta)
    pts = as_zpoints(points, 1)[:, 0]
    if a == b == 0:
        return f.value(pts)
    grid = grid or FourierGrid()
    zu, zv, fh, dzeta = _fourier_samples(f, grid)
    rho = zu ** 2 + zv ** 2
    symbol = (1j * (zu - 1j * zv)) ** a * (1j * (zu + 1j * zv)) ** b * rho ** (-0.5 * (a + b))
    out = np.empty(pts.shape, dtype=complex)
    for ip, z in enumerate(pts):
        phase = np.exp(1j * (zu * z.real + zv * z.imag))
        out[ip] = np.sum(fh * symbol * phase) * dzeta / (2 * np.pi) ** 2
    return out


def riesz_symbol_homogeneity(alpha, beta, rays=((1.0, 0.3), (-0.4, 1.1)), scales=(0.5, 2.0, 7.0)):
    """Max variation of the Euclidean symbol along rays zeta -> r zeta (degree-zero check)."""
    a, b = _orders(alpha, beta)
    worst = 0.0
    for (u, v) in rays:
        vals = []
        for r in scales:
            zu, zv = r * u, r * v
            rho = zu ** 2 + zv ** 2
            vals.append((1j * (zu - 1j * zv)) ** a * (1j * (zu + 1j * zv)) ** b
                        * rho ** (-0.5 * (a + b)))
        worst = max(worst, float(np.max(np.abs(np.diff(vals)))))
    return worst


def limit_experiment(f: SmoothFunction, alpha, beta, lambda_seq, points,
                     grid: FourierGrid = None) -> dict:
    """Pointwise lam -> 0 comparison of the scaled and Euclidean transforms.

    The constant is fitted by least squares at the smallest lam and frozen;
    errors for every lam are measured against that single fit.
    """
    lams = sorted(float(l) for l in lambda_seq)
    if lams[0] <= 0:
        raise ValueError("lambda sequence must be positive")
    grid = grid or FourierGrid()
    pts = as_zpoints(points, 1)[:, 0]
    euclid = euclidean_riesz(f, alpha, beta, pts, grid)
    scaled = {lam: scaled_riesz(f, alpha, beta, lam, pts, grid) for lam in lams}
    smallest = lams[0]
    ref = scaled[smallest]
    denom = np.vdot(euclid, euclid).real
    const = complex(np.vdot(euclid, ref) / denom) if denom > 0 else 0j
    errors = {lam: float(np.max(np.abs(scaled[lam] - const * euclid))) for lam in lams}
    err_seq = [errors[lam] for lam in sorted(lams, reverse=True)]  # decreasing lam
    scale = float(np.max(np.abs(const * euclid))) or 1.0
    return {
        "lambdas": sorted(lams, reverse=True),
        "errors": err_seq,
        "fitted_constant": const,
        "monotone": all(e1 > e2 for e1, e2 in zip(err_seq, err_seq[1:])),
        "final_rel_error": err_seq[-1] / scale,
        "scaled_values": scaled,
        "euclid_values": euclid,
    }
