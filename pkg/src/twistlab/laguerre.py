"""Spectral theory of the twisted Laplacian L(lam) on C^n.

The operator

    L(lam) = -Delta + (lam^2/4)|z|^2 + i lam sum_j (x_j d/dy_j - y_j d/dx_j)

has pure point spectrum (2k + n)|lam|; the projection onto the k-th eigenspace
is twisted convolution with the scaled Laguerre function

    phi_k(z) = L_k^{n-1}(|z'|^2 / 2) e^{-|z'|^2/4},   z' = sqrt|lam| z,

normalized by (2 pi)^{-n} |lam|^n.  Heat, Bessel-type and fundamental-solution
kernels are all subordinated integrals of the closed-form heat kernel; their
quadratures substitute u = log t to tame the endpoint behaviour and target a
relative error of 1e-8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .weyl import GridFunction, SmoothFunction, as_zpoints, grid_from_callable, twisted_convolution


@dataclass(frozen=True)
class LaguerreSpec:
    """Laguerre type index nu (= n - 1 in spectral use) and scaling lam."""

    nu: float
    lam: float

    def __post_init__(self):
        if self.nu <= -1:
            raise ValueError("type index must exceed -1")
        if self.lam == 0:
            raise ValueError("scaling lam must be nonzero")


def laguerre_polynomials(kmax: int, nu: float, t: np.ndarray) -> np.ndarray:
    """L_0^nu .. L_kmax^nu at points t by the three-term recurrence."""
    t = np.asarray(t, dtype=float)
    out = np.empty((kmax + 1,) + t.shape)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = 1.0 + nu - t
    for k in range(1, kmax):
        out[k + 1] = ((2 * k + 1 + nu - t) * out[k] - (k + nu) * out[k - 1]) / (k + 1.0)
    return out


def laguerre_eval(spec: LaguerreSpec, k: int, points) -> np.ndarray:
    """phi_{k,lam}^nu(z) = L_k^nu(|z'|^2/2) exp(-|z'|^2/4), z' = sqrt|lam| z."""
    if k < 0:
        raise ValueError("k must be >= 0")
    n = 1 if np.isscalar(points) or np.asarray(points).ndim <= 1 else np.asarray(points).shape[1]
    pts = as_zpoints(points, n)
    r2 = np.sum(np.abs(pts) ** 2, axis=-1) * abs(spec.lam)
    polys = laguerre_polynomials(k, spec.nu, 0.5 * r2)
    return polys[k] * np.exp(-0.25 * r2)


def laguerre_grid(spec: LaguerreSpec, k: int, n: int, extent: float, m: int) -> GridFunction:
    return grid_from_callable(lambda z: laguerre_eval(spec, k, z), n, extent, m)


def special_hermite_projection(f: GridFunction, k: int, lam: float) -> GridFunction:
    """Pi_k f = (2 pi)^{-n} |lam|^n  f *_lam phi_{k,lam}^{n-1}."""
    spec = LaguerreSpec(nu=f.n - 1, lam=lam)
    phi = laguerre_grid(spec, k, f.n, f.extent, f.points_per_axis)
    conv = twisted_convolution(f, phi, lam)
    scale = (2 * np.pi) ** (-f.n) * abs(lam) ** f.n
    return GridFunction(f.n, f.extent, scale * conv.values)


def twisted_laplacian_apply(f: SmoothFunction, lam: float, points) -> np.ndarray:
    """Pointwise L(lam) f; needs the Laplacian evaluator on f."""
    if f.lap is None:
        raise ValueError("twisted Laplacian needs second derivatives (lap evaluator)")
    pts = as_zpoints(points, f.n)
    val = f.value(pts)
    out = -f.lap(pts) + 0.25 * lam ** 2 * np.sum(np.abs(pts) ** 2, axis=-1) * val
    for j in range(1, f.n + 1):
        x = pts[:, j - 1].real
        y = pts[:, j - 1].imag
        out = out + 1j * lam * (x * f.dy(pts, j) - y * f.dx(pts, j))
    return out


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

def heat_kernel(t: float, lam: float, r2, n: int = 1):
    """p_t^lam at squared radius r2 = |z|^2 (closed form; even in lam)."""
    if t <= 0:
        raise ValueError("heat kernel needs t > 0")
    al = abs(lam)
    if al == 0:
        return (4 * np.pi * t) ** (-n) * np.exp(-np.asarray(r2) / (4.0 * t))
    return ((4 * np.pi) ** (-n) * (al / np.sinh(t * al)) ** n
            * np.exp(-0.25 * al / np.tanh(t * al) * np.asarray(r2)))


@dataclass(frozen=True)
class TwistedKernelQuery:
    """Kernel request: kind in {'heat', 'bessel', 'fundamental'} with parameters.

    heat:        needs t > 0
    bessel:      K^s_{lam,d}, needs s > 0 and d + n > 0
    fundamental: kernel of L(lam)^{-1}, needs z != 0
    """

    kind: str
    lam: float
    z: complex
    n: int = 1
    t: float = None
    s: float = None
    d: float = 0.0

    def __post_init__(self):
        if self.lam == 0:
            raise ValueError("lam must be nonzero")
        if self.kind == "heat":
            if self.t is None or self.t <= 0:
                raise ValueError("heat kernel needs t > 0")
        elif self.kind == "bessel":
            if self.s is None or self.s <= 0:
                raise ValueError("bessel kernel needs s > 0")
            if self.d + self.n <= 0:
                raise ValueError(
                    f"bessel kernel with d = {self.d} violates integrability (need d + n > 0)")
        elif self.kind == "fundamental":
            if self.z == 0:
                raise ValueError("fundamental solution is singular at z = 0")
        else:
            raise ValueError(f"unknown kernel kind {self.kind!r}")


def _log_quad(integrand, rel_tol=1e-8, lo=1e-14, hi=None):
    """Adaptive quadrature of int_0^inf integrand(t) dt via u = log t."""
    hi = hi or 1e8
    val, err = quad(lambda u: integrand(np.exp(u)) * np.exp(u),
                    np.log(lo), np.log(hi), epsabs=0.0, epsrel=rel_tol, limit=400)
    return val, err


def twisted_kernel_eval(query: TwistedKernelQuery) -> float:
    """Evaluate the requested kernel at z; quadrature kinds target rel. error 1e-8."""
    r2 = abs(query.z) ** 2
    n, lam = query.n, query.lam
    if query.kind == "heat":
        return float(heat_kernel(query.t, lam, r2, n))
    if query.kind == "bessel":
        s, d = query.s, query.d
        al = abs(lam)

        def integrand(t):
            return t ** (s - 1.0) * np.exp(-d * al * t) * heat_kernel(t, lam, r2, n)

        val, _ = _log_quad(integrand, hi=max(200.0 / (al * (n + d)), 10.0))
        return float(val / math.gamma(s))
    # fundamental: c * e^{-|lam| r2 / 4} int (s(s+2))^{n/2-1} e^{-|lam| s r2/4} ds
    from .registry import fundamental_constant
    al = abs(lam)
    c = fundamental_constant() * al ** (n - 1)

    def integrand(u):
        return (u * (u + 2.0)) ** (n / 2.0 - 1.0) * np.exp(-0.25 * al * u * r2)

    val, _ = _log_quad(integrand, hi=max(400.0 / (al * r2), 10.0))
    return float(c * np.exp(-0.25 * al * r2) * val)


def fundamental_by_subordination(lam: float, z: complex, n: int = 1) -> float:
    """Independent route to the same kernel: K_lam(z) = int_0^inf p_t^lam(z) dt."""
    r2 = abs(z) ** 2
    val, _ = _log_quad(lambda t: heat_kernel(t, lam, r2, n),
                       hi=max(200.0 / (n * abs(lam)), 10.0))
    return float(val)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

@dataclass
class L1Result:
    value: float
    tail_estimate: float
    divergent: bool
    annulus_sums: np.ndarray


def l1_norm(f: GridFunction, shells: int = 8) -> L1Result:
    """Grid L^1 norm with a tail estimate from the outer annuli.

    The outermost ``shells`` radial annuli are summed separately; if they fail
    to decrease the divergence flag is raised, otherwise the tail beyond the
    grid is estimated by geometric extrapolation of the last two annuli.
    """
    absv = np.abs(f.values).ravel() * f.cell_volume
    radii = np.sqrt(np.sum(np.abs(f.zpoints()) ** 2, axis=-1))
    rmax = radii.max()
    edges = np.linspace(0.0, rmax, shells + 1)
    sums = np.array([absv[(radii >= lo) & (radii < hi)].sum()
                     for lo, hi in zip(edges[:-1], edges[1:])])
    total = float(absv.sum())
    outer = sums[-min(3, shells):]
    divergent = bool(np.any(np.diff(outer) > 0) and outer[-1] > 1e-14 * total)
    if sums[-2] > 0 and sums[-1] < sums[-2]:
        ratio = sums[-1] / sums[-2]
        tail = float(sums[-1] * ratio / max(1.0 - ratio, 1e-9))
    else:
        tail = float(sums[-1])
    return L1Result(value=total, tail_estimate=tail, divergent=divergent, annulus_sums=sums)


def sobolev_norm(f: SmoothFunction, lam: float, N: int = 1, homogeneous: bool = False,
                 extent: float = 10.0, points_per_axis: int = 96) -> float:
    """First-order twisted Sobolev norm: grid L^1 norms of f and of the fields
    Z_j(lam) f = df/dz_j - (lam/4) conj(z_j) f,  Zbar_j(lam) f = df/dconj(z_j) + (lam/4) z_j f.

    Only N = 1 is implemented; the homogeneous flag drops the ||f||_1 term.
    """
    if N != 1:
        raise ValueError("only first-order Sobolev norms are implemented (N = 1)")
    base = grid_from_callable(f.value, f.n, extent, points_per_axis)
    pts = base.zpoints()
    dv = base.cell_volume
    total = 0.0 if homogeneous else float(np.sum(np.abs(base.values)) * dv)
    vals = f.value(pts)
    for j in range(1, f.n + 1):
        zj = pts[:, j - 1]
        zf = f.d_z(pts, j) - 0.25 * lam * np.conj(zj) * vals
        zbf = f.d_zbar(pts, j) + 0.25 * lam * zj * vals
        total += float(np.sum(np.abs(zf)) * dv) + float(np.sum(np.abs(zbf)) * dv)
    return total
