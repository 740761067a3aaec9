"""Reproducible Gaussian test batteries.

All verification experiments draw their test functions from here: modulated
Gaussian packets with centres, widths and modulations produced by a fixed
seed, so every run of the suite sees the same battery.  Packets know their own
first partials, Laplacian and Euclidean Fourier transform in closed form,
which is what makes them usable as independent oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .weyl import GridFunction, SmoothFunction, as_zpoints, grid_from_callable

BATTERY_SEED = 20240

@dataclass(frozen=True)
class GaussianPacket:
    """amp * exp(-|z - c|^2 / (2 sigma^2)) * exp(i m . (x, y)) on C^n."""

    n: int
    amp: float
    center: tuple          # complex, length n
    sigma: float
    mod: tuple             # real, length 2n

    def _real_parts(self, points):
        pts = as_zpoints(points, self.n)
        coords = np.concatenate(
            [np.stack([pts[:, j].real, pts[:, j].imag], axis=-1) for j in range(self.n)],
            axis=-1)
        c = np.array([[z.real, z.imag] for z in np.asarray(self.center, dtype=complex)]).ravel()
        return coords, c

    def value(self, points):
        coords, c = self._real_parts(points)
        m = np.asarray(self.mod, dtype=float)
        quad = np.sum((coords - c) ** 2, axis=-1)
        return self.amp * np.exp(-quad / (2 * self.sigma ** 2) + 1j * coords @ m)

    def _log_derivative(self, points, axis):
        coords, c = self._real_parts(points)
        m = np.asarray(self.mod, dtype=float)
        return -(coords[:, axis] - c[axis]) / self.sigma ** 2 + 1j * m[axis]

    def dx(self, points, j=1):
        return self.value(points) * self._log_derivative(points, 2 * (j - 1))

    def dy(self, points, j=1):
        return self.value(points) * self._log_derivative(points, 2 * (j - 1) + 1)

    def lap(self, points):
        coords, c = self._real_parts(points)
        m = np.asarray(self.mod, dtype=float)
        g = -(coords - c) / self.sigma ** 2 + 1j * m
        return self.value(points) * (np.sum(g * g, axis=-1) - 2 * self.n / self.sigma ** 2)

    def fourier(self, freqs):
        """f_hat(xi) = int f(w) e^{-i xi . w} dw at real frequencies (m, 2n)."""
        freqs = np.atleast_2d(np.asarray(freqs, dtype=float))
        m = np.asarray(self.mod, dtype=float)
        c = np.array([[z.real, z.imag] for z in np.asarray(self.center, dtype=complex)]).ravel()
        shift = freqs - m
        return (self.amp * (2 * np.pi * self.sigma ** 2) ** self.n
                * np.exp(-0.5 * self.sigma ** 2 * np.sum(shift ** 2, axis=-1)
                         - 1j * shift @ c))

    def as_smooth(self) -> SmoothFunction:
        return SmoothFunction(n=self.n, value=self.value, dx=self.dx, dy=self.dy,
                              lap=self.lap, fourier=self.fourier,
                              meta={"packet": self})

    def to_grid(self, extent: float, points_per_axis: int) -> GridFunction:
        return grid_from_callable(self.value, self.n, extent, points_per_axis)


def gaussian_battery(count: int = 10, n: int = 1, seed: int = BATTERY_SEED):
    """The seeded packet list used by every battery-based check."""
    rng = np.random.default_rng(seed)
    packets = []
    for _ in range(count):
        amp = rng.uniform(0.6, 1.4)
        center = tuple(complex(rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9))
                       for _ in range(n))
        sigma = rng.uniform(0.85, 1.4)
        mod = tuple(rng.uniform(-1.5, 1.5) for _ in range(2 * n))
        packets.append(GaussianPacket(n=n, amp=amp, center=center, sigma=sigma, mod=mod))
    return packets


@dataclass(frozen=True)
class Gaussian3D:
    """Schwartz packet on C x R: amp * exp(-|z - c|^2/(2 s^2) - (t - ct)^2/(2 st^2))."""

    amp: float = 1.0
    center: complex = 0j
    center_t: float = 0.0
    sigma: float = 1.0
    sigma_t: float = 1.0

    def value(self, z, t):
        z = np.asarray(z, dtype=complex)
        t = np.asarray(t, dtype=float)
        return self.amp * np.exp(-np.abs(z - self.center) ** 2 / (2 * self.sigma ** 2)
                                 - (t - self.center_t) ** 2 / (2 * self.sigma_t ** 2))

    def dx(self, z, t):
        return self.value(z, t) * (-(np.real(z - self.center)) / self.sigma ** 2)

    def dy(self, z, t):
        return self.value(z, t) * (-(np.imag(z - self.center)) / self.sigma ** 2)

    def dt(self, z, t):
        return self.value(z, t) * (-(np.asarray(t) - self.center_t) / self.sigma_t ** 2)
