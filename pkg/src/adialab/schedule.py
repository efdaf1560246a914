"""Hamiltonian paths H(s) on the drive parameter s in [0, 1].

Three kinds: linear interpolation between two Hermitian endpoints, a
single-qubit great-circle arc on the Bloch sphere, and tabulated samples
interpolated entrywise with natural cubic splines. Analytic kinds carry
closed-form first and second derivatives; the tabulated kind differentiates
its spline by finite differences (stencil steps fixed below, second-order
one-sided variants within one step of the edges).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from . import matcore
from .errors import DomainError, InterpolationGap, OutOfRange

__all__ = [
    "DerivativeNorms",
    "HamiltonianSchedule",
    "LinearInterpolation",
    "QubitGeodesic",
    "Tabulated",
    "bloch_hamiltonian",
    "bloch_vector",
    "fd_d1",
    "fd_d2",
    "linear_qubit_gap",
    "linear_qubit_min_gap",
    "qubit_linear",
    "random_linear",
]

FD_STEP_D1 = 1e-5
FD_STEP_D2 = 1e-4
DEFAULT_NORM_GRID = 1001


@dataclass(frozen=True)
class DerivativeNorms:
    """Path-wide maxima of the derivative spectral norms.

    ``grid_size`` records the scan resolution; 0 marks a closed-form value.
    """

    h1_max: float
    h2_max: float
    grid_size: int


def _check_s(s: float) -> float:
    s = float(s)
    if not 0.0 <= s <= 1.0:
        raise OutOfRange(f"s={s} outside [0, 1]")
    return s


def fd_d1(f, s: float, h: float = FD_STEP_D1) -> np.ndarray:
    """Second-order first derivative of a matrix-valued f at s in [0, 1].

    Central stencil in the interior, one-sided second-order stencil within
    one step of either edge.
    """
    s = _check_s(s)
    if s < h:
        return (-3.0 * f(s) + 4.0 * f(s + h) - f(s + 2 * h)) / (2 * h)
    if s > 1.0 - h:
        return (3.0 * f(s) - 4.0 * f(s - h) + f(s - 2 * h)) / (2 * h)
    return (f(s + h) - f(s - h)) / (2 * h)


def fd_d2(f, s: float, h: float = FD_STEP_D2) -> np.ndarray:
    """Second-order second derivative of a matrix-valued f at s in [0, 1]."""
    s = _check_s(s)
    if s < h:
        return (2.0 * f(s) - 5.0 * f(s + h) + 4.0 * f(s + 2 * h) - f(s + 3 * h)) / h**2
    if s > 1.0 - h:
        return (2.0 * f(s) - 5.0 * f(s - h) + 4.0 * f(s - 2 * h) - f(s - 3 * h)) / h**2
    return (f(s + h) - 2.0 * f(s) + f(s - h)) / h**2


class HamiltonianSchedule:
    """Base class: a path of Hermitian dim x dim matrices over s in [0, 1]."""

    kind: str = "abstract"

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def eval(self, s: float) -> np.ndarray:
        """H(s); validates the parameter range and Hermiticity."""
        raise NotImplementedError

    def eval_d1(self, s: float) -> np.ndarray:
        """dH/ds at s."""
        raise NotImplementedError

    def eval_d2(self, s: float) -> np.ndarray:
        """d2H/ds2 at s."""
        raise NotImplementedError

    def eval_batch(self, s: np.ndarray) -> np.ndarray:
        """H at every s in a 1-d array, stacked (n, dim, dim).

        Subclasses override with vectorized versions; results are Hermitian
        by construction for every kind (endpoints/samples validated on
        construction, trig builds manifestly Hermitian).
        """
        return np.stack([self.eval(float(x)) for x in np.asarray(s, dtype=float)])

    def exact_derivative_norms(self) -> DerivativeNorms | None:
        """Closed-form (h1_max, h2_max) when the kind has one, else None."""
        return None

    def derivative_norms(self, grid_size: int = DEFAULT_NORM_GRID) -> DerivativeNorms:
        """Grid scan of max_s ||H'(s)|| and max_s ||H''(s)||."""
        if grid_size < 2:
            raise ValueError(f"grid_size={grid_size} below 2")
        ss = np.linspace(0.0, 1.0, grid_size)
        h1 = max(matcore.operator_norm(self.eval_d1(float(s))) for s in ss)
        h2 = max(matcore.operator_norm(self.eval_d2(float(s))) for s in ss)
        return DerivativeNorms(h1_max=h1, h2_max=h2, grid_size=grid_size)


class LinearInterpolation(HamiltonianSchedule):
    """H(s) = (1 - s) H0 + s H1 between two Hermitian endpoints."""

    kind = "linear"

    def __init__(self, h0: np.ndarray, h1: np.ndarray):
        self._h0 = matcore.require_hermitian(h0, what="H0")
        self._h1 = matcore.require_hermitian(h1, what="H1")
        if self._h0.shape != self._h1.shape:
            raise ValueError(f"endpoint shapes differ: {self._h0.shape} vs {self._h1.shape}")
        self._diff = self._h1 - self._h0

    @property
    def dim(self) -> int:
        return self._h0.shape[0]

    @property
    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return self._h0.copy(), self._h1.copy()

    def eval(self, s: float) -> np.ndarray:
        s = _check_s(s)
        return matcore.require_hermitian((1.0 - s) * self._h0 + s * self._h1, what="H(s)")

    def eval_batch(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return self._h0[None] + s[:, None, None] * self._diff[None]

    def eval_d1(self, s: float) -> np.ndarray:
        _check_s(s)
        return self._diff.copy()

    def eval_d2(self, s: float) -> np.ndarray:
        _check_s(s)
        return np.zeros_like(self._h0)

    def exact_derivative_norms(self) -> DerivativeNorms:
        return DerivativeNorms(matcore.operator_norm(self._diff), 0.0, 0)


def bloch_vector(theta: float, alpha: float) -> np.ndarray:
    """Unit vector at polar angle theta, azimuth alpha."""
    return np.array(
        [np.sin(theta) * np.cos(alpha), np.sin(theta) * np.sin(alpha), np.cos(theta)]
    )


def bloch_hamiltonian(theta: float, alpha: float) -> np.ndarray:
    """n(theta, alpha) . sigma, the qubit Hamiltonian along a Bloch direction."""
    nx, ny, nz = bloch_vector(theta, alpha)
    return nx * matcore.SIGMA_X + ny * matcore.SIGMA_Y + nz * matcore.SIGMA_Z


class QubitGeodesic(HamiltonianSchedule):
    """Great-circle qubit path H(s) = n(s*theta, alpha) . sigma.

    Starts at sigma_z and sweeps the Bloch polar angle to theta along a fixed
    azimuth. Both eigenvalues are +-1 for every s, so the gap is constantly 2
    and the path's speed is |theta| in spectral norm.
    """

    kind = "geodesic"

    def __init__(self, theta: float, alpha: float = 0.0):
        theta = float(theta)
        alpha = float(alpha)
        if not 0.0 <= theta <= np.pi:
            raise DomainError(f"theta={theta} outside [0, pi]")
        if not 0.0 <= alpha < 2 * np.pi:
            raise DomainError(f"alpha={alpha} outside [0, 2*pi)")
        self.theta = theta
        self.alpha = alpha
        self._plane = np.cos(alpha) * matcore.SIGMA_X + np.sin(alpha) * matcore.SIGMA_Y

    @property
    def dim(self) -> int:
        return 2

    def eval(self, s: float) -> np.ndarray:
        s = _check_s(s)
        a = s * self.theta
        return np.sin(a) * self._plane + np.cos(a) * matcore.SIGMA_Z

    def eval_batch(self, s: np.ndarray) -> np.ndarray:
        a = np.asarray(s, dtype=float) * self.theta
        return (
            np.sin(a)[:, None, None] * self._plane[None]
            + np.cos(a)[:, None, None] * matcore.SIGMA_Z[None]
        )

    def eval_d1(self, s: float) -> np.ndarray:
        s = _check_s(s)
        a = s * self.theta
        return self.theta * (np.cos(a) * self._plane - np.sin(a) * matcore.SIGMA_Z)

    def eval_d2(self, s: float) -> np.ndarray:
        return -self.theta**2 * self.eval(s)

    def exact_derivative_norms(self) -> DerivativeNorms:
        return DerivativeNorms(self.theta, self.theta**2, 0)


class Tabulated(HamiltonianSchedule):
    """Schedule from Hermitian samples on a knot grid, natural cubic splines
    entrywise in between. Derivatives are finite differences of the spline."""

    kind = "tabulated"

    def __init__(self, s_grid: np.ndarray, samples: np.ndarray):
        s_grid = np.asarray(s_grid, dtype=float)
        samples = np.asarray(samples, dtype=complex)
        if s_grid.ndim != 1 or len(s_grid) < 2:
            raise InterpolationGap("need at least two knots")
        if samples.ndim != 3 or samples.shape[0] != len(s_grid) or samples.shape[1] != samples.shape[2]:
            raise ValueError(f"samples shape {samples.shape} does not match the knot grid")
        if abs(s_grid[0]) > 1e-12 or abs(s_grid[-1] - 1.0) > 1e-12:
            raise InterpolationGap(
                f"knots span [{s_grid[0]}, {s_grid[-1]}], must cover [0, 1]"
            )
        if np.any(np.diff(s_grid) <= 0):
            raise InterpolationGap("knots must be strictly increasing")
        for k in range(len(s_grid)):
            matcore.require_hermitian(samples[k], what=f"sample at s={s_grid[k]}")
        self._s_grid = s_grid.copy()
        self._s_grid[0] = 0.0
        self._s_grid[-1] = 1.0
        self._samples = samples.copy()
        self._spline = CubicSpline(self._s_grid, self._samples, axis=0, bc_type="natural")

    @property
    def dim(self) -> int:
        return self._samples.shape[1]

    @property
    def knots(self) -> np.ndarray:
        return self._s_grid.copy()

    @property
    def samples(self) -> np.ndarray:
        return self._samples.copy()

    def eval(self, s: float) -> np.ndarray:
        s = _check_s(s)
        return matcore.require_hermitian(self._spline(s), what="H(s)")

    def eval_batch(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return self._spline(s)

    def eval_d1(self, s: float) -> np.ndarray:
        return fd_d1(self._spline, _check_s(s))

    def eval_d2(self, s: float) -> np.ndarray:
        return fd_d2(self._spline, _check_s(s))

    @classmethod
    def from_dict(cls, payload: dict) -> "Tabulated":
        dim = int(payload["dim"])
        ss, mats = [], []
        for entry in payload["samples"]:
            ss.append(float(entry["s"]))
            mats.append(np.asarray(entry["re"], dtype=float) + 1j * np.asarray(entry["im"], dtype=float))
            if mats[-1].shape != (dim, dim):
                raise ValueError(f"sample at s={ss[-1]} has shape {mats[-1].shape}, expected ({dim}, {dim})")
        return cls(np.asarray(ss), np.asarray(mats))

    @classmethod
    def from_json(cls, path: str | Path) -> "Tabulated":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "samples": [
                {"s": float(s), "re": m.real.tolist(), "im": m.imag.tolist()}
                for s, m in zip(self._s_grid, self._samples)
            ],
        }

    def to_json(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)


def qubit_linear(theta: float, alpha: float = 0.0) -> LinearInterpolation:
    """Linear path from sigma_z to n(theta, alpha) . sigma."""
    return LinearInterpolation(matcore.SIGMA_Z, bloch_hamiltonian(theta, alpha))


def linear_qubit_gap(theta: float, s) -> np.ndarray:
    """Closed-form gap 2*sqrt(1 - 2 s (1 - s) (1 - cos theta)) of qubit_linear."""
    s = np.asarray(s, dtype=float)
    return 2.0 * np.sqrt(1.0 - 2.0 * s * (1.0 - s) * (1.0 - np.cos(theta)))


def linear_qubit_min_gap(theta: float) -> float:
    """min_s of linear_qubit_gap, attained at s = 1/2: 2 cos(theta/2)."""
    return float(2.0 * np.cos(theta / 2.0))


def random_linear(dim: int, seed: int, ground_gap: float = 0.8) -> LinearInterpolation:
    """Seeded random interpolation between two Hermitian endpoints.

    Both endpoints share a fixed spectrum: ground eigenvalue -1 separated by
    ``ground_gap`` from the rest, which spread evenly up to +1. Their
    eigenbases are independent Haar-random unitaries (QR of a complex
    Gaussian draw, R-diagonal phases absorbed), so the path between them is
    generic while the endpoint gaps stay under control.
    """
    if dim < 2:
        raise ValueError("need dim >= 2")
    if not 0.0 < ground_gap < 2.0:
        raise ValueError(f"ground_gap={ground_gap} outside (0, 2)")
    rng = np.random.default_rng(seed)
    evals = np.concatenate(([-1.0], np.linspace(-1.0 + ground_gap, 1.0, dim - 1)))
    ends = []
    for _ in range(2):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        q, r = np.linalg.qr(g)
        diag = np.diagonal(r)
        q = q * (diag / np.abs(diag))
        ends.append((q * evals) @ q.conj().T)
    return LinearInterpolation(ends[0], ends[1])
