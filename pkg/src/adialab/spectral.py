"""Smooth eigenbranch tracking along a schedule, plus the derived spectral
objects the bound checks need: reduced resolvents, gauge-fixed eigenvector
derivatives, chain-norm inequalities, and the eigenvalue shift reduction.

The gauge is discrete parallel transport: the branch eigenvector at each
grid point is phase-rotated so its overlap with the previous frame is real
and positive. That kills the first-order phase freedom, so finite
differences of the frames approximate the derivative of the eigenvector in
the <phi'|phi> = 0 gauge. The first frame's phase comes from the
deterministic convention in ``matcore.eig_hermitian``, which makes whole
tracks reproducible run to run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import matcore
from .errors import ContinuityLoss, GapCollapse, NumericalFailure, OutOfRange
from .schedule import HamiltonianSchedule, Tabulated

__all__ = [
    "ChainNorms",
    "EigenTrack",
    "SpectralFrame",
    "chain_norm_quantities",
    "hellmann_feynman",
    "phi_derivatives",
    "shift_schedule",
    "track",
    "track_to_csv",
]

DEFAULT_GRID = 2001
MIN_OVERLAP = 0.7
GAP_REL_TOL = 1e-9


@dataclass(frozen=True)
class SpectralFrame:
    """One grid point of a tracked branch."""

    s: float
    eigenvalues: np.ndarray
    tracked_index: int
    phi: np.ndarray
    gamma: float
    gap: float
    resolvent: np.ndarray


@dataclass
class EigenTrack:
    """A tracked eigenbranch: frames on a uniform s grid."""

    branch: int
    s_grid: np.ndarray
    frames: list[SpectralFrame]
    min_gap: float
    _memo: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def grid_size(self) -> int:
        return len(self.s_grid)

    @property
    def ds(self) -> float:
        return float(self.s_grid[1] - self.s_grid[0])

    @cached_property
    def phis(self) -> np.ndarray:
        """Gauge-fixed eigenvectors stacked (grid_size, dim)."""
        return np.stack([f.phi for f in self.frames])

    @cached_property
    def gammas(self) -> np.ndarray:
        return np.array([f.gamma for f in self.frames])

    @cached_property
    def gaps(self) -> np.ndarray:
        return np.array([f.gap for f in self.frames])

    @cached_property
    def h_max(self) -> float:
        """max_s ||H(s)|| over the grid (spectral norm = largest |eigenvalue|)."""
        return float(max(np.max(np.abs(f.eigenvalues)) for f in self.frames))

    def phi_d1(self) -> np.ndarray:
        """d(phi)/ds by second-order differences of the gauge-fixed frames."""
        if "phi_d1" not in self._memo:
            self._memo["phi_d1"] = _diff1(self.phis, self.ds)
        return self._memo["phi_d1"]

    def phi_d2(self) -> np.ndarray:
        """d2(phi)/ds2 by second-order differences of the gauge-fixed frames."""
        if "phi_d2" not in self._memo:
            self._memo["phi_d2"] = _diff2(self.phis, self.ds)
        return self._memo["phi_d2"]

    def gamma_d1(self) -> np.ndarray:
        if "gamma_d1" not in self._memo:
            self._memo["gamma_d1"] = _diff1(self.gammas, self.ds)
        return self._memo["gamma_d1"]

    def gamma_d2(self) -> np.ndarray:
        if "gamma_d2" not in self._memo:
            self._memo["gamma_d2"] = _diff2(self.gammas, self.ds)
        return self._memo["gamma_d2"]


def _diff1(y: np.ndarray, ds: float) -> np.ndarray:
    if len(y) < 4:
        raise OutOfRange("need at least 4 grid points for derivative stencils")
    out = np.empty_like(y)
    out[1:-1] = (y[2:] - y[:-2]) / (2 * ds)
    out[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2 * ds)
    out[-1] = (3.0 * y[-1] - 4.0 * y[-2] + y[-3]) / (2 * ds)
    return out


def _diff2(y: np.ndarray, ds: float) -> np.ndarray:
    if len(y) < 4:
        raise OutOfRange("need at least 4 grid points for derivative stencils")
    out = np.empty_like(y)
    out[1:-1] = (y[2:] - 2.0 * y[1:-1] + y[:-2]) / ds**2
    out[0] = (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) / ds**2
    out[-1] = (2.0 * y[-1] - 5.0 * y[-2] + 4.0 * y[-3] - y[-4]) / ds**2
    return out


def track(
    sched: HamiltonianSchedule,
    branch: int,
    grid_size: int = DEFAULT_GRID,
    phase_rng: np.random.Generator | None = None,
) -> EigenTrack:
    """Follow one eigenbranch of a schedule across a uniform grid.

    The branch starts as the ``branch``-th eigenvalue (ascending) at s = 0
    and is continued by maximal overlap with the previous frame; an overlap
    below 0.7 raises ContinuityLoss (refine the grid), a gap below
    1e-9 * max(1, ||H||) raises GapCollapse. ``phase_rng``, when given,
    scrambles every raw eigenvector phase before gauge fixing; tracks must
    come out identical with or without it, which is how the gauge's
    determinism is tested.
    """
    if grid_size < 2:
        raise ValueError(f"grid_size={grid_size} below 2")
    if not 0 <= branch < sched.dim:
        raise OutOfRange(f"branch {branch} outside [0, {sched.dim})")

    s_grid = np.linspace(0.0, 1.0, grid_size)
    hs = sched.eval_batch(s_grid)
    dev = matcore.max_abs(hs - hs.conj().swapaxes(-1, -2))
    if dev > matcore.HERMITICITY_TOL * max(1.0, matcore.max_abs(hs)):
        raise NumericalFailure(f"schedule batch lost Hermiticity by {dev:.3e}")
    try:
        w_all, v_all = np.linalg.eigh(hs)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigh did not converge on the track grid: {exc}") from exc
    if phase_rng is not None:
        v_all = v_all * np.exp(2j * np.pi * phase_rng.random(w_all.shape))[:, None, :]

    dim = sched.dim
    frames: list[SpectralFrame] = []
    prev_phi: np.ndarray | None = None
    for k in range(grid_size):
        w, v = w_all[k], v_all[k]
        if prev_phi is None:
            idx = branch
            phi = matcore.fix_phase(v[:, idx])
        else:
            overlaps = prev_phi.conj() @ v
            idx = int(np.argmax(np.abs(overlaps)))
            ov = overlaps[idx]
            if abs(ov) < MIN_OVERLAP:
                raise ContinuityLoss(
                    f"branch overlap {abs(ov):.3f} < {MIN_OVERLAP} at s={s_grid[k]:.6f};"
                    " refine the grid"
                )
            phi = v[:, idx] * (np.conj(ov) / abs(ov))
        gamma = float(w[idx])
        others = np.delete(np.arange(dim), idx)
        if len(others):
            gap = float(np.min(np.abs(w[others] - gamma)))
        else:
            gap = np.inf
        if gap < GAP_REL_TOL * max(1.0, float(np.max(np.abs(w)))):
            raise GapCollapse(f"gap {gap:.3e} at s={s_grid[k]:.6f} below resolvable threshold")
        if len(others):
            vo = v[:, others]
            resolvent = (vo / (w[others] - gamma)) @ vo.conj().T
        else:
            resolvent = np.zeros((dim, dim), dtype=complex)
        frames.append(
            SpectralFrame(
                s=float(s_grid[k]),
                eigenvalues=w.copy(),
                tracked_index=idx,
                phi=phi,
                gamma=gamma,
                gap=gap,
                resolvent=resolvent,
            )
        )
        prev_phi = phi
    return EigenTrack(
        branch=branch,
        s_grid=s_grid,
        frames=frames,
        min_gap=float(min(f.gap for f in frames)),
    )


def phi_derivatives(trk: EigenTrack, i: int) -> tuple[np.ndarray, np.ndarray]:
    """(phi'(s_i), phi''(s_i)) in the parallel-transport gauge."""
    if not 0 <= i < trk.grid_size:
        raise OutOfRange(f"index {i} outside the track grid")
    return trk.phi_d1()[i], trk.phi_d2()[i]


@dataclass(frozen=True)
class ChainNorms:
    """Measured resolvent-chain norms at one grid point, with the gap-aware
    upper bounds they must satisfy (in order: for r_phi1, rp_phi1, r_phi2)."""

    s: float
    r_phi1: float
    rp_phi1: float
    r_phi2: float
    bounds: tuple[float, float, float]

    @property
    def margins(self) -> tuple[float, float, float]:
        return (
            self.bounds[0] - self.r_phi1,
            self.bounds[1] - self.rp_phi1,
            self.bounds[2] - self.r_phi2,
        )


def chain_norm_quantities(sched: HamiltonianSchedule, trk: EigenTrack, i: int) -> ChainNorms:
    """||R phi'||, ||R' phi'||, ||R phi''|| at grid point i, with bounds.

    The derivative of the reduced resolvent is assembled from the tracked
    frame as R' = -R P' - P' R - R H' R with P' = |phi'><phi| + |phi><phi'|.
    The caller must pass a schedule whose tracked eigenvalue is identically
    zero (see ``shift_schedule``); the bounds compare against
    ||H'||/gap^2, 2||H'||^2/gap^3 and ||H''||/gap^2 + 2||H'||^2/gap^3 at the
    same grid point.
    """
    if not 0 <= i < trk.grid_size:
        raise OutOfRange(f"index {i} outside the track grid")
    frame = trk.frames[i]
    phi1, phi2 = phi_derivatives(trk, i)
    r = frame.resolvent
    pp = np.outer(phi1, frame.phi.conj()) + np.outer(frame.phi, phi1.conj())
    h1 = sched.eval_d1(frame.s)
    rp = -r @ pp - pp @ r - r @ h1 @ r
    lam = frame.gap
    h1n = matcore.operator_norm(h1)
    h2n = matcore.operator_norm(sched.eval_d2(frame.s))
    return ChainNorms(
        s=frame.s,
        r_phi1=float(np.linalg.norm(r @ phi1)),
        rp_phi1=float(np.linalg.norm(rp @ phi1)),
        r_phi2=float(np.linalg.norm(r @ phi2)),
        bounds=(
            h1n / lam**2,
            2.0 * h1n**2 / lam**3,
            h2n / lam**2 + 2.0 * h1n**2 / lam**3,
        ),
    )


def hellmann_feynman(sched: HamiltonianSchedule, trk: EigenTrack, i: int) -> tuple[float, float]:
    """(finite-difference gamma', <phi|H'|phi>) at grid point i.

    The two must agree for a correctly tracked smooth branch; the expectation
    value's imaginary part is discarded after the Hermiticity of H' makes it
    vanish to roundoff.
    """
    if not 0 <= i < trk.grid_size:
        raise OutOfRange(f"index {i} outside the track grid")
    frame = trk.frames[i]
    fd = float(trk.gamma_d1()[i])
    hf = complex(frame.phi.conj() @ sched.eval_d1(frame.s) @ frame.phi)
    return fd, float(hf.real)


def shift_schedule(sched: HamiltonianSchedule, trk: EigenTrack) -> Tabulated:
    """Tabulated schedule of H(s_k) - gamma(s_k) * identity over the track grid.

    The shifted schedule's tracked eigenvalue is zero at every knot, its
    eigenvectors (hence gaps and resolvents) are unchanged, and propagating
    it instead of the original removes the dynamical phase of the branch.
    """
    eye = np.eye(sched.dim)
    mats = np.stack([sched.eval(f.s) - f.gamma * eye for f in trk.frames])
    return Tabulated(trk.s_grid, mats)


def track_to_csv(trk: EigenTrack, path: str | Path, meta: str | None = None) -> None:
    """Write s, gamma, gap and the eigenvector components (re/im pairs)."""
    dim = len(trk.frames[0].phi)
    cols = ["s", "gamma", "gap"]
    for a in range(dim):
        cols += [f"phi{a}_re", f"phi{a}_im"]
    rows = np.empty((trk.grid_size, len(cols)))
    rows[:, 0] = trk.s_grid
    rows[:, 1] = trk.gammas
    rows[:, 2] = trk.gaps
    rows[:, 3::2] = trk.phis.real
    rows[:, 4::2] = trk.phis.imag
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if meta:
            fh.write(f"# {meta}\n")
        fh.write(",".join(cols) + "\n")
        np.savetxt(fh, rows, fmt="%.17g", delimiter=",")
