"""Pure-numpy stepping kernels, API-identical to the compiled module.

Used automatically when the compiled extension is missing or when
``ADIALAB_NO_EXT`` is set. Batched eigendecompositions go through numpy's
stacked ``eigh``; the sequential chain product is a plain python loop.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def expi_herm_batch(hs: np.ndarray, coeff: float, out: np.ndarray | None = None) -> np.ndarray:
    """Replace each Hermitian matrix H in the (n, d, d) stack by exp(1j*coeff*H)."""
    w, v = np.linalg.eigh(hs)
    phases = np.exp(1j * coeff * w)
    m = np.matmul(v * phases[..., None, :], v.conj().swapaxes(-1, -2))
    if out is None:
        return m
    out[...] = m
    return out


def chain_apply(
    us: np.ndarray,
    psi: np.ndarray,
    u_accum: np.ndarray | None = None,
    sample_every: int = 0,
    k_offset: int = 0,
    psi_samples: np.ndarray | None = None,
    u_samples: np.ndarray | None = None,
    sample_pos: int = 0,
) -> int:
    """Apply a stack of unitaries in order: psi <- us[k] psi (in place).

    When ``u_accum`` is given it accumulates the ordered product
    u_accum <- us[k] u_accum alongside. After applying the step with global
    index g = k_offset + k + 1, the current psi (and product, if tracked) is
    written to ``psi_samples``/``u_samples`` at ``sample_pos`` whenever
    ``sample_every`` > 0 divides g. Returns the advanced sample position.
    """
    n = us.shape[0]
    for k in range(n):
        uk = us[k]
        psi[...] = uk @ psi
        if u_accum is not None:
            u_accum[...] = uk @ u_accum
        if sample_every > 0 and (k_offset + k + 1) % sample_every == 0:
            psi_samples[sample_pos] = psi
            if u_samples is not None:
                u_samples[sample_pos] = u_accum
            sample_pos += 1
    return sample_pos
