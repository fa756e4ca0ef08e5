"""Precoders: eigenfunction-domain interference cancellation plus baselines.

The main precoder projects the data grid onto the receive-side eigenfunctions
of a channel decomposition, divides by the singular values, and resynthesizes
on the conjugated transmit-side eigenfunctions.  Sent through the channel,
each mode arrives flat-faded, so the receiver sees the data grid itself with
no spatial, temporal, or joint interference (up to truncated modes).

Two per-time-instant baselines are included for comparison: plain spatial
zero-forcing and QR-based zero-forcing dirty-paper coding.  Both ignore the
delay dimension, so they cancel only spatial interference.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .channel import ImpulseResponse4D, SpaceTimeSignal
from .errors import (
    DegenerateChannelError,
    DimensionMismatchError,
    NumericalError,
)
from .kernels import EigenDecomposition, TruncationPolicy, _freeze, ensure_grid

__all__ = [
    "CoefficientSet",
    "EnergyReport",
    "hogmt_precode",
    "energy_report",
    "zf_precode_instant",
    "zfdpc_precode",
    "DEFAULT_SIGMA_FLOOR_REL",
]

# Modes with sigma_n below this fraction of sigma_1 are never inverted;
# their projected energy is reported instead of being amplified.
DEFAULT_SIGMA_FLOOR_REL = 1e-10


@dataclass(frozen=True)
class CoefficientSet:
    """Per-mode precoding coefficients and data projections.

    ``x_coeffs[n] * sigma_n == s_coeffs[n]`` for every retained mode;
    ``dropped_energy`` is the summed squared projection magnitude of the
    modes excluded by truncation or the sigma floor, which upper-bounds the
    energy of the unreconstructed part of the data grid.
    """

    x_coeffs: np.ndarray
    s_coeffs: np.ndarray
    retained: int
    dropped_energy: float

    def __post_init__(self):
        x = np.asarray(self.x_coeffs, dtype=np.complex128)
        s = np.asarray(self.s_coeffs, dtype=np.complex128)
        if x.ndim != 1 or s.ndim != 1 or x.size != s.size:
            raise DimensionMismatchError(
                f"coefficient arrays must be 1-D of equal length, got "
                f"{x.shape} and {s.shape}"
            )
        if x.size != self.retained:
            raise DimensionMismatchError(
                f"retained count {self.retained} does not match coefficient "
                f"length {x.size}"
            )
        if self.dropped_energy < 0:
            raise ValueError("dropped_energy cannot be negative")
        object.__setattr__(self, "x_coeffs", _freeze(x))
        object.__setattr__(self, "s_coeffs", _freeze(s))


@dataclass(frozen=True)
class EnergyReport:
    """Per-mode energy accounting of a precoding operation.

    For each retained mode: ``gains`` are the squared singular values,
    ``cost_energy[n] = |x_n|^2`` is what the transmitter spends and
    ``cancelled_energy[n] = |s_n|^2`` is what arrives, related by
    cost * gain = cancelled.  Cumulative curves are normalized to end at 1
    (or stay at 0 for an all-zero quantity).
    """

    gains: np.ndarray
    cost_energy: np.ndarray
    cancelled_energy: np.ndarray
    cum_gain: np.ndarray
    cum_cost: np.ndarray
    cum_cancelled: np.ndarray
    total_tx_energy: float
    dropped_energy: float


def _cumulative_normalized(values: np.ndarray) -> np.ndarray:
    total = float(values.sum())
    if total <= 0.0:
        return np.zeros_like(values)
    return np.cumsum(values) / total


def hogmt_precode(
    decomp: EigenDecomposition,
    s: SpaceTimeSignal | np.ndarray,
    policy: TruncationPolicy | None = None,
    sigma_floor_rel: float = DEFAULT_SIGMA_FLOOR_REL,
) -> tuple[SpaceTimeSignal, CoefficientSet]:
    """Precode a data grid through a channel decomposition.

    x = sum over retained modes of (<s, psi_n> / sigma_n) * conj(phi_n),
    with <a, b> conjugating the second argument.  Retention follows
    ``policy`` (default: keep everything) intersected with the relative
    sigma floor; if no mode survives the floor the channel is degenerate.
    """
    if policy is None:
        policy = TruncationPolicy.full()
    grid = ensure_grid(getattr(s, "grid", s), "data signal")
    if grid.shape != decomp.source_dims[:2]:
        raise DimensionMismatchError(
            f"data shape {grid.shape} does not match receive-side grid "
            f"{decomp.source_dims[:2]}"
        )
    n_keep = policy.retained_count(decomp.sigmas, floor_rel=sigma_floor_rel)
    if n_keep == 0:
        raise DegenerateChannelError(
            "every mode falls below the singular-value floor "
            f"(largest sigma = {decomp.sigmas[0] if decomp.n_modes else 0.0})"
        )
    # projections on all modes; the tail beyond n_keep is only reported
    proj = np.einsum(
        "ut,nut->n", grid, np.conj(decomp.psis), optimize=True
    )
    s_coeffs = proj[:n_keep]
    x_coeffs = s_coeffs / decomp.sigmas[:n_keep]
    x_grid = np.einsum(
        "n,nvs->vs", x_coeffs, np.conj(decomp.phis[:n_keep]), optimize=True
    )
    dropped = float(np.sum(np.abs(proj[n_keep:]) ** 2))
    coeffs = CoefficientSet(
        x_coeffs=x_coeffs,
        s_coeffs=s_coeffs,
        retained=n_keep,
        dropped_energy=dropped,
    )
    return SpaceTimeSignal(grid=x_grid, role="precoded"), coeffs


def energy_report(decomp: EigenDecomposition, coeffs: CoefficientSet) -> EnergyReport:
    """Energy accounting for a coefficient set produced by :func:`hogmt_precode`."""
    n = coeffs.retained
    if n > decomp.n_modes:
        raise DimensionMismatchError(
            f"coefficient set retains {n} modes but the decomposition has "
            f"only {decomp.n_modes}"
        )
    gains = decomp.lambdas[:n]
    cost = np.abs(coeffs.x_coeffs) ** 2
    cancelled = np.abs(coeffs.s_coeffs) ** 2
    return EnergyReport(
        gains=gains,
        cost_energy=cost,
        cancelled_energy=cancelled,
        cum_gain=_cumulative_normalized(gains),
        cum_cost=_cumulative_normalized(cost),
        cum_cancelled=_cumulative_normalized(cancelled),
        total_tx_energy=float(cost.sum()),
        dropped_energy=coeffs.dropped_energy,
    )


def _instant_matrices(h: ImpulseResponse4D) -> np.ndarray:
    """Narrowband per-instant matrices H(t) = sum over taps, shape (L_t, L_u, L_u')."""
    return np.moveaxis(h.values.sum(axis=3), 2, 0)


def _check_signal(h: ImpulseResponse4D, s) -> np.ndarray:
    grid = ensure_grid(getattr(s, "grid", s), "data signal")
    l_u, l_up, l_t, _ = h.dims
    if grid.shape != (l_u, l_t):
        raise DimensionMismatchError(
            f"data shape {grid.shape} does not match channel output dims "
            f"({l_u}, {l_t})"
        )
    return grid


def zf_precode_instant(
    h: ImpulseResponse4D, s: SpaceTimeSignal | np.ndarray
) -> SpaceTimeSignal:
    """Per-instant spatial zero-forcing baseline.

    Inverts the tap-summed matrix at each time symbol (pseudo-inverse when
    singular, with a warning).  Delay taps are ignored, so temporal and
    joint interference pass through untouched.
    """
    grid = _check_signal(h, s)
    mats = _instant_matrices(h)
    l_t = mats.shape[0]
    pinvs = np.linalg.pinv(mats)
    full = min(mats.shape[1], mats.shape[2])
    ranks = np.linalg.matrix_rank(mats)
    deficient = int(np.count_nonzero(ranks < full))
    if deficient:
        warnings.warn(
            f"{deficient} of {l_t} per-instant matrices are rank-deficient; "
            "pseudo-inverse used",
            stacklevel=2,
        )
    x = np.einsum("tij,jt->it", pinvs, grid, optimize=True)
    return SpaceTimeSignal(grid=x, role="precoded")


def zfdpc_precode(
    h: ImpulseResponse4D,
    s: SpaceTimeSignal | np.ndarray,
    modulation: str | None = None,
) -> SpaceTimeSignal:
    """Per-instant QR-based zero-forcing dirty-paper baseline.

    Factor the conjugate transpose of each instantaneous matrix as Q R, so
    the channel becomes lower-triangular in the encoding order.  Streams are
    encoded in natural order; each symbol pre-subtracts the interference of
    already-encoded streams and divides by the matching diagonal of R, which
    makes the spatial part arrive clean.  ``modulation`` is accepted for
    interface symmetry with modulo-lattice variants but is not used by this
    plain linear pre-subtraction.
    """
    del modulation
    grid = _check_signal(h, s)
    mats = _instant_matrices(h)
    l_t, l_u, l_up = mats.shape
    if l_u != l_up:
        raise DimensionMismatchError(
            f"dirty-paper baseline needs square per-instant matrices, got "
            f"{l_u}x{l_up}"
        )
    x = np.empty((l_up, l_t), dtype=np.complex128)
    eps = np.finfo(float).eps
    for ti in range(l_t):
        q, r = np.linalg.qr(mats[ti].conj().T)
        diag = np.abs(np.diag(r))
        tol = l_u * eps * (diag.max() if diag.size else 0.0)
        if np.any(diag <= tol):
            raise NumericalError(
                f"rank-deficient instantaneous channel at time symbol {ti}: "
                "zero diagonal in the QR factor"
            )
        # lower-triangular system R^H w = s(t), solved in encoding order
        w = scipy.linalg.solve_triangular(
            r.conj().T, grid[:, ti], lower=True, check_finite=False
        )
        x[:, ti] = q @ w
    return SpaceTimeSignal(grid=x, role="precoded")
