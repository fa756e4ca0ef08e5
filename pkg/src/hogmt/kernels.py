"""4-D channel kernels and their dual-eigenfunction decomposition.

A kernel K[u, t, u', t'] maps a transmitted space-time grid x[u', t'] to a
received grid r[u, t].  Flattening both index pairs row-major (time fastest)
turns the kernel into an ordinary matrix; its complex SVD yields singular
values sigma_n together with a receive-side eigenfunction grid psi_n(u, t)
and a transmit-side grid phi_n(u', t') per mode.  The stored phi_n holds the
conjugated right singular vectors, so that sending conj(phi_n) through the
kernel returns sigma_n * psi_n (the flat-fading subchannel property used by
the precoder).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    NumericalError,
    ValidationError,
)

__all__ = [
    "FlattenMap",
    "Kernel4D",
    "TruncationPolicy",
    "EigenDecomposition",
    "ensure_grid",
    "flatten_index",
    "unflatten_index",
    "flatten_kernel",
    "unflatten_kernel",
    "decompose_grid_pairs",
    "hogmt_decompose",
    "reconstruct",
    "apply_kernel",
    "frobenius_inner",
    "duality_residual",
]


def ensure_grid(data, name: str = "grid") -> np.ndarray:
    """Validate and return a 2-D complex grid (finite, both dims >= 1).

    Grids are plain complex128 ndarrays throughout the package; this is the
    single entry point that enforces their invariants.
    """
    arr = np.asarray(data, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"{name} must have both dims >= 1, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    """Return a C-contiguous read-only view-owning copy of ``arr``."""
    out = np.ascontiguousarray(arr)
    if out is arr or out.base is not None:
        out = out.copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class FlattenMap:
    """Bijection between (row, col) pairs and a single index m = row*n_cols + col."""

    n_rows: int
    n_cols: int

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValidationError(
                f"FlattenMap dims must be >= 1, got ({self.n_rows}, {self.n_cols})"
            )

    @property
    def size(self) -> int:
        return self.n_rows * self.n_cols


def flatten_index(u: int, t: int, fmap: FlattenMap) -> int:
    """Map a (row, col) pair to its flat index, row-major with col fastest."""
    if not (0 <= u < fmap.n_rows and 0 <= t < fmap.n_cols):
        raise ValidationError(
            f"index ({u}, {t}) out of range for map {fmap.n_rows}x{fmap.n_cols}"
        )
    return u * fmap.n_cols + t


def unflatten_index(m: int, fmap: FlattenMap) -> tuple[int, int]:
    """Inverse of :func:`flatten_index`."""
    if not (0 <= m < fmap.size):
        raise ValidationError(f"flat index {m} out of range for size {fmap.size}")
    return divmod(m, fmap.n_cols)


@dataclass(frozen=True)
class Kernel4D:
    """Discrete 4-D channel kernel with entries indexed (u, t, u', t').

    Dims: L_u receive users, L_t output time symbols, L_u' transmit antennas,
    L_t' input time symbols with L_t' == L_t (block-wise operation over a
    common time horizon).
    """

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.complex128)
        if arr.ndim != 4:
            raise ValidationError(f"kernel must be 4-D, got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise ValidationError(f"kernel dims must all be >= 1, got {arr.shape}")
        if arr.shape[1] != arr.shape[3]:
            raise ValidationError(
                "kernel input/output time lengths must match, got "
                f"L_t={arr.shape[1]} and L_t'={arr.shape[3]}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValidationError("kernel contains non-finite entries")
        object.__setattr__(self, "values", _freeze(arr))

    @property
    def dims(self) -> tuple[int, int, int, int]:
        """(L_u, L_t, L_u', L_t')."""
        return self.values.shape

    @property
    def frob_norm(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclass(frozen=True)
class TruncationPolicy:
    """Mode-retention rule for decompositions and precoding.

    mode "full" keeps every mode above the relative singular-value floor;
    "count_fraction" additionally caps the count at ceil(fraction * n_modes)
    taken in descending sigma order; "sigma_rel_floor" keeps modes with
    sigma_n >= sigma_rel_floor * sigma_1.
    """

    mode: str = "full"
    count_fraction: float = 1.0
    sigma_rel_floor: float = 1e-12

    _MODES = ("full", "count_fraction", "sigma_rel_floor")

    def __post_init__(self):
        if self.mode not in self._MODES:
            raise ValidationError(
                f"policy mode must be one of {self._MODES}, got {self.mode!r}"
            )
        if not (0.0 < self.count_fraction <= 1.0):
            raise ValidationError(
                f"count_fraction must be in (0, 1], got {self.count_fraction}"
            )
        if not (0.0 <= self.sigma_rel_floor < 1.0):
            raise ValidationError(
                f"sigma_rel_floor must be in [0, 1), got {self.sigma_rel_floor}"
            )

    @classmethod
    def full(cls) -> "TruncationPolicy":
        return cls()

    @classmethod
    def fraction(cls, f: float) -> "TruncationPolicy":
        return cls(mode="count_fraction", count_fraction=f)

    @classmethod
    def sigma_floor(cls, rel: float) -> "TruncationPolicy":
        return cls(mode="sigma_rel_floor", sigma_rel_floor=rel)

    def retained_count(self, sigmas: np.ndarray, floor_rel: float | None = None) -> int:
        """Number of leading modes retained from a descending sigma array.

        ``floor_rel`` overrides the policy's relative floor when a caller
        needs a stricter one (the precoder does).
        """
        sigmas = np.asarray(sigmas, dtype=float)
        n = sigmas.size
        if n == 0 or sigmas[0] <= 0.0:
            return 0
        floor = self.sigma_rel_floor if floor_rel is None else max(
            self.sigma_rel_floor, floor_rel
        )
        keep = int(np.count_nonzero(sigmas >= floor * sigmas[0]))
        if self.mode == "count_fraction":
            keep = min(keep, math.ceil(self.count_fraction * n))
        return keep


@dataclass(frozen=True)
class EigenDecomposition:
    """Ordered singular values with dual eigenfunction grids.

    sigmas[n] are descending and nonnegative; psis[n] is the receive-side
    grid over the first index pair, phis[n] the transmit-side grid over the
    second pair (conjugated right singular vectors).  lambdas = sigmas**2 is
    the per-mode transmission gain of a single kernel realization.
    """

    sigmas: np.ndarray
    psis: np.ndarray  # shape (n_modes, rows, cols) of the first index pair
    phis: np.ndarray  # shape (n_modes, rows', cols') of the second index pair
    source_dims: tuple[int, int, int, int]

    def __post_init__(self):
        sig = np.asarray(self.sigmas, dtype=float)
        psis = np.asarray(self.psis, dtype=np.complex128)
        phis = np.asarray(self.phis, dtype=np.complex128)
        if sig.ndim != 1 or psis.ndim != 3 or phis.ndim != 3:
            raise ValidationError("decomposition arrays have wrong ranks")
        n = sig.size
        if psis.shape[0] != n or phis.shape[0] != n:
            raise DimensionMismatchError(
                f"mode counts disagree: {n} sigmas, {psis.shape[0]} psis, "
                f"{phis.shape[0]} phis"
            )
        d = tuple(int(x) for x in self.source_dims)
        if len(d) != 4:
            raise ValidationError("source_dims must be a 4-tuple")
        if psis.shape[1:] != d[:2] or phis.shape[1:] != d[2:]:
            raise DimensionMismatchError(
                f"eigenfunction grids {psis.shape[1:]}/{phis.shape[1:]} do not "
                f"match source dims {d}"
            )
        if not np.all(np.isfinite(sig)) or np.any(sig < 0):
            raise ValidationError("sigmas must be finite and nonnegative")
        if n > 1 and np.any(np.diff(sig) > 0):
            raise ValidationError("sigmas must be sorted descending")
        object.__setattr__(self, "sigmas", _freeze(sig))
        object.__setattr__(self, "psis", _freeze(psis))
        object.__setattr__(self, "phis", _freeze(phis))
        object.__setattr__(self, "source_dims", d)

    @property
    def n_modes(self) -> int:
        return self.sigmas.size

    @property
    def lambdas(self) -> np.ndarray:
        """Per-mode transmission gains sigma_n**2."""
        return self.sigmas**2


def flatten_kernel(kernel: Kernel4D) -> np.ndarray:
    """Matrix view of the kernel: rows (u, t) flattened, cols (u', t')."""
    l_u, l_t, l_up, l_tp = kernel.dims
    return kernel.values.reshape(l_u * l_t, l_up * l_tp)


def unflatten_kernel(
    matrix: np.ndarray, dims: tuple[int, int, int, int]
) -> Kernel4D:
    """Inverse of :func:`flatten_kernel` for the given four dims."""
    l_u, l_t, l_up, l_tp = dims
    mat = np.asarray(matrix, dtype=np.complex128)
    if mat.shape != (l_u * l_t, l_up * l_tp):
        raise DimensionMismatchError(
            f"matrix shape {mat.shape} does not match dims {dims}"
        )
    return Kernel4D(mat.reshape(l_u, l_t, l_up, l_tp))


def decompose_grid_pairs(
    matrix: np.ndarray,
    row_shape: tuple[int, int],
    col_shape: tuple[int, int],
    policy: TruncationPolicy | None = None,
) -> EigenDecomposition:
    """SVD engine behind :func:`hogmt_decompose`.

    ``matrix`` is the flattened operator whose rows index the first 2-D grid
    (shape ``row_shape``) and whose columns index the second (``col_shape``).
    Works for any pair of grid shapes, which lets the statistics module
    decompose time-frequency x delay-Doppler operators with the same code.
    """
    if policy is None:
        policy = TruncationPolicy.full()
    mat = np.asarray(matrix, dtype=np.complex128)
    if not np.all(np.isfinite(mat)):
        raise ValidationError("matrix contains non-finite entries")
    if mat.shape != (row_shape[0] * row_shape[1], col_shape[0] * col_shape[1]):
        raise DimensionMismatchError(
            f"matrix shape {mat.shape} inconsistent with grid shapes "
            f"{row_shape} x {col_shape}"
        )
    try:
        u_mat, sig, vh_mat = np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"SVD failed to converge on a {mat.shape} matrix: {exc}"
        ) from exc

    keep = policy.retained_count(sig)
    if keep == 0 and sig.size > 0 and sig[0] > 0.0:
        keep = 1  # never return an empty decomposition for a nonzero operator
    u_mat = u_mat[:, :keep]
    sig = sig[:keep]
    vh_mat = vh_mat[:keep, :]

    # Phase convention: rotate each (u_n, v_n) pair so that the
    # largest-magnitude entry of the receive-side vector is real positive.
    for n in range(keep):
        col = u_mat[:, n]
        k = int(np.argmax(np.abs(col)))
        a = col[k]
        if np.abs(a) > 0.0:
            rot = np.conj(a) / np.abs(a)
            u_mat[:, n] = col * rot
            # keeping u_n v_n^H invariant requires the conjugate rotation on
            # the stored conj(v_n) row
            vh_mat[n, :] = vh_mat[n, :] * np.conj(rot)

    dims = (*row_shape, *col_shape)
    psis = np.ascontiguousarray(u_mat.T).reshape(keep, *row_shape)
    phis = vh_mat.reshape(keep, *col_shape)
    return EigenDecomposition(sigmas=sig, psis=psis, phis=phis, source_dims=dims)


def hogmt_decompose(
    kernel: Kernel4D, policy: TruncationPolicy | None = None
) -> EigenDecomposition:
    """Decompose a 4-D kernel into dual 2-D eigenfunction pairs.

    Returns descending sigma_n with grids psi_n(u, t) and phi_n(u', t') such
    that K = sum_n sigma_n * psi_n (x) phi_n and sending conj(phi_n) through
    the kernel yields sigma_n * psi_n.
    """
    l_u, l_t, l_up, l_tp = kernel.dims
    return decompose_grid_pairs(
        flatten_kernel(kernel), (l_u, l_t), (l_up, l_tp), policy
    )


def reconstruct(decomp: EigenDecomposition) -> Kernel4D:
    """Rebuild the kernel sum_n sigma_n * psi_n (x) phi_n."""
    d = decomp.source_dims
    if d[1] != d[3]:
        raise DimensionMismatchError(
            "reconstruction to a channel kernel requires matching time "
            f"lengths, got source dims {d}"
        )
    vals = np.einsum(
        "n,nut,nvs->utvs", decomp.sigmas, decomp.psis, decomp.phis, optimize=True
    )
    return Kernel4D(vals)


def apply_kernel(kernel: Kernel4D, x):
    """Noise-free channel output r[u, t] = sum_{u', t'} K[u,t,u',t'] x[u',t'].

    ``x`` may be a plain 2-D grid or any object carrying one in a ``grid``
    attribute (a space-time signal); the result mirrors the input kind.
    """
    grid = getattr(x, "grid", x)
    grid = ensure_grid(grid, "input signal")
    l_u, l_t, l_up, l_tp = kernel.dims
    if grid.shape != (l_up, l_tp):
        raise DimensionMismatchError(
            f"signal shape {grid.shape} does not match kernel input dims "
            f"({l_up}, {l_tp})"
        )
    flat = flatten_kernel(kernel) @ grid.reshape(-1)
    out = flat.reshape(l_u, l_t)
    if hasattr(x, "grid"):
        return type(x)(grid=out, role="received")
    return out


def frobenius_inner(a, b) -> complex:
    """<a, b> = sum_ij a[i,j] * conj(b[i,j]) (conjugation on the second arg)."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise DimensionMismatchError(
            f"grids must have equal shapes, got {a.shape} and {b.shape}"
        )
    return complex(np.sum(a * np.conj(b)))


def duality_residual(kernel: Kernel4D, decomp: EigenDecomposition) -> float:
    """Worst-case relative error of the subchannel duality.

    For every mode, sending conj(phi_n) through the kernel should return
    sigma_n * psi_n; the result is max_n of the Frobenius error normalized by
    max(sigma_1, machine epsilon).
    """
    if decomp.n_modes == 0:
        raise ValidationError("duality residual of an empty decomposition")
    l_u, l_t, l_up, l_tp = kernel.dims
    if decomp.source_dims != (l_u, l_t, l_up, l_tp):
        raise DimensionMismatchError(
            f"decomposition dims {decomp.source_dims} do not match kernel "
            f"dims {kernel.dims}"
        )
    mat = flatten_kernel(kernel)
    # columns: conj(phi_n) flattened; kernel applied to all modes at once
    sent = np.conj(decomp.phis.reshape(decomp.n_modes, -1)).T
    got = mat @ sent
    want = decomp.psis.reshape(decomp.n_modes, -1).T * decomp.sigmas[np.newaxis, :]
    errs = np.linalg.norm(got - want, axis=0)
    scale = max(float(decomp.sigmas[0]), float(np.finfo(float).eps))
    return float(errs.max() / scale)
