"""Modulation, AWGN reference curves, and Monte-Carlo BER sweeps.

Constellations are Gray-mapped with unit average energy, built as separable
per-axis Gray PAM (one axis for BPSK).  Demodulation is brute-force minimum
distance over the constellation table.

The BER engine compares precoders on identical footing: per (SNR point,
trial, modulation) the data bits and the noise grid come from dedicated
substreams shared by every precoder, so curves are paired sample-by-sample.
SNR is received-signal-referenced, E_s / sigma_v^2 with E_s = 1; per-bit
SNR for reference curves is E_s / (k * sigma_v^2) for k bits per symbol.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .channel import (
    ImpulseResponse4D,
    ScenarioConfig,
    SpaceTimeSignal,
    generate_channel,
    to_kernel,
)
from .errors import DegenerateChannelError, DimensionMismatchError, ValidationError
from .kernels import TruncationPolicy, flatten_kernel, hogmt_decompose
from .precoding import hogmt_precode, zf_precode_instant, zfdpc_precode

__all__ = [
    "ModulationScheme",
    "SCHEMES",
    "get_scheme",
    "modulate",
    "demodulate",
    "theoretical_awgn_ber",
    "PrecoderSpec",
    "parse_precoder",
    "BerPoint",
    "BerReport",
    "run_ber",
]

_SEED_CHANNEL = 10
_SEED_BITS = 11
_SEED_NOISE = 12

MIN_BITS_FLOOR = 10_000


def _substream(master_seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(key))
    return np.random.default_rng(ss)


def _gray_to_binary(g: int) -> int:
    b = 0
    while g:
        b ^= g
        g >>= 1
    return b


def _gray_pam_levels(n_bits: int) -> np.ndarray:
    """Unnormalized PAM levels indexed by the Gray label (MSB first).

    Label g maps to level 2*i - (M-1) where i is the binary rank of g in
    the Gray sequence, so adjacent levels differ in exactly one label bit.
    """
    m = 1 << n_bits
    levels = np.empty(m, dtype=float)
    for g in range(m):
        levels[g] = 2 * _gray_to_binary(g) - (m - 1)
    return levels


@dataclass(frozen=True)
class ModulationScheme:
    """Gray-mapped unit-energy constellation with separable axes.

    ``points[label]`` is the symbol whose bit label (MSB first) splits into
    ``i_bits`` in-phase bits followed by ``q_bits`` quadrature bits.
    """

    name: str
    i_bits: int
    q_bits: int
    points: np.ndarray
    i_levels: np.ndarray  # normalized per-axis levels indexed by axis Gray label
    q_levels: np.ndarray  # empty for single-axis schemes

    @property
    def bits_per_symbol(self) -> int:
        return self.i_bits + self.q_bits


def _build_scheme(name: str, i_bits: int, q_bits: int) -> ModulationScheme:
    i_lv = _gray_pam_levels(i_bits)
    q_lv = _gray_pam_levels(q_bits) if q_bits else np.zeros(1)
    mean_energy = np.mean(i_lv**2) + (np.mean(q_lv**2) if q_bits else 0.0)
    scale = math.sqrt(mean_energy)
    i_lv = i_lv / scale
    q_lv = q_lv / scale
    k = i_bits + q_bits
    labels = np.arange(1 << k)
    i_label = labels >> q_bits
    q_label = labels & ((1 << q_bits) - 1)
    points = i_lv[i_label] + 1j * q_lv[q_label]
    return ModulationScheme(
        name=name,
        i_bits=i_bits,
        q_bits=q_bits,
        points=points,
        i_levels=i_lv,
        q_levels=q_lv if q_bits else np.empty(0),
    )


SCHEMES: dict[str, ModulationScheme] = {
    "bpsk": _build_scheme("bpsk", 1, 0),
    "qpsk": _build_scheme("qpsk", 1, 1),
    "qam16": _build_scheme("qam16", 2, 2),
    "qam64": _build_scheme("qam64", 3, 3),
}


def get_scheme(name) -> ModulationScheme:
    if isinstance(name, ModulationScheme):
        return name
    key = str(name).lower()
    if key not in SCHEMES:
        raise ValidationError(
            f"unknown modulation {name!r}; choose from {sorted(SCHEMES)}"
        )
    return SCHEMES[key]


def modulate(bits, scheme, dims: tuple[int, int]) -> SpaceTimeSignal:
    """Map a bit array onto a space-time grid of constellation symbols.

    The bit count must be exactly bits_per_symbol * dims[0] * dims[1]; the
    grid is filled row-major (time index fastest), MSB of each symbol first.
    """
    scheme = get_scheme(scheme)
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if np.any(bits > 1):
        raise ValidationError("bits must be 0 or 1")
    k = scheme.bits_per_symbol
    n_sym = dims[0] * dims[1]
    if bits.size != k * n_sym:
        raise ValidationError(
            f"need exactly {k * n_sym} bits for a {dims} grid of "
            f"{scheme.name}, got {bits.size}"
        )
    weights = 1 << np.arange(k - 1, -1, -1)
    labels = bits.reshape(n_sym, k) @ weights
    return SpaceTimeSignal(grid=scheme.points[labels].reshape(dims), role="data")


def demodulate(r, scheme) -> np.ndarray:
    """Minimum-distance demodulation back to a flat bit array (MSB first)."""
    scheme = get_scheme(scheme)
    grid = np.asarray(getattr(r, "grid", r), dtype=np.complex128).ravel()
    dists = np.abs(grid[:, None] - scheme.points[None, :])
    labels = np.argmin(dists, axis=1)
    k = scheme.bits_per_symbol
    shifts = np.arange(k - 1, -1, -1)
    return ((labels[:, None] >> shifts[None, :]) & 1).astype(np.uint8).ravel()


def _axis_bit_errors(levels: np.ndarray, sigma: float) -> float:
    """Expected bit errors per axis use for Gray PAM in Gaussian noise.

    Exact: sums decision-band probabilities times Hamming distances over
    every (sent, decided) level pair.
    """
    order = np.argsort(levels)
    sorted_lv = levels[order]
    thresholds = 0.5 * (sorted_lv[:-1] + sorted_lv[1:])
    m = levels.size
    total = 0.0
    for si in range(m):
        sent_label = order[si]
        upper = np.concatenate([ndtr((thresholds - sorted_lv[si]) / sigma), [1.0]])
        lower = np.concatenate([[0.0], upper[:-1]])
        band = upper - lower
        for di in range(m):
            ham = bin(int(sent_label) ^ int(order[di])).count("1")
            if ham:
                total += band[di] * ham
    return total / m


def theoretical_awgn_ber(scheme, snr_per_bit_db: float) -> float:
    """Exact AWGN bit error rate of the Gray constellation at a per-bit SNR.

    Per-axis nearest-level decisions are the true minimum-distance rule for
    these separable constellations, so the band-probability sum is exact,
    not a nearest-neighbor approximation.
    """
    scheme = get_scheme(scheme)
    k = scheme.bits_per_symbol
    gamma_b = 10.0 ** (snr_per_bit_db / 10.0)
    if gamma_b == math.inf:
        return 0.0
    sigma = math.sqrt(1.0 / (2.0 * k * gamma_b))
    total = _axis_bit_errors(scheme.i_levels, sigma)
    if scheme.q_bits:
        total += _axis_bit_errors(scheme.q_levels, sigma)
    return total / k


_PRECODER_RE = re.compile(r"^hogmt\(([^)]*)\)$")
_PLAIN_KINDS = ("zf", "zfdpc", "none", "ideal")


@dataclass(frozen=True)
class PrecoderSpec:
    """Which precoder to run; ``fraction`` is the retained-mode fraction."""

    kind: str
    fraction: float = 1.0

    def __post_init__(self):
        if self.kind not in ("hogmt",) + _PLAIN_KINDS:
            raise ValidationError(f"unknown precoder kind {self.kind!r}")
        if not (0.0 < self.fraction <= 1.0):
            raise ValidationError(
                f"retained-mode fraction must be in (0, 1], got {self.fraction}"
            )

    @property
    def label(self) -> str:
        return self.kind


def parse_precoder(text) -> PrecoderSpec:
    """Parse "hogmt", "hogmt(0.99)", "zf", "zfdpc", "none" or "ideal"."""
    if isinstance(text, PrecoderSpec):
        return text
    s = str(text).strip().lower()
    if s == "hogmt":
        return PrecoderSpec("hogmt", 1.0)
    m = _PRECODER_RE.match(s)
    if m:
        try:
            frac = float(m.group(1))
        except ValueError:
            raise ValidationError(
                f"bad retained-mode fraction in precoder spec {text!r}"
            ) from None
        return PrecoderSpec("hogmt", frac)
    if s in _PLAIN_KINDS:
        return PrecoderSpec(s)
    raise ValidationError(
        f"unknown precoder {text!r}; expected hogmt[(fraction)], zf, zfdpc, "
        "none or ideal"
    )


@dataclass(frozen=True)
class BerPoint:
    """One measured point of a BER sweep.

    ``bits`` = 0 flags a failed point (degenerate channel); ``ber`` is then
    NaN and the sweep continues at other points.
    """

    snr_db: float
    precoder: str
    modulation: str
    fraction: float
    bits: int
    errors: int
    ber: float
    tx_energy: float

    @property
    def failed(self) -> bool:
        return self.bits == 0

    @property
    def ci95(self) -> float:
        """95% binomial confidence half-width of the BER estimate."""
        if self.bits == 0:
            return math.nan
        p = self.ber
        return 1.96 * math.sqrt(max(p * (1.0 - p), 0.0) / self.bits)

    @property
    def mc_sigma(self) -> float:
        """One Monte-Carlo standard error of the BER estimate."""
        if self.bits == 0:
            return math.nan
        p = self.ber
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.bits)


@dataclass(frozen=True)
class BerReport:
    """All points of a sweep, one per (snr, precoder, modulation, fraction)."""

    points: tuple[BerPoint, ...]

    def select(
        self,
        precoder: str | None = None,
        modulation: str | None = None,
        fraction: float | None = None,
    ) -> list[BerPoint]:
        out = []
        for p in self.points:
            if precoder is not None and p.precoder != precoder:
                continue
            if modulation is not None and p.modulation != modulation:
                continue
            if fraction is not None and p.fraction != fraction:
                continue
            out.append(p)
        return out


class _ChannelBundle:
    """Per-(snr, channel-index) realization with lazily computed pieces."""

    def __init__(self, cfg: ScenarioConfig, seed: int):
        self.h = generate_channel(cfg, seed)
        self._kernel = None
        self._flat = None
        self._decomp = None

    @property
    def flat(self) -> np.ndarray:
        if self._flat is None:
            self._kernel = to_kernel(self.h)
            self._flat = flatten_kernel(self._kernel)
        return self._flat

    @property
    def decomp(self):
        if self._decomp is None:
            _ = self.flat
            self._decomp = hogmt_decompose(self._kernel)
        return self._decomp


def _trial_counts(
    bundle: _ChannelBundle,
    spec: PrecoderSpec,
    scheme: ModulationScheme,
    s: SpaceTimeSignal,
    bits: np.ndarray,
    unit_noise: np.ndarray,
    sigma2: float,
) -> tuple[int, float]:
    """Errors and mean per-symbol transmit energy for one trial."""
    if spec.kind == "ideal":
        x_grid = s.grid
        clean = s.grid
    else:
        if spec.kind == "hogmt":
            policy = (
                TruncationPolicy.fraction(spec.fraction)
                if spec.fraction < 1.0
                else TruncationPolicy.full()
            )
            x, _ = hogmt_precode(bundle.decomp, s, policy)
            x_grid = x.grid
        elif spec.kind == "zf":
            x_grid = zf_precode_instant(bundle.h, s).grid
        elif spec.kind == "zfdpc":
            x_grid = zfdpc_precode(bundle.h, s).grid
        else:  # none
            x_grid = s.grid
        clean = (bundle.flat @ x_grid.ravel()).reshape(s.grid.shape)
    r = clean if sigma2 == 0.0 else clean + math.sqrt(sigma2) * unit_noise
    got = demodulate(r, scheme)
    errors = int(np.count_nonzero(got != bits))
    tx_energy = float(np.mean(np.abs(x_grid) ** 2))
    return errors, tx_energy


def run_ber(
    scenario: ScenarioConfig,
    precoders,
    snr_db,
    min_bits: int,
    seed: int,
    modulations=("qam16",),
    n_channels: int = 2,
    n_workers: int = 1,
) -> BerReport:
    """Monte-Carlo BER sweep over SNR points, precoders, and modulations.

    Noise variance per point is 10**(-snr_db/10), referencing the received
    signal (unit symbol energy).  Each trial spans one (users, time_symbols)
    block; channel realizations rotate over ``n_channels`` per SNR point and
    are shared by every precoder and modulation, as are the data bits and
    the noise draw of each trial, so comparisons are paired.  Results are
    sums over per-trial counts from dedicated substreams, hence identical
    for any ``n_workers``.
    """
    if isinstance(precoders, (str, PrecoderSpec)):
        precoders = [precoders]
    specs = [parse_precoder(p) for p in precoders]
    if not specs:
        raise ValidationError("need at least one precoder")
    if isinstance(modulations, (str, ModulationScheme)):
        modulations = [modulations]
    schemes = [get_scheme(m) for m in modulations]
    if not schemes:
        raise ValidationError("need at least one modulation")
    snr_list = [float(v) for v in np.atleast_1d(np.asarray(snr_db, dtype=float))]
    if not snr_list:
        raise ValidationError("need at least one SNR point")
    if min_bits < MIN_BITS_FLOOR:
        raise ValidationError(
            f"min_bits must be >= {MIN_BITS_FLOOR}, got {min_bits}"
        )
    if n_channels < 1:
        raise ValidationError(f"n_channels must be >= 1, got {n_channels}")
    if n_workers < 1:
        raise ValidationError(f"n_workers must be >= 1, got {n_workers}")
    seed = int(seed)
    l_u, l_t = scenario.users, scenario.time_symbols
    dims = (l_u, l_t)
    n_sym = l_u * l_t
    needs_channel = any(sp.kind != "ideal" for sp in specs)

    points: list[BerPoint] = []
    for si, snr in enumerate(snr_list):
        sigma2 = 10.0 ** (-snr / 10.0)
        bundles: dict[int, _ChannelBundle] = {}

        def bundle_for(c: int) -> _ChannelBundle:
            if c not in bundles:
                ch_seed = int(
                    _substream(seed, _SEED_CHANNEL, si, c).integers(0, 2**63)
                )
                bundles[c] = _ChannelBundle(scenario, ch_seed)
            return bundles[c]

        def run_trial(args):
            trial, mi = args
            scheme = schemes[mi]
            k = scheme.bits_per_symbol
            bits = _substream(seed, _SEED_BITS, si, trial, mi).integers(
                0, 2, size=k * n_sym, dtype=np.uint8
            )
            s = modulate(bits, scheme, dims)
            rng_noise = _substream(seed, _SEED_NOISE, si, trial, mi)
            unit_noise = (
                rng_noise.standard_normal(dims) + 1j * rng_noise.standard_normal(dims)
            ) / math.sqrt(2.0)
            bundle = bundle_for(trial % n_channels) if needs_channel else None
            out = []
            for pi, spec in enumerate(specs):
                try:
                    errors, tx_e = _trial_counts(
                        bundle, spec, scheme, s, bits, unit_noise, sigma2
                    )
                    out.append((pi, mi, errors, bits.size, tx_e))
                except DegenerateChannelError:
                    out.append((pi, mi, -1, 0, math.nan))
            return out

        # materialize channels before threading so bundle construction is
        # single-threaded (lazy SVDs inside would race otherwise)
        tasks = []
        for mi, scheme in enumerate(schemes):
            bits_per_trial = scheme.bits_per_symbol * n_sym
            n_trials = max(1, math.ceil(min_bits / bits_per_trial))
            tasks.extend((trial, mi) for trial in range(n_trials))
        if needs_channel:
            n_trials_max = max(
                math.ceil(min_bits / (sc.bits_per_symbol * n_sym)) for sc in schemes
            )
            for c in range(min(n_channels, max(1, n_trials_max))):
                b = bundle_for(c)
                if any(sp.kind == "hogmt" for sp in specs):
                    _ = b.decomp
                elif any(sp.kind in ("zf", "zfdpc", "none") for sp in specs):
                    _ = b.flat

        if n_workers > 1:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                results = list(pool.map(run_trial, tasks))
        else:
            results = [run_trial(t) for t in tasks]

        acc: dict[tuple[int, int], list] = {
            (pi, mi): [0, 0, 0.0, 0, False]  # errors, bits, tx_energy_sum, trials, failed
            for pi in range(len(specs))
            for mi in range(len(schemes))
        }
        for trial_out in results:
            for pi, mi, errors, nbits, tx_e in trial_out:
                slot = acc[(pi, mi)]
                if errors < 0:
                    slot[4] = True
                    continue
                slot[0] += errors
                slot[1] += nbits
                slot[2] += tx_e
                slot[3] += 1

        for pi, spec in enumerate(specs):
            for mi, scheme in enumerate(schemes):
                errors, nbits, tx_sum, n_ok, failed = acc[(pi, mi)]
                if failed or nbits == 0:
                    points.append(
                        BerPoint(
                            snr_db=snr,
                            precoder=spec.label,
                            modulation=scheme.name,
                            fraction=spec.fraction,
                            bits=0,
                            errors=0,
                            ber=math.nan,
                            tx_energy=math.nan,
                        )
                    )
                else:
                    points.append(
                        BerPoint(
                            snr_db=snr,
                            precoder=spec.label,
                            modulation=scheme.name,
                            fraction=spec.fraction,
                            bits=nbits,
                            errors=errors,
                            ber=errors / nbits,
                            tx_energy=tx_sum / n_ok,
                        )
                    )
    return BerReport(points=tuple(points))
