"""PAPR statistics, BER Monte Carlo, and operation-count reporting.

Monte Carlo determinism: every trial draws from its own stream seeded by
(master seed, curve point index, trial index, attempt), so curves are
bit-identical regardless of chunking or worker count. SNR is Es/N0 with
unit-power symbols: sigma^2 = 10^(-SNR/10).
"""

from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import add_cp, draw_channel, effective_channel, remove_cp, transmit
from .detection import (Detector, DetectorSpec, QamConstellation, SingularChannelError,
                        equalize, qam_demap, qam_map)
from .number_theory import divisor_set, is_power_of_two, totient
from .ramanujan import ramanujan_sum
from .transforms import Scheme, fast_flops, make_plan, modulate, demodulate

#: binomial 95% confidence half-width multiplier
_CI_Z = 1.96

#: trials per batched CCDF chunk (fixed so output never depends on memory)
_CCDF_CHUNK = 2048

#: guard against unbounded resampling on pathological configurations
_MAX_RESAMPLES_PER_TRIAL = 1000


def papr(x: np.ndarray) -> float:
    """Peak-to-average power ratio max|x|^2 / mean|x|^2 (linear)."""
    x = np.asarray(x)
    power = np.abs(x) ** 2
    mean = power.mean()
    if x.size == 0 or mean == 0.0:
        raise ValueError("PAPR is undefined for an empty or all-zero block")
    return float(power.max() / mean)


def papr_db(x: np.ndarray) -> float:
    return 10.0 * math.log10(papr(x))


def gamma_coefficient(q: int) -> int:
    """Partial period sum gamma_q = sum_{l=0}^{phi(q)-1} c_q[l].

    Equals q - phi(q) for prime q and p^{t-1} for prime powers p^t.
    """
    return int(ramanujan_sum(q).values[:totient(q)].sum())


def worst_case_papr(scheme: Scheme, n: int, constellation: QamConstellation) -> float:
    """Closed-form worst-case PAPR in dB for an all-corner-symbol block.

    OFDM: beta^2 N / alpha^2. Subspace scheme: the block peaks at sample 0
    with amplitude (beta/sqrt(N)) * sum_q gamma_q / sqrt(phi(q)), giving
    beta^2 (sum_q gamma_q/sqrt(phi_q))^2 / (N alpha^2).
    """
    if n < 1:
        raise ValueError(f"block length must be >= 1, got {n}")
    if scheme is Scheme.OFDM:
        chi = constellation.beta2 * n / constellation.alpha2
    else:
        layout = divisor_set(n)
        total = sum(gamma_coefficient(q) / math.sqrt(phi) for q, phi, _ in layout.blocks())
        chi = constellation.beta2 * total ** 2 / (n * constellation.alpha2)
    return 10.0 * math.log10(chi)


@dataclass(frozen=True)
class CurveResult:
    """One measured curve plus enough configuration to re-run it."""

    scheme: Scheme
    detector: Detector | None
    n: int
    l: int | None
    m: int
    grid: np.ndarray
    values: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    trials: int
    seed: int
    metadata: dict = field(default_factory=dict)

    def config_echo(self) -> dict:
        return {
            "scheme": self.scheme.value,
            "detector": self.detector.value if self.detector else None,
            "n": self.n, "l": self.l, "m": self.m,
            "trials": self.trials, "seed": self.seed,
            "grid": [float(v) for v in self.grid],
        }


def _binomial_ci(values: np.ndarray, trials: int) -> tuple[np.ndarray, np.ndarray]:
    half = _CI_Z * np.sqrt(values * (1.0 - values) / trials)
    return np.clip(values - half, 0.0, 1.0), np.clip(values + half, 0.0, 1.0)


def papr_ccdf(scheme: Scheme, n: int, constellation: QamConstellation,
              thresholds_db: np.ndarray, trials: int, seed: int) -> CurveResult:
    """Fraction of random-symbol blocks whose PAPR exceeds each threshold.

    Symbols are uniform over the constellation; PAPR is computed at Nyquist
    rate over the n block samples.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    thresholds_db = np.asarray(thresholds_db, dtype=np.float64)
    points = constellation.points
    forward_t = None
    if scheme is Scheme.RPSDM:
        forward_t = make_plan(scheme, n).forward.T.copy()
    exceed = np.zeros(thresholds_db.shape[0], dtype=np.int64)
    for start in range(0, trials, _CCDF_CHUNK):
        stop = min(start + _CCDF_CHUNK, trials)
        idx = np.empty((stop - start, n), dtype=np.int64)
        for t in range(start, stop):
            idx[t - start] = np.random.default_rng([seed, t]).integers(0, constellation.m, n)
        symbols = points[idx]
        if scheme is Scheme.OFDM:
            blocks = math.sqrt(n) * np.fft.ifft(symbols, axis=1)
        else:
            # real basis: two real gemms cost half of one complex gemm
            blocks = symbols.real @ forward_t + 1j * (symbols.imag @ forward_t)
        power = np.abs(blocks) ** 2
        ratios_db = 10.0 * np.log10(power.max(axis=1) / power.mean(axis=1))
        exceed += (ratios_db[:, None] > thresholds_db[None, :]).sum(axis=0)
    values = exceed / trials
    ci_low, ci_high = _binomial_ci(values, trials)
    return CurveResult(scheme=scheme, detector=None, n=n, l=None, m=constellation.m,
                       grid=thresholds_db, values=values, ci_low=ci_low, ci_high=ci_high,
                       trials=trials, seed=seed)


def ccdf_crossing(grid_db: np.ndarray, values: np.ndarray, level: float) -> float | None:
    """Threshold (dB) where the curve crosses ``level``, log-linear
    interpolation between grid points; None if the curve never reaches it."""
    grid_db = np.asarray(grid_db, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    below = np.flatnonzero(values < level)
    if below.size == 0:
        return None
    i = int(below[0])
    if i == 0:
        return float(grid_db[0])
    v0, v1 = values[i - 1], values[i]
    if v1 <= 0.0:
        # fall back to linear interpolation when the tail hits exactly zero
        frac = (v0 - level) / (v0 - v1)
    else:
        frac = (math.log10(v0) - math.log10(level)) / (math.log10(v0) - math.log10(v1))
    return float(grid_db[i - 1] + frac * (grid_db[i] - grid_db[i - 1]))


def _ber_trial(plan, constellation, detector: Detector, l: int, sigma2: float,
               seed_key: tuple[int, ...]) -> tuple[int, int]:
    """One end-to-end trial; returns (bit errors, resamples consumed)."""
    n = plan.n
    bits_per = constellation.bits_per_symbol
    for attempt in range(_MAX_RESAMPLES_PER_TRIAL):
        rng = np.random.default_rng([*seed_key, attempt])
        ch = draw_channel(rng, l, n)
        bits = rng.integers(0, 2, n * bits_per)
        symbols = qam_map(bits, constellation)
        x = modulate(plan, symbols)
        frame = add_cp(x, l)
        received = transmit(frame, ch, sigma2, rng)
        y = remove_cp(received, l)
        demod = demodulate(plan, y)
        eff = effective_channel(plan.scheme, ch, plan.transform)
        spec = DetectorSpec.zf() if detector is Detector.ZF else DetectorSpec.mmse(sigma2)
        try:
            estimates = equalize(spec, eff, demod)
        except SingularChannelError:
            continue
        decided = qam_demap(estimates, constellation)
        return int(np.count_nonzero(decided != bits)), attempt
    raise RuntimeError(f"exceeded {_MAX_RESAMPLES_PER_TRIAL} singular-channel resamples")


def ber_curve(scheme: Scheme, detector: Detector, n: int, l: int,
              constellation: QamConstellation, snr_grid_db: np.ndarray,
              trials: int, seed: int, workers: int = 1) -> CurveResult:
    """Bit error rate per SNR point over fresh channel, symbols, and noise
    per trial. Exactly singular ZF draws are resampled and counted."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 1 <= l <= n:
        raise ValueError(f"need 1 <= l <= n, got l={l}, n={n}")
    snr_grid_db = np.asarray(snr_grid_db, dtype=np.float64)
    plan = make_plan(scheme, n)
    bits_per_trial = n * constellation.bits_per_symbol
    values = np.empty(snr_grid_db.shape[0])
    resamples = 0

    for p, snr_db in enumerate(snr_grid_db):
        sigma2 = 10.0 ** (-snr_db / 10.0)

        def run(t: int, _p: int = p, _s2: float = sigma2) -> tuple[int, int]:
            return _ber_trial(plan, constellation, detector, l, _s2, (seed, _p, t))

        if workers > 1:
            with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(run, range(trials)))
        else:
            outcomes = [run(t) for t in range(trials)]
        errors = sum(e for e, _ in outcomes)
        resamples += sum(r for _, r in outcomes)
        values[p] = errors / (trials * bits_per_trial)

    ci_low, ci_high = _binomial_ci(values, trials * bits_per_trial)
    return CurveResult(scheme=scheme, detector=detector, n=n, l=l, m=constellation.m,
                       grid=snr_grid_db, values=values, ci_low=ci_low, ci_high=ci_high,
                       trials=trials, seed=seed, metadata={"resampled_trials": resamples})


@dataclass(frozen=True)
class ComplexityRow:
    operation: str
    scheme: Scheme
    real_mults: int
    real_adds: int


def complexity_report(n: int) -> list[ComplexityRow]:
    """Real-operation counts for both schemes: dense modulators for any n,
    fast paths when n is a power of two, and the per-block receiver."""
    if n < 1:
        raise ValueError(f"block length must be >= 1, got {n}")
    rows = [
        ComplexityRow("modulator_direct", Scheme.OFDM, 4 * n * n, 2 * n * (2 * n - 1)),
        ComplexityRow("modulator_direct", Scheme.RPSDM, 2 * n * n, 2 * n * (n - 1)),
    ]
    if is_power_of_two(n):
        for scheme in (Scheme.OFDM, Scheme.RPSDM):
            fc = fast_flops(scheme, n)
            rows.append(ComplexityRow("modulator_fast", scheme, fc.real_mults, fc.real_adds))
    layout = divisor_set(n)
    block_mults = 4 * sum(phi * phi for _, phi, _ in layout.blocks())
    block_adds = sum(2 * phi * (2 * phi - 1) for _, phi, _ in layout.blocks())
    rows.append(ComplexityRow("receiver", Scheme.OFDM, 4 * n, 2 * n))
    rows.append(ComplexityRow("receiver", Scheme.RPSDM, block_mults, block_adds))
    return rows
