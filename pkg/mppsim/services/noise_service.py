"""
Noise generation and Middleton Class A modelling for the power-line channel.

All generators are functions of (config, seed, absolute sample index):
deterministic components are evaluated at the sample's absolute time, and
random components are drawn in fixed chunks keyed by chunk index, so any
sub-window can be regenerated bit for bit.
"""

import logging
import math
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import optimize, stats

from mppsim.exceptions import ParameterError
from mppsim.schemas.noise import (
    HarmonicNoiseConfig,
    ImpulseTrainConfig,
    MiddletonFit,
    MiddletonParams,
    NoiseConfig,
    Polarity,
)
from mppsim.schemas.signal import Waveform, sample_index
from mppsim.utils.prefix_hash import hash_update_array
from mppsim.utils.seeding import derive_seed, rng_for

logger = logging.getLogger(__name__)

CHUNK_SAMPLES = 1 << 16

# sub-seed labels per component
_MIDDLETON_LABEL = 1
_AWGN_LABEL = 2
_IMPULSE_LABEL = 3

FIT_BINS = 101
FIT_RANGE = 8.0
FIT_MIN_SAMPLES = 10_000
FIT_A_BOUNDS = (1e-3, 10.0)
FIT_GAMMA_BOUNDS = (1e-4, 1.0)
FIT_GRID_POINTS = 41


# ---------------------------------------------------------------------------
# Middleton Class A
# ---------------------------------------------------------------------------

def _class_a_terms(params: MiddletonParams, terms: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
    """Normalized Poisson weights and per-term standard deviations."""
    m = np.arange(terms or params.terms)
    weights = stats.poisson.pmf(m, params.A)
    weights = weights / weights.sum()
    variances = params.sigma_total ** 2 * (m / params.A + params.Gamma) / (1.0 + params.Gamma)
    return weights, np.sqrt(variances)


def middleton_pdf(x: "float | np.ndarray", params: MiddletonParams) -> "float | np.ndarray":
    """
    Truncated Class A density, renormalized over its M terms.

    p(x) = (1/Z) sum_m w_m N(x; 0, s_m^2), w_m = e^-A A^m / m!,
    s_m^2 = sigma^2 (m/A + Gamma) / (1 + Gamma), Z = sum_m w_m.
    """
    weights, sigmas = _class_a_terms(params)
    x = np.asarray(x, dtype=np.float64)
    density = (weights * stats.norm.pdf(x[..., None], scale=sigmas)).sum(axis=-1)
    return float(density) if density.ndim == 0 else density


def middleton_cdf(x: "float | np.ndarray", params: MiddletonParams) -> "float | np.ndarray":
    """Cumulative distribution of the truncated Class A density."""
    weights, sigmas = _class_a_terms(params)
    x = np.asarray(x, dtype=np.float64)
    cdf = (weights * stats.norm.cdf(x[..., None], scale=sigmas)).sum(axis=-1)
    return float(cdf) if cdf.ndim == 0 else cdf


def middleton_sample(
    params: MiddletonParams,
    rng: np.random.Generator,
    size: "int | None" = None,
) -> "float | np.ndarray":
    """
    Draw Class A amplitudes.

    The Poisson index is untruncated, so the mixture's total variance is
    exactly sigma_total^2.
    """
    m = rng.poisson(params.A, size=size)
    variance = params.sigma_total ** 2 * (m / params.A + params.Gamma) / (1.0 + params.Gamma)
    return rng.standard_normal(size=size) * np.sqrt(variance)


def _fit_objective(
    log_params: np.ndarray,
    edges: np.ndarray,
    log_density: np.ndarray,
    keep: np.ndarray,
    terms: int,
) -> float:
    a = float(np.clip(np.exp(log_params[0]), *FIT_A_BOUNDS))
    gamma = float(np.clip(np.exp(log_params[1]), *FIT_GAMMA_BOUNDS))
    model = MiddletonParams(A=a, Gamma=gamma, terms=terms)
    mass = np.diff(middleton_cdf(edges, model))
    with np.errstate(divide="ignore"):
        model_log = np.log(mass / np.diff(edges))
    diff = log_density[keep] - model_log[keep]
    if not np.all(np.isfinite(diff)):
        return math.inf
    return float(np.sum(diff ** 2))


def fit_middleton(samples: np.ndarray, terms: int = 3) -> MiddletonFit:
    """
    Fit Class A parameters to noise samples.

    Samples are shifted to zero mean and scaled to unit rms. The log of a
    101-bin histogram over +-8 normalized units is matched, in the least
    squares sense, to the log of the model's bin-averaged density. A
    logarithmic grid over A in [1e-3, 10] and Gamma in [1e-4, 1] picks the
    start point for a Nelder-Mead refinement. Empty bins are ignored.

    Near-Gaussian input drives the fit toward the A bound, where a short
    series cannot follow the density: with the default 3 terms the fitted
    pdf misses a Gaussian by about 25% near the origin. Pass ``terms=40``
    or more for such samples.

    Raises:
        ParameterError: If fewer than 10^4 samples are given
    """
    samples = np.asarray(samples, dtype=np.float64).ravel()
    if samples.size < FIT_MIN_SAMPLES:
        raise ParameterError(f"fitting needs at least {FIT_MIN_SAMPLES} samples, got {samples.size}")
    centered = samples - samples.mean()
    rms = float(np.sqrt(np.mean(centered ** 2)))
    if rms == 0.0:
        raise ParameterError("cannot fit constant samples")
    normalized = centered / rms

    edges = np.linspace(-FIT_RANGE, FIT_RANGE, FIT_BINS + 1)
    counts, _ = np.histogram(normalized, bins=edges)
    keep = counts > 0
    with np.errstate(divide="ignore"):
        log_density = np.log(counts / (normalized.size * np.diff(edges)))

    grid_a = np.log(np.logspace(np.log10(FIT_A_BOUNDS[0]), np.log10(FIT_A_BOUNDS[1]), FIT_GRID_POINTS))
    grid_g = np.log(np.logspace(np.log10(FIT_GAMMA_BOUNDS[0]), np.log10(FIT_GAMMA_BOUNDS[1]), FIT_GRID_POINTS))
    best = min(
        ((la, lg) for la in grid_a for lg in grid_g),
        key=lambda p: _fit_objective(np.array(p), edges, log_density, keep, terms),
    )
    result = optimize.minimize(
        _fit_objective,
        x0=np.array(best),
        args=(edges, log_density, keep, terms),
        method="Nelder-Mead",
        options={"xatol": 1e-4, "fatol": 1e-8, "maxiter": 2000},
    )
    a = float(np.clip(np.exp(result.x[0]), *FIT_A_BOUNDS))
    gamma = float(np.clip(np.exp(result.x[1]), *FIT_GAMMA_BOUNDS))
    fit = MiddletonFit(A=a, Gamma=gamma, residual=float(result.fun), terms=terms)
    logger.info("Middleton fit over %d samples: %s", samples.size, fit.summary())
    return fit


# ---------------------------------------------------------------------------
# Deterministic line noise
# ---------------------------------------------------------------------------

def _harmonic_sum(t: np.ndarray, cfg: HarmonicNoiseConfig) -> np.ndarray:
    total = np.zeros_like(t, dtype=np.float64)
    for h, phase in zip(cfg.harmonic_numbers, cfg.phase_offsets):
        total += np.sin(2.0 * math.pi * h * cfg.fundamental_hz * t + phase)
    return total


@lru_cache(maxsize=16)
def harmonic_scale(cfg: HarmonicNoiseConfig) -> float:
    """Scale that makes the harmonic sum peak at ``total_peak_volts``."""
    period = 1.0 / cfg.fundamental_hz
    t = np.arange(1 << 16) * (period / (1 << 16))
    return cfg.total_peak_volts / float(np.max(np.abs(_harmonic_sum(t, cfg))))


def harmonic_noise(t: "float | np.ndarray", cfg: HarmonicNoiseConfig) -> "float | np.ndarray":
    """Harmonic line noise in volts at absolute time(s) ``t``."""
    t = np.asarray(t, dtype=np.float64)
    volts = harmonic_scale(cfg) * _harmonic_sum(t, cfg)
    return float(volts) if volts.ndim == 0 else volts


def harmonic_rms(cfg: HarmonicNoiseConfig) -> float:
    """Closed-form rms of equal-amplitude harmonics: scale * sqrt(count / 2)."""
    return harmonic_scale(cfg) * math.sqrt(len(cfg.harmonic_numbers) / 2.0)


def _train_phases(cfg: ImpulseTrainConfig, seed: int, train_index: int) -> tuple[float, float]:
    """Random (pulse, burst) phases of an asynchronous train."""
    if cfg.line_locked:
        return 0.0, 0.0
    rng = rng_for(seed, _IMPULSE_LABEL, train_index)
    pulse_phase = rng.uniform(0.0, 1.0 / cfg.pulse_rate_hz)
    burst_phase = rng.uniform(0.0, cfg.burst_period_s) if cfg.is_bursty else 0.0
    return pulse_phase, burst_phase


def impulse_values(
    t: np.ndarray,
    cfg: ImpulseTrainConfig,
    seed: int,
    train_index: int = 0,
    line_phase_s: float = 0.0,
) -> np.ndarray:
    """
    Impulse-train voltage at absolute times ``t``.

    Line-locked trains restart every line cycle at ``line_phase_s``;
    asynchronous trains run from a random phase drawn from the seed. Burst
    gating keeps a pulse only when it starts inside an on-window.
    """
    t = np.asarray(t, dtype=np.float64)
    spacing = 1.0 / cfg.pulse_rate_hz
    pulse_phase, burst_phase = _train_phases(cfg, seed, train_index)

    if cfg.line_locked:
        line_period = 1.0 / cfg.line_frequency_hz
        cycle = np.floor((t - line_phase_s) / line_period)
        in_cycle = (t - line_phase_s) - cycle * line_period
        index_in_cycle = np.floor(in_cycle / spacing)
        local = in_cycle - index_in_cycle * spacing
        pulses_per_cycle = math.ceil(line_period * cfg.pulse_rate_hz)
        pulse_index = cycle * pulses_per_cycle + index_in_cycle
        active = local < cfg.pulse_width_s
    else:
        pulse_index = np.floor((t - pulse_phase) / spacing)
        local = (t - pulse_phase) - pulse_index * spacing
        active = local < cfg.pulse_width_s

    if cfg.is_bursty:
        start = t - local
        active &= np.mod(start - burst_phase, cfg.burst_period_s) < cfg.burst_on_s

    sign = np.ones_like(t)
    if cfg.polarity is Polarity.ALTERNATING:
        sign = np.where(np.mod(pulse_index, 2) == 0, 1.0, -1.0)
    elif cfg.polarity is Polarity.RANDOM:
        keyed = pulse_index.astype(np.int64).astype(np.uint64) ^ np.uint64(derive_seed(seed, _IMPULSE_LABEL, train_index))
        mixed = hash_update_array(keyed, np.zeros_like(keyed))
        sign = np.where((mixed & np.uint64(1)) == 0, 1.0, -1.0)

    return np.where(active, cfg.amplitude_volts * sign, 0.0)


def impulse_train(
    start_s: float,
    duration_s: float,
    sample_rate_hz: float,
    cfg: ImpulseTrainConfig,
    seed: int,
    train_index: int = 0,
    line_phase_s: float = 0.0,
) -> Waveform:
    """Sample one impulse train over ``[start_s, start_s + duration_s)``."""
    first = sample_index(start_s, sample_rate_hz)
    count = sample_index(duration_s, sample_rate_hz)
    if count < 1:
        raise ParameterError("impulse train window is shorter than one sample")
    t = (first + np.arange(count)) / sample_rate_hz
    return Waveform(
        samples=impulse_values(t, cfg, seed, train_index, line_phase_s),
        sample_rate_hz=sample_rate_hz,
        origin_time_s=first / sample_rate_hz,
    )


# ---------------------------------------------------------------------------
# Channel
# ---------------------------------------------------------------------------

def _chunked_draws(
    draw: Callable[[np.random.Generator, int], np.ndarray],
    first: int,
    count: int,
    seed: int,
    label: int,
) -> np.ndarray:
    """Draw per-sample randoms so sample i always comes from chunk i // CHUNK_SAMPLES."""
    first_chunk = first // CHUNK_SAMPLES
    last_chunk = (first + count - 1) // CHUNK_SAMPLES
    block = np.concatenate([
        draw(rng_for(seed, label, chunk), CHUNK_SAMPLES)
        for chunk in range(first_chunk, last_chunk + 1)
    ])
    offset = first - first_chunk * CHUNK_SAMPLES
    return block[offset:offset + count]


def generate_noise(
    cfg: NoiseConfig,
    first_sample: int,
    count: int,
    sample_rate_hz: float,
    seed: int,
) -> np.ndarray:
    """
    Noise voltages for absolute samples ``first_sample .. first_sample + count``.

    Raises:
        ParameterError: If the window starts before sample 0
    """
    if first_sample < 0:
        raise ParameterError("noise windows start at or after absolute sample 0")
    noise = np.full(count, cfg.dc_offset_volts, dtype=np.float64)
    if count == 0:
        return noise
    t = (first_sample + np.arange(count)) / sample_rate_hz

    if cfg.harmonics is not None:
        noise += harmonic_noise(t, cfg.harmonics)
    for index, train in enumerate(cfg.impulse_trains):
        noise += impulse_values(t, train, seed, index)
    if cfg.middleton is not None:
        params = cfg.middleton
        noise += _chunked_draws(
            lambda rng, size: middleton_sample(params, rng, size),
            first_sample, count, seed, _MIDDLETON_LABEL,
        )
    if cfg.awgn_rms_volts > 0.0:
        noise += cfg.awgn_rms_volts * _chunked_draws(
            lambda rng, size: rng.standard_normal(size),
            first_sample, count, seed, _AWGN_LABEL,
        )
    return noise


def noise_waveform(
    cfg: NoiseConfig,
    duration_s: float,
    sample_rate_hz: float,
    seed: int,
    origin_time_s: float = 0.0,
) -> Waveform:
    """Noise alone over a window, as a waveform."""
    first = sample_index(origin_time_s, sample_rate_hz)
    count = sample_index(duration_s, sample_rate_hz)
    if count < 1:
        raise ParameterError("noise window is shorter than one sample")
    return Waveform(
        samples=generate_noise(cfg, first, count, sample_rate_hz, seed),
        sample_rate_hz=sample_rate_hz,
        origin_time_s=first / sample_rate_hz,
    )


def apply_channel(signal: Waveform, cfg: NoiseConfig, seed: int) -> Waveform:
    """
    Add channel noise to a signal, sample by sample.

    The noise depends only on (cfg, seed, absolute sample index), so
    ``apply_channel(s) - s`` equals the noise generated alone for the same
    window.
    """
    first = sample_index(signal.origin_time_s, signal.sample_rate_hz)
    noise = generate_noise(cfg, first, len(signal), signal.sample_rate_hz, seed)
    return signal.model_copy(update={"samples": signal.samples + noise})


def noise_rms(
    cfg: NoiseConfig,
    duration_s: float,
    sample_rate_hz: float,
    seed: int,
    traces: int = 100,
) -> float:
    """
    Mean rms of the noise over ``traces`` independent windows.

    Trace i covers ``[i * duration_s, (i + 1) * duration_s)`` with its own
    sub-seed, like successive scope captures.

    Raises:
        ParameterError: If harmonics are enabled and a trace is shorter than
            ten line cycles
    """
    if traces < 1:
        raise ParameterError("noise_rms needs at least one trace")
    if cfg.harmonics is not None and duration_s * cfg.harmonics.fundamental_hz < 10.0 - 1e-9:
        raise ParameterError("rms windows must cover at least 10 line cycles when harmonics are enabled")
    if cfg.is_silent:
        return 0.0

    count = sample_index(duration_s, sample_rate_hz)
    values = []
    for trace in range(traces):
        first = trace * count
        noise = generate_noise(cfg, first, count, sample_rate_hz, derive_seed(seed, trace))
        values.append(float(np.sqrt(np.mean(noise ** 2))))
    rms = float(np.mean(values))
    logger.debug("noise rms over %d traces of %.3g s: %.4g V", traces, duration_s, rms)
    return rms
