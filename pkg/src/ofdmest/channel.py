"""Doubly selective fading channel and calibrated noise injection.

The channel is an EVA tapped delay line whose taps fade as independent
complex sum-of-sinusoids processes with the classic Clarke/Jakes Doppler
spectrum (autocorrelation J0(2 pi f_d tau)).  Gaussian noise and
Bernoulli-Gaussian impulse noise are added in the time domain, calibrated
against the power of the faded (pre-noise) signal.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .exceptions import InputShapeError
from .grid import OfdmParams, TimeSignal

SPEED_OF_LIGHT = 299_792_458.0

# Extended Vehicular A power-delay profile: (excess delay ns, relative power dB).
_EVA_TAPS = (
    (0.0, 0.0),
    (30.0, -1.5),
    (150.0, -1.4),
    (310.0, -3.6),
    (370.0, -0.6),
    (710.0, -9.1),
    (1090.0, -7.0),
    (1730.0, -12.0),
    (2510.0, -16.9),
)

# Sinusoids per tap in the sum-of-sinusoids fading synthesis.
JAKES_N_SINUSOIDS = 32


@dataclass(frozen=True)
class ChannelProfile:
    """Power-delay profile as (delay_ns, power_db) rows."""

    taps: tuple

    def __post_init__(self):
        delays = [t[0] for t in self.taps]
        powers = [t[1] for t in self.taps]
        if not delays:
            raise ValueError("profile must have at least one tap")
        if delays[0] != 0.0:
            raise ValueError("first tap delay must be 0 ns")
        if any(b <= a for a, b in zip(delays, delays[1:])):
            raise ValueError("tap delays must be strictly increasing")
        if any(p > 0.0 for p in powers):
            raise ValueError("relative tap powers must be <= 0 dB")

    @property
    def delays_ns(self) -> np.ndarray:
        return np.array([t[0] for t in self.taps])

    @property
    def powers_db(self) -> np.ndarray:
        return np.array([t[1] for t in self.taps])


@dataclass
class ChannelRealization:
    """Per-sample complex tap gains of one fading realization."""

    tap_gains: np.ndarray          # complex, [n_taps x n_samples]
    tap_delays_samples: np.ndarray  # int
    doppler_hz: float
    sample_rate: float
    seed: object = None

    @property
    def n_samples(self) -> int:
        return self.tap_gains.shape[1]


@dataclass(frozen=True)
class NoiseSpec:
    """Target noise operating point for a run.

    snr_db / sir_db of +inf disable the corresponding injector.  The optional
    seed, when set, replaces the scenario seed as the root of the noise
    streams so noise can be varied independently of fading.
    """

    snr_db: float = 20.0
    sir_db: float = 0.0
    p: float = 0.2
    seed: object = None

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"impulse probability must be in [0, 1], got {self.p}")


def eva_profile() -> ChannelProfile:
    """The nine-tap Extended Vehicular A profile."""
    return ChannelProfile(taps=_EVA_TAPS)


def doppler_frequency(speed_kmh: float, carrier_hz: float) -> float:
    """Maximum Doppler shift v * f_c / c for a mobile at speed_kmh."""
    return (speed_kmh / 3.6) * carrier_hz / SPEED_OF_LIGHT


def quantize_taps(profile: ChannelProfile, sample_rate: float):
    """Round tap delays to the sample grid and normalize total power to 1.

    Taps landing on the same sample are merged by summing linear powers.
    Returns (integer delays, linear powers).
    """
    if sample_rate <= 0:
        raise ValueError("sample_rate must be positive")
    delays = np.rint(profile.delays_ns * 1e-9 * sample_rate).astype(int)
    linear = 10.0 ** (profile.powers_db / 10.0)
    uniq = np.unique(delays)
    merged = np.array([linear[delays == d].sum() for d in uniq])
    return uniq, merged / merged.sum()


def gen_tap_gains(
    delays_powers,
    doppler_hz: float,
    n_samples: int,
    sample_rate: float,
    seed,
    n_sinusoids: int = JAKES_N_SINUSOIDS,
) -> ChannelRealization:
    """Synthesize Rayleigh tap gains with the Clarke Doppler spectrum.

    Each tap is an independent equal-amplitude sum of n_sinusoids complex
    exponentials with uniform random arrival angles and phases, scaled to the
    tap's normalized power.  doppler_hz = 0 degenerates to time-constant taps.
    """
    if doppler_hz < 0:
        raise ValueError("doppler_hz must be >= 0")
    delays, powers = delays_powers
    delays = np.asarray(delays, dtype=int)
    powers = np.asarray(powers, dtype=float)
    rng = np.random.default_rng(seed)
    t = np.arange(n_samples) / sample_rate
    gains = np.empty((delays.size, n_samples), dtype=complex)
    for l in range(delays.size):
        angles = rng.uniform(0.0, 2.0 * np.pi, n_sinusoids)
        phases = rng.uniform(0.0, 2.0 * np.pi, n_sinusoids)
        omega = 2.0 * np.pi * doppler_hz * np.cos(angles)
        phase = omega[:, None] * t[None, :] + phases[:, None]
        gains[l] = np.sqrt(powers[l] / n_sinusoids) * np.exp(1j * phase).sum(axis=0)
    return ChannelRealization(
        tap_gains=gains,
        tap_delays_samples=delays,
        doppler_hz=doppler_hz,
        sample_rate=sample_rate,
        seed=seed,
    )


def apply_channel(tx: TimeSignal, real: ChannelRealization) -> TimeSignal:
    """Time-varying FIR: y(n) = sum_l h_l(n) x(n - d_l), zero pre-history."""
    x = np.asarray(tx.samples, dtype=complex).ravel()
    if real.n_samples < x.size:
        raise InputShapeError(
            f"realization spans {real.n_samples} samples but the signal has {x.size}"
        )
    y = np.zeros(x.size, dtype=complex)
    for gains, d in zip(real.tap_gains, real.tap_delays_samples):
        if d >= x.size:
            continue
        if d == 0:
            y += gains[: x.size] * x
        else:
            y[d:] += gains[d: x.size] * x[: x.size - d]
    return TimeSignal(samples=y, sample_rate=tx.sample_rate)


def true_freq_response(
    real: ChannelRealization, symbol_index: int, params: OfdmParams
) -> np.ndarray:
    """Ground-truth H(s, k) with taps frozen at the symbol's midpoint sample.

    The midpoint is taken inside the DFT window (after the cyclic prefix).
    H is the plain DFT of the zero-padded taps, the scaling under which the
    demodulated unitary-DFT symbols satisfy Y(k) = X(k) H(k).
    """
    mid = symbol_index * params.symbol_samples + params.cp_len + params.n_fft // 2
    if symbol_index < 0 or mid >= real.n_samples:
        raise IndexError(
            f"symbol {symbol_index} is outside the realization span"
        )
    impulse = np.zeros(params.n_fft, dtype=complex)
    for gain, d in zip(real.tap_gains[:, mid], real.tap_delays_samples):
        if d >= params.n_fft:
            raise ValueError("tap delay exceeds the DFT length")
        impulse[d] += gain
    return np.fft.fft(impulse)


def add_awgn(signal: TimeSignal, snr_db: float, signal_power: float, seed) -> TimeSignal:
    """Add circular complex Gaussian noise at the target SNR.

    signal_power is the reference power of the noise-free received signal;
    snr_db = +inf disables the injector.
    """
    if np.isinf(snr_db) and snr_db > 0:
        return TimeSignal(samples=signal.samples, sample_rate=signal.sample_rate)
    if signal_power <= 0:
        raise ValueError("signal_power must be positive")
    var = signal_power / 10.0 ** (snr_db / 10.0)
    rng = np.random.default_rng(seed)
    n = signal.samples.size
    noise = np.sqrt(var / 2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return TimeSignal(samples=signal.samples + noise, sample_rate=signal.sample_rate)


def add_impulse(
    signal: TimeSignal, sir_db: float, p: float, signal_power: float, seed
) -> TimeSignal:
    """Add Bernoulli-Gaussian impulse noise i(n) = v(n) lambda(n).

    lambda(n) ~ Bernoulli(p); v(n) is circular complex Gaussian with variance
    sigma_bg^2 = signal_power / 10^(sir/10).  The SIR definition references
    sigma_bg^2 itself, so the unconditional impulse power is p * sigma_bg^2.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"impulse probability must be in [0, 1], got {p}")
    if p == 0.0 or (np.isinf(sir_db) and sir_db > 0):
        return TimeSignal(samples=signal.samples, sample_rate=signal.sample_rate)
    if signal_power <= 0:
        raise ValueError("signal_power must be positive")
    var = signal_power / 10.0 ** (sir_db / 10.0)
    rng = np.random.default_rng(seed)
    n = signal.samples.size
    hits = rng.random(n) < p
    v = np.sqrt(var / 2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return TimeSignal(
        samples=signal.samples + np.where(hits, v, 0.0),
        sample_rate=signal.sample_rate,
    )


def freq_response_surface(real: ChannelRealization, params: OfdmParams) -> np.ndarray:
    """True H(s, k) for every symbol the realization covers, [n_sym x n_fft]."""
    n_sym = real.n_samples // params.symbol_samples
    return np.stack(
        [true_freq_response(real, s, params) for s in range(n_sym)]
    )


def realization_to_csv(real: ChannelRealization, params: OfdmParams, path) -> None:
    """Dump the time/frequency response surface, re,im pairs per subcarrier."""
    surface = freq_response_surface(real, params)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in surface:
            out = np.empty(2 * row.size)
            out[0::2] = row.real
            out[1::2] = row.imag
            writer.writerow(f"{v:.12g}" for v in out)
