"""16-QAM mapping and the OFDM modem with an LTE-like comb-pilot frame grid.

Both DFT directions use the unitary 1/sqrt(N) convention, so Parseval holds
exactly and a static channel of length <= cp_len satisfies Y(k) = X(k) H(k)
with H taken as the plain DFT of the zero-padded taps.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputShapeError

# Per-axis Gray code for the unit-energy 16-QAM lattice {+-1, +-3}/sqrt(10).
# Two bits pick each axis level (00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3, so
# adjacent levels differ in one bit); a group b0 b1 b2 b3 maps (b0 b1) to the
# in-phase level and (b2 b3) to the quadrature level.
_GRAY_AXIS_LEVELS = np.array([-3.0, -1.0, 3.0, 1.0])

QAM16_CONSTELLATION = (
    _GRAY_AXIS_LEVELS[np.arange(16) >> 2]
    + 1j * _GRAY_AXIS_LEVELS[np.arange(16) & 3]
) / np.sqrt(10.0)

_QPSK_POINTS = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2.0)


@dataclass(frozen=True)
class OfdmParams:
    """OFDM numerology plus the comb pilot pattern.

    Pilots sit at subcarriers pilot_offset + m * pilot_spacing on every OFDM
    symbol of the frame.
    """

    n_fft: int = 512
    cp_len: int = 36
    delta_f: float = 15e3
    n_symbols_per_frame: int = 140
    pilot_spacing: int = 6
    pilot_offset: int = 0
    bits_per_symbol: int = 4

    def __post_init__(self):
        if self.n_fft < 2 or self.n_fft & (self.n_fft - 1):
            raise ValueError(f"n_fft must be a power of two, got {self.n_fft}")
        if not 0 <= self.cp_len < self.n_fft:
            raise ValueError(f"cp_len must be in [0, n_fft), got {self.cp_len}")
        if self.delta_f <= 0:
            raise ValueError("delta_f must be positive")
        if self.n_symbols_per_frame < 1:
            raise ValueError("n_symbols_per_frame must be >= 1")
        if self.bits_per_symbol != 4:
            raise ValueError("only 16-QAM (bits_per_symbol = 4) is supported")
        if not 0 <= self.pilot_offset < self.n_fft:
            raise ValueError("pilot_offset outside [0, n_fft)")
        if self.pilot_spacing < 1:
            raise ValueError("pilot_spacing must be >= 1")
        if self.n_pilots < 2:
            raise ValueError("pilot pattern must place at least 2 pilots")

    @property
    def n_pilots(self) -> int:
        return (self.n_fft - self.pilot_offset - 1) // self.pilot_spacing + 1

    @property
    def pilot_positions(self) -> np.ndarray:
        return np.arange(self.pilot_offset, self.n_fft, self.pilot_spacing)

    @property
    def sample_rate(self) -> float:
        return self.n_fft * self.delta_f

    @property
    def symbol_samples(self) -> int:
        """Samples of one modulated OFDM symbol including its cyclic prefix."""
        return self.n_fft + self.cp_len

    @property
    def data_capacity_bits(self) -> int:
        """Payload bits carried by one frame."""
        n_data = self.n_fft - self.n_pilots
        return n_data * self.n_symbols_per_frame * self.bits_per_symbol


@dataclass
class TimeSignal:
    """Complex baseband samples at a fixed sample rate."""

    samples: np.ndarray
    sample_rate: float

    def __len__(self):
        return len(self.samples)

    @property
    def power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))


@dataclass
class ResourceGrid:
    """One frame: frequency-domain symbols with the pilot mask and payload."""

    data: np.ndarray            # complex, [n_symbols x n_fft]
    pilot_mask: np.ndarray      # bool, same shape
    payload_bits: np.ndarray    # uint8 bits backing the data cells, row-major

    @property
    def n_symbols(self) -> int:
        return self.data.shape[0]


def map_qam16(bits) -> np.ndarray:
    """Gray-map bits (groups of 4) onto the unit-average-power 16-QAM lattice."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size % 4:
        raise InputShapeError(f"bit count {bits.size} is not divisible by 4")
    groups = bits.reshape(-1, 4)
    idx = groups @ np.array([8, 4, 2, 1], dtype=np.int64)
    return QAM16_CONSTELLATION[idx]


def demap_qam16(symbols) -> np.ndarray:
    """Hard-decide symbols to bits by minimum Euclidean distance.

    Ties break toward the lexicographically smallest bit pattern (the
    constellation is indexed by its 4-bit pattern and argmin keeps the first
    minimum), so e.g. 0+0j always demaps to 0101.
    """
    symbols = np.asarray(symbols, dtype=complex).ravel()
    d2 = np.abs(symbols[:, None] - QAM16_CONSTELLATION[None, :]) ** 2
    idx = np.argmin(d2, axis=1)
    shifts = np.array([3, 2, 1, 0])
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def pilot_symbols(params: OfdmParams, seed) -> np.ndarray:
    """Seeded constant-modulus QPSK pilot values, [n_symbols x n_pilots].

    Transmitter and receiver regenerate the same sequence from (params, seed).
    """
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, 4, size=(params.n_symbols_per_frame, params.n_pilots))
    return _QPSK_POINTS[idx]


def build_frame(params: OfdmParams, payload, seed) -> ResourceGrid:
    """Assemble a frame: comb pilots on every symbol, payload on the rest."""
    payload = np.asarray(payload, dtype=np.uint8).ravel()
    if payload.size != params.data_capacity_bits:
        raise InputShapeError(
            f"payload holds {payload.size} bits but the frame carries "
            f"{params.data_capacity_bits}"
        )
    n_sym, n_fft = params.n_symbols_per_frame, params.n_fft
    mask = np.zeros((n_sym, n_fft), dtype=bool)
    mask[:, params.pilot_positions] = True

    data = np.zeros((n_sym, n_fft), dtype=complex)
    data[mask] = pilot_symbols(params, seed).ravel()
    data[~mask] = map_qam16(payload)
    return ResourceGrid(data=data, pilot_mask=mask, payload_bits=payload.copy())


def ofdm_modulate(grid_row, params: OfdmParams) -> TimeSignal:
    """Unitary IDFT of one grid row plus cyclic-prefix prepend."""
    row = np.asarray(grid_row, dtype=complex).ravel()
    if row.size != params.n_fft:
        raise InputShapeError(f"expected {params.n_fft} subcarriers, got {row.size}")
    body = np.fft.ifft(row) * np.sqrt(params.n_fft)
    samples = np.concatenate([body[params.n_fft - params.cp_len:], body])
    return TimeSignal(samples=samples, sample_rate=params.sample_rate)


def ofdm_demodulate(signal: TimeSignal, params: OfdmParams) -> np.ndarray:
    """Drop the cyclic prefix and apply the unitary DFT."""
    samples = np.asarray(signal.samples, dtype=complex).ravel()
    if samples.size != params.symbol_samples:
        raise InputShapeError(
            f"expected {params.symbol_samples} samples, got {samples.size}"
        )
    body = samples[params.cp_len:]
    return np.fft.fft(body) / np.sqrt(params.n_fft)


def grid_to_csv(grid: ResourceGrid, path) -> None:
    """Dump the grid, one row per OFDM symbol with re,im pairs per cell."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in grid.data:
            out = np.empty(2 * row.size)
            out[0::2] = row.real
            out[1::2] = row.imag
            writer.writerow(f"{v:.12g}" for v in out)
