"""
Doppler spectra and fade-pattern metrics of envelope traces.

Spectra are rectangular-windowed DFTs of the complex trace, zero-padded to the FFT
size, shifted so 0 Hz sits in the middle and normalized to a unit peak.
"""

import logging
from dataclasses import dataclass

import numpy as np

from ris_sim.envelope import magnitude_db
from ris_sim.exceptions import ContractError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DopplerSpectrum:
    frequencies: np.ndarray
    normalized_magnitude: np.ndarray
    raw_magnitude: np.ndarray

    @property
    def bin_width(self):
        return self.frequencies[1] - self.frequencies[0] if len(self.frequencies) > 1 else 0.0

    @property
    def peak_frequency(self):
        return float(self.frequencies[np.argmax(self.raw_magnitude)])

    def dominant_bins(self, count):
        """Frequencies of the ``count`` strongest bins, strongest first."""
        order = np.argsort(self.raw_magnitude, kind='stable')[::-1][:count]
        return self.frequencies[order]

    def magnitude_at(self, frequency):
        return float(self.normalized_magnitude[np.argmin(np.abs(self.frequencies - frequency))])

    @property
    def normalized_db(self):
        return magnitude_db(self.normalized_magnitude)


@dataclass(frozen=True)
class FadeMetrics:
    delta_r_db: float
    r_bar_db: float

    def to_dict(self):
        return {'delta_r_db': self.delta_r_db, 'r_bar_db': self.r_bar_db}


def doppler_spectrum(trace, fft_size=None, truncate=False):
    samples = trace.samples
    if samples.size == 0:
        raise ContractError("Can not take the spectrum of an empty trace")
    fft_size = fft_size or trace.grid.fft_size
    if samples.size > fft_size:
        if not truncate:
            raise ContractError(
                f"Trace of {samples.size} samples does not fit an FFT of size {fft_size}")
        logger.warning("Truncating a %d-sample trace to the FFT size %d",
                       samples.size, fft_size)
        samples = samples[:fft_size]

    raw = np.abs(np.fft.fftshift(np.fft.fft(samples, n=fft_size)))
    frequencies = np.fft.fftshift(np.fft.fftfreq(fft_size, d=trace.grid.sample_interval))
    peak = raw.max()
    normalized = raw / peak if peak > 0 else np.zeros_like(raw)
    return DopplerSpectrum(frequencies, normalized, raw)


def fade_metrics(trace):
    """Peak-to-peak Δ_r and time average r̄ of |r(t)|, both in dB (10·log10 of magnitude)."""
    magnitude = trace.magnitude
    if magnitude.size == 0:
        raise ContractError("Can not measure an empty trace")
    lowest = magnitude.min()
    if lowest > 0:
        delta_r_db = float(magnitude_db(magnitude.max()) - magnitude_db(lowest))
    else:
        delta_r_db = float('inf')
    return FadeMetrics(delta_r_db, float(magnitude_db(magnitude.mean())))
