"""Gaussian-kernel scale ladders derived from a sampled signal's spectrum.

A sinusoid of frequency f is matched by a Gaussian basis function whose
standard deviation covers half a period at three sigma: 3*sigma = 1/(2f),
so sigma = 1/(6f) and the kernel scale is gamma = 1/sigma^2 = 36 f^2.

Frequencies are detected either from the DFT magnitude spectrum or from the
eigenvalue phases of a DMD fit to the delay-embedded signal.  The detected
gamma values are then quantized onto the geometric grid gamma0 * rho^j; the
model depth is the number of distinct occupied rungs.  (Counting occupied
rungs, rather than all rungs spanned by [gamma0, gamma_max], keeps widely
separated tones from inflating the depth: two clean tones always give a
two-layer ladder.)
"""

from dataclasses import dataclass

import numpy as np

from .dmd import delay_embed, dmd_rrr
from .errors import InvalidInput

# Fraction of the peak DFT magnitude a bin must reach to count as a real
# frequency.  Artifact choice (no principled threshold exists); 0.33
# reproduces the reference layer counts for the tone/chirp test signals.
DEFAULT_KEEP_FRACTION = 0.33
DEFAULT_RHO = 2.0

# gamma for a signal with no detectable oscillation (one layer at f = 1).
FALLBACK_GAMMA = 36.0


@dataclass
class SampledSignal:
    """Uniformly sampled real signal on [a, b), endpoint-exclusive grid."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=np.float64)
        self.ys = np.asarray(self.ys, dtype=np.float64)
        if self.xs.ndim != 1 or self.xs.shape != self.ys.shape:
            raise InvalidInput("xs and ys must be 1-D and the same length")
        if self.xs.size < 8:
            raise InvalidInput("need at least 8 samples")
        dx = np.diff(self.xs)
        if np.any(dx <= 0):
            raise InvalidInput("xs must be strictly increasing")
        if np.max(np.abs(dx - dx[0])) > 1e-9 * max(abs(dx[0]), 1e-30):
            raise InvalidInput("sample spacing must be uniform")

    @property
    def spacing(self):
        return float(self.xs[1] - self.xs[0])

    @property
    def span(self):
        """Length of the periodized sample window."""
        return self.spacing * self.xs.size

    @property
    def domain(self):
        return (float(self.xs[0]), float(self.xs[0]) + self.span)


@dataclass
class ScaleLadder:
    """Geometric sequence of kernel scales and the derived layer count."""

    gamma0: float
    gamma_max: float
    rho: float
    rungs: list[int]          # occupied rungs of the grid gamma0 * rho^j
    scales: list[float]       # gamma0 * rho^j for j in rungs, ascending
    layer_count: int

    def to_json(self):
        return {
            "gamma0": self.gamma0,
            "gamma_max": self.gamma_max,
            "rho": self.rho,
            "rungs": list(self.rungs),
            "scales": list(self.scales),
            "layer_count": self.layer_count,
        }


def detect_frequencies_fft(signal, keep_fraction=DEFAULT_KEEP_FRACTION):
    """Frequencies (Hz, ascending) of DFT bins above the magnitude threshold.

    The signal is mean-subtracted first so a trend does not register as a
    spurious DC scale; bin k maps to frequency k / span.  Returns an empty
    array for an (effectively) constant signal.
    """
    if not (0.0 < keep_fraction <= 1.0):
        raise InvalidInput("keep_fraction must be in (0, 1]")
    y = signal.ys - signal.ys.mean()
    mag = np.abs(np.fft.rfft(y))
    mag[0] = 0.0
    peak = mag.max()
    if peak <= 1e-12 * max(np.abs(signal.ys).max(), 1.0):
        return np.array([])
    k = np.nonzero(mag >= keep_fraction * peak)[0]
    k = k[k > 0]
    return k / signal.span


def detect_frequencies_dmd(signal, delay=10, rank_tolerance=1e-8):
    """Frequencies from DMD eigenvalue phases of the delay-embedded signal.

    Eigenvalues with |lambda| in [0.9, 1.1] contribute |arg lambda|/(2 pi dx);
    zero-frequency (lambda near 1) is excluded and near-duplicates within 1%
    relative are merged.
    """
    if delay < 2:
        raise InvalidInput("delay must be >= 2")
    y = signal.ys - signal.ys.mean()
    if np.max(np.abs(y)) <= 1e-12 * max(np.abs(signal.ys).max(), 1.0):
        return np.array([])
    res = dmd_rrr(delay_embed(y, depth=delay), rank_tolerance=rank_tolerance)
    lam = res.eigenvalues
    lam = lam[(np.abs(lam) >= 0.9) & (np.abs(lam) <= 1.1)]
    freqs = np.abs(np.angle(lam)) / (2 * np.pi * signal.spacing)
    freqs = np.sort(freqs[freqs > 1e-9])
    out = []
    for f in freqs:
        if not out or f > out[-1] * 1.01:
            out.append(float(f))
    return np.array(out)


def freq_to_gamma(f):
    """Kernel scale for frequency f: sigma = 1/(6f), gamma = 1/sigma^2 = 36 f^2."""
    if f <= 0:
        raise InvalidInput("frequency must be positive")
    return 36.0 * f * f


def build_ladder(frequencies, rho=DEFAULT_RHO):
    """Quantize detected frequencies onto a geometric gamma grid.

    gamma0 anchors the grid at the slowest frequency; each frequency occupies
    rung floor(log_rho(gamma/gamma0)) and the layer count is the number of
    distinct occupied rungs.  An empty or singleton frequency list yields a
    single-layer ladder.
    """
    if rho <= 1.0:
        raise InvalidInput("rho must be > 1")
    freqs = np.sort(np.asarray(frequencies, dtype=np.float64))
    if freqs.size == 0:
        g = FALLBACK_GAMMA
        return ScaleLadder(g, g, rho, [0], [g], 1)
    gammas = 36.0 * freqs**2
    g0, gmax = float(gammas[0]), float(gammas[-1])
    if freqs.size == 1:
        return ScaleLadder(g0, gmax, rho, [0], [g0], 1)
    # nudge guards against log(rho^k)/log(rho) landing just below k
    rungs = np.floor(np.log(gammas / g0) / np.log(rho) + 1e-9).astype(int)
    occupied = sorted(set(int(r) for r in rungs))
    scales = [g0 * rho**j for j in occupied]
    return ScaleLadder(g0, gmax, rho, occupied, scales, max(1, len(occupied)))


def ladder_from_signal(signal, method="fft", rho=DEFAULT_RHO,
                       keep_fraction=DEFAULT_KEEP_FRACTION, delay=10):
    if method == "fft":
        freqs = detect_frequencies_fft(signal, keep_fraction=keep_fraction)
    elif method == "dmd":
        freqs = detect_frequencies_dmd(signal, delay=delay)
    else:
        raise InvalidInput(f"unknown method {method!r}")
    return build_ladder(freqs, rho=rho)
