"""
Instrument layer between the physics and the data

Gaussian IRF convolution, Poissonian background mixing, the coincidence
correlator for click streams, and plain-text file formats for streams, curves,
spectra and histograms.
"""

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.signal import fftconvolve

from pyrfstat.errors import ClickStreamError, FileFormatError, ParameterError, SamplingError
from pyrfstat.units import ClickStream, CorrelationCurve, IRFParams, Spectrum, _frozen_array

logger = logging.getLogger(__name__)

KERNEL_HALF_WIDTH_SIGMAS = 5.0
# Minimum number of samples per IRF FWHM
IRF_SAMPLES_PER_FWHM = 8
EDGE_FLATNESS = 1e-4
# Events of stream a handled per correlator chunk
CORRELATOR_CHUNK = 8192

CLICKS_MAGIC = "rfstat-clicks"
CURVE_MAGIC = "rfstat-curve"
SPECTRUM_MAGIC = "rfstat-spectrum"
HISTOGRAM_MAGIC = "rfstat-histogram"
FORMAT_VERSION = "v1"


@dataclass(frozen=True)
class Histogram:
    """
    Coincidence counts on a symmetric delay axis

    bin_start is the delay at the centre of the first bin; bins are centred on
    bin_start + k * bin_width. normalization is the expected count per bin for
    uncorrelated streams.
    """

    bin_start: float
    bin_width: float
    counts: np.ndarray = field(repr=False)
    normalization: Optional[float] = None

    def __post_init__(self):
        if not self.bin_width > 0:
            raise ParameterError(f"bin_width must be positive, got {self.bin_width}")
        counts = np.asarray(self.counts)
        if counts.size and not np.all(counts == np.round(counts)):
            raise ParameterError("histogram counts must be integers")
        counts = _frozen_array(counts, dtype=np.int64)
        if np.any(counts < 0):
            raise ParameterError("histogram counts must be non-negative")
        object.__setattr__(self, "counts", counts)
        if self.normalization is not None and not self.normalization > 0:
            raise ParameterError(f"normalization must be positive, got {self.normalization}")

    @property
    def taus(self) -> np.ndarray:
        return self.bin_start + self.bin_width * np.arange(len(self.counts))

    @property
    def total(self) -> int:
        return int(self.counts.sum())


# IRF convolution


def gaussian_kernel(step: float, fwhm: float) -> np.ndarray:
    """Unit-sum Gaussian sampled at step, truncated at five standard deviations"""
    sigma = IRFParams(fwhm).sigma
    half = int(math.ceil(KERNEL_HALF_WIDTH_SIGMAS * sigma / step))
    x = step * np.arange(-half, half + 1)
    kernel = np.exp(-0.5 * (x / sigma) ** 2)
    return kernel / kernel.sum()


def convolve_padded(values, kernel: np.ndarray) -> np.ndarray:
    """Same-length convolution, the signal extended with its edge values"""
    half = len(kernel) // 2
    padded = np.pad(np.asarray(values, dtype=float), half, mode="edge")
    return fftconvolve(padded, kernel, mode="valid")


def convolve_irf(curve: CorrelationCurve, irf: IRFParams) -> CorrelationCurve:
    """
    Convolve a correlation curve with the Gaussian detector response

    Parameters
    ----------
    curve : CorrelationCurve
        Sampled at no more than irf.fwhm / 8 and flat at both grid edges
    irf : IRFParams
        Detector timing response

    Returns
    -------
    CorrelationCurve
        On the same grid; constant curves are returned unchanged
    """
    if curve.tau_step > irf.fwhm / IRF_SAMPLES_PER_FWHM:
        raise SamplingError(
            f"grid step {curve.tau_step} ps exceeds irf.fwhm/{IRF_SAMPLES_PER_FWHM} = "
            f"{irf.fwhm / IRF_SAMPLES_PER_FWHM} ps"
        )
    kernel = gaussian_kernel(curve.tau_step, irf.fwhm)
    half = len(kernel) // 2
    values = curve.values
    for name, edge in (("left", values[: half + 1]), ("right", values[-(half + 1):])):
        if np.ptp(edge) >= EDGE_FLATNESS:
            raise SamplingError(
                f"curve not flat at the {name} grid edge (variation {np.ptp(edge):.3g} "
                f"over the kernel half-width); extend the grid"
            )
    convolved = np.maximum(convolve_padded(values, kernel), 0.0)
    errors = None
    if curve.errors is not None:
        errors = np.sqrt(np.maximum(convolve_padded(curve.errors ** 2, kernel ** 2), 0.0))
    return CorrelationCurve(curve.tau_start, curve.tau_step, convolved, errors)


# Background


def _check_fraction(rho):
    if not 0.0 <= rho <= 1.0:
        raise ParameterError(f"signal fraction must lie in [0, 1], got {rho}")


def _apply(g2, transform, error_scale):
    if isinstance(g2, CorrelationCurve):
        errors = None if g2.errors is None else g2.errors * error_scale
        return CorrelationCurve(g2.tau_start, g2.tau_step, transform(g2.values), errors)
    result = transform(np.asarray(g2, dtype=float))
    if np.ndim(result) == 0:
        return float(result)
    return result


def mix_background(g2, rho: float):
    """
    Add uncorrelated Poissonian background, g2_meas = 1 + rho^2 (g2 - 1)

    Parameters
    ----------
    g2 : float, array-like or CorrelationCurve
    rho : float
        Fraction of detected light that comes from the emitter
    """
    _check_fraction(rho)
    return _apply(g2, lambda g: 1.0 + rho ** 2 * (g - 1.0), rho ** 2)


def unmix_background(g2, rho: float):
    """Inverse of mix_background for rho > 0"""
    _check_fraction(rho)
    if rho == 0:
        raise ParameterError("background cannot be removed for rho = 0")
    return _apply(g2, lambda g: 1.0 + (g - 1.0) / rho ** 2, 1.0 / rho ** 2)


# Correlator


def _pair_counts(ta, tb, bin_width, n_half, exclude_zero_delay):
    reach = (n_half + 0.5) * bin_width
    lo = np.searchsorted(tb, ta - reach, side="left")
    hi = np.searchsorted(tb, ta + reach, side="right")
    per_event = hi - lo
    total = int(per_event.sum())
    counts = np.zeros(2 * n_half + 1, dtype=np.int64)
    if total == 0:
        return counts
    owner = np.repeat(np.arange(len(ta)), per_event)
    offsets = np.arange(total) - np.repeat(np.cumsum(per_event) - per_event, per_event)
    delays = tb[lo[owner] + offsets] - ta[owner]
    bins = np.rint(delays / bin_width).astype(np.int64)
    keep = np.abs(bins) <= n_half
    if exclude_zero_delay:
        keep &= delays != 0
    counts += np.bincount(bins[keep] + n_half, minlength=2 * n_half + 1)
    return counts


def correlate_clicks(
    a: ClickStream,
    b: ClickStream,
    bin_width: float,
    window: float,
    exclude_zero_delay: bool = False,
    workers: int = 1,
) -> Histogram:
    """
    Histogram of all delays t_b - t_a within the window

    Delays are binned to the nearest multiple of bin_width (ties to even), so
    swapping the streams mirrors the histogram exactly. The window holds
    2 * round(window / bin_width) + 1 bins.

    Parameters
    ----------
    a, b : ClickStream
        Start and stop streams
    bin_width : float
        Bin width in ps
    window : float
        Largest |delay| histogrammed, ps
    exclude_zero_delay : bool
        Drop pairs with identical timestamps, used when a stream is correlated
        with itself
    workers : int
        Threads sharing the chunks of stream a; the merge is in chunk order and
        bit-identical to a single-threaded run

    Returns
    -------
    Histogram
        With normalization N_a * N_b * bin_width / duration
    """
    if len(a) == 0 or len(b) == 0:
        raise ClickStreamError("cannot correlate an empty click stream")
    if not bin_width > 0:
        raise ParameterError(f"bin_width must be positive, got {bin_width}")
    if window < bin_width:
        raise ParameterError(f"window {window} ps is shorter than bin_width {bin_width} ps")
    n_half = int(round(window / bin_width))
    ta = a.timestamps
    tb = b.timestamps
    starts = range(0, len(ta), CORRELATOR_CHUNK)

    def chunk(start):
        return _pair_counts(ta[start:start + CORRELATOR_CHUNK], tb, bin_width, n_half, exclude_zero_delay)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(chunk, starts))
    else:
        parts = [chunk(start) for start in starts]
    counts = np.sum(parts, axis=0)
    logger.debug("correlated %d x %d clicks in %d chunks", len(ta), len(tb), len(parts))
    duration = min(a.duration, b.duration)
    normalization = None
    if duration > 0:
        normalization = len(ta) * len(tb) * bin_width / duration
    return Histogram(-n_half * bin_width, bin_width, counts, normalization)


def histogram_errors(h: Histogram) -> np.ndarray:
    """Poisson standard errors, one count for empty bins"""
    return np.sqrt(np.maximum(h.counts, 1).astype(float))


def normalize_histogram(h: Histogram, normalization: Optional[float] = None) -> CorrelationCurve:
    """Divide counts by the uncorrelated expectation to estimate g2"""
    if normalization is None:
        normalization = h.normalization
    if normalization is None or not normalization > 0:
        raise ParameterError("histogram has no positive normalization")
    return CorrelationCurve(
        h.bin_start, h.bin_width, h.counts / normalization, histogram_errors(h) / normalization
    )


# File formats


def _number(x) -> str:
    x = float(x)
    if x.is_integer() and abs(x) < 2 ** 53:
        return str(int(x))
    return repr(x)


def _header(magic, **metadata) -> str:
    pairs = " ".join(f"{key}={value}" for key, value in metadata.items())
    return f"# {magic} {FORMAT_VERSION} {pairs}".rstrip() + "\n"


def read_metadata(path, magic=None) -> dict:
    """Parse the '# magic v1 key=value ...' first line of a data file"""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as handle:
        first = handle.readline()
    return _parse_header(first, path, magic)


def _parse_header(line, path, magic):
    words = line.strip().split()
    if len(words) < 3 or words[0] != "#":
        raise FileFormatError("missing '# <format> v1' header", path, 1)
    if magic is not None and words[1] != magic:
        raise FileFormatError(f"expected a {magic} file, found {words[1]}", path, 1)
    if words[2] != FORMAT_VERSION:
        raise FileFormatError(f"unsupported format version {words[2]}", path, 1)
    metadata = {"format": words[1]}
    for word in words[3:]:
        key, sep, value = word.partition("=")
        if not sep:
            raise FileFormatError(f"malformed header field {word!r}", path, 1)
        metadata[key] = value
    return metadata


def _float_field(metadata, key, path):
    try:
        return float(metadata[key])
    except KeyError:
        raise FileFormatError(f"header lacks {key}", path, 1) from None
    except ValueError:
        raise FileFormatError(f"header field {key} is not a number", path, 1) from None


def save_clicks(streams, path):
    """
    Write one or more click streams as 'timestamp_ps<TAB>channel' rows

    Rows are ordered by time then channel; the header records the longest
    duration.
    """
    if isinstance(streams, ClickStream):
        streams = [streams]
    path = Path(path)
    times = np.concatenate([s.timestamps for s in streams]) if streams else np.zeros(0, np.int64)
    channels = np.concatenate([np.full(len(s), s.channel, dtype=np.int64) for s in streams]) if streams else times
    order = np.lexsort((channels, times))
    duration = max((s.duration for s in streams), default=0.0)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(_header(CLICKS_MAGIC, duration_ps=_number(duration)))
        handle.writelines(f"{t}\t{c}\n" for t, c in zip(times[order], channels[order]))
    logger.info("wrote %d clicks to %s", len(times), path)


def load_click_channels(path) -> dict:
    """Read a click file into one ClickStream per channel"""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.readlines()
    if not lines:
        raise FileFormatError("empty file", path)
    duration = _float_field(_parse_header(lines[0], path, CLICKS_MAGIC), "duration_ps", path)
    rows = {}
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        try:
            if len(parts) != 2:
                raise ValueError
            timestamp, channel = int(parts[0]), int(parts[1])
        except ValueError:
            raise FileFormatError(f"malformed row {line.rstrip()!r}", path, number) from None
        rows.setdefault(channel, ([], []))
        rows[channel][0].append(timestamp)
        rows[channel][1].append(number)
    if not rows:
        raise ClickStreamError(f"{path}: click file holds no events")
    streams = {}
    for channel, (timestamps, numbers) in sorted(rows.items()):
        timestamps = np.asarray(timestamps, dtype=np.int64)
        bad = np.flatnonzero(np.diff(timestamps) <= 0)
        if bad.size:
            index = int(bad[0] + 1)
            raise ClickStreamError(
                f"{path}:{numbers[index]}: channel {channel} timestamps not strictly "
                f"increasing at index {index}",
                index=index,
            )
        streams[channel] = ClickStream(channel, timestamps, duration)
    return streams


def load_clicks(path, channel: Optional[int] = None) -> ClickStream:
    streams = load_click_channels(path)
    if channel is None:
        if len(streams) > 1:
            raise FileFormatError(
                f"file holds channels {sorted(streams)}; choose one", Path(path)
            )
        return next(iter(streams.values()))
    if channel not in streams:
        raise ClickStreamError(f"{path}: no events on channel {channel}")
    return streams[channel]


def _write_table(path, header, columns, rows):
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(header)
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)
    logger.info("wrote %s", path)


def _read_table(path, magic, columns):
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as handle:
        metadata = _parse_header(handle.readline(), path, magic)
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or header[: len(columns)] != list(columns):
            raise FileFormatError(f"expected columns {','.join(columns)}", path, 2)
        width = len(header)
        table = []
        for row in reader:
            line = reader.line_num + 1
            if not row:
                continue
            if len(row) != width:
                raise FileFormatError(f"expected {width} fields, found {len(row)}", path, line)
            try:
                table.append([float(x) for x in row])
            except ValueError:
                raise FileFormatError(f"non-numeric field in {row!r}", path, line) from None
    return metadata, header, np.array(table, dtype=float).reshape(-1, width)


def save_curve(curve: CorrelationCurve, path, **metadata):
    """CSV with tau_ps,value[,error] columns; extra metadata goes into the header"""
    header = _header(
        CURVE_MAGIC,
        tau_start_ps=repr(float(curve.tau_start)),
        tau_step_ps=repr(float(curve.tau_step)),
        **metadata,
    )
    columns = ["tau_ps", "value"]
    data = [curve.taus, curve.values]
    if curve.errors is not None:
        columns.append("error")
        data.append(curve.errors)
    _write_table(path, header, columns, ([repr(float(x)) for x in row] for row in zip(*data)))


def load_curve(path) -> CorrelationCurve:
    metadata, header, table = _read_table(path, CURVE_MAGIC, ("tau_ps", "value"))
    errors = table[:, 2] if "error" in header else None
    try:
        return CorrelationCurve(
            _float_field(metadata, "tau_start_ps", path),
            _float_field(metadata, "tau_step_ps", path),
            table[:, 1],
            errors,
        )
    except ParameterError as error:
        raise FileFormatError(str(error), Path(path)) from error


def save_spectrum(spectrum: Spectrum, path, **metadata):
    header = _header(
        SPECTRUM_MAGIC,
        omega_start_uev=repr(float(spectrum.omega_start)),
        omega_step_uev=repr(float(spectrum.omega_step)),
        **metadata,
    )
    rows = ([repr(float(e)), repr(float(d))] for e, d in zip(spectrum.energies, spectrum.density))
    _write_table(path, header, ["energy_uev", "density"], rows)


def load_spectrum(path) -> Spectrum:
    metadata, _, table = _read_table(path, SPECTRUM_MAGIC, ("energy_uev", "density"))
    try:
        return Spectrum(
            _float_field(metadata, "omega_start_uev", path),
            _float_field(metadata, "omega_step_uev", path),
            table[:, 1],
        )
    except ParameterError as error:
        raise FileFormatError(str(error), Path(path)) from error


def save_histogram(h: Histogram, path, **metadata):
    fields = dict(bin_start_ps=repr(float(h.bin_start)), bin_width_ps=repr(float(h.bin_width)))
    if h.normalization is not None:
        fields["normalization"] = repr(float(h.normalization))
    header = _header(HISTOGRAM_MAGIC, **fields, **metadata)
    rows = ([repr(float(t)), str(int(c))] for t, c in zip(h.taus, h.counts))
    _write_table(path, header, ["tau_ps", "count"], rows)


def load_histogram(path) -> Histogram:
    metadata, _, table = _read_table(path, HISTOGRAM_MAGIC, ("tau_ps", "count"))
    normalization = None
    if "normalization" in metadata:
        normalization = _float_field(metadata, "normalization", path)
    try:
        return Histogram(
            _float_field(metadata, "bin_start_ps", path),
            _float_field(metadata, "bin_width_ps", path),
            table[:, 1],
            normalization,
        )
    except ParameterError as error:
        raise FileFormatError(str(error), Path(path)) from error


def save_columns(path, magic, columns, arrays, **metadata):
    """
    Generic CSV for tables with no dedicated type, such as visibilities or
    lifetime-versus-detuning curves. NaN is written as an empty field.
    """
    def field_text(x):
        x = float(x)
        return "" if math.isnan(x) else repr(x)

    rows = ([field_text(x) for x in row] for row in zip(*arrays))
    _write_table(path, _header(magic, **metadata), list(columns), rows)
