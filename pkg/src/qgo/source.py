"""The quantum stone box: collapse bit streams and their simulated origins.

Bits can come from three places: a parameterized entangled-state model
sampled directly, synthetic four-channel time-tag streams reduced by
coincidence extraction, or scripted sequences (used for deterministic
replay).  Channel encoding: a coincidence on channels (2,4) is the
cos-component and yields bit 0 (the stone settles on p1); (1,3) yields
bit 1; (1,4) and (2,3) are the undesired HH/VV components, counted and
discarded.

The HH/VV contamination levels are calibrated so the visibility of an
extracted stream approaches ``1 - noise_hh - noise_vv`` (each undesired
component carries half its nominal level in probability mass).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from ._kernels import match_coincidences

TAG_DTYPE = np.dtype([("channel", "u1"), ("timestamp", "i8")])
_FILE_DTYPE = np.dtype([("channel", "u1"), ("timestamp", "<u8")])

CHANNELS = (1, 2, 3, 4)


class BitsExhausted(Exception):
    """A finite bit source ran out of bits; recoverable by the caller."""


class TimeTag(NamedTuple):
    channel: int
    timestamp: int  # integer nanoseconds


@dataclass
class StateParams:
    """Entangled-state and detection model parameters."""

    theta: float
    phi: float = 0.0
    noise_hh: float = 0.0
    noise_vv: float = 0.0
    pair_rate: float = 1e6  # pairs per second
    dark_rate: float = 0.0  # per-channel events per second
    jitter: float = 0.0     # per-detector timing jitter, ns std dev

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= math.pi / 2:
            raise ValueError(f"theta must be within [0, pi/2], got {self.theta}")
        if self.noise_hh < 0 or self.noise_vv < 0 or self.noise_hh + self.noise_vv >= 1:
            raise ValueError("noise_hh and noise_vv must be >= 0 and sum below 1")
        if self.pair_rate < 0 or self.dark_rate < 0 or self.jitter < 0:
            raise ValueError("rates and jitter must be >= 0")

    @property
    def p_zero(self) -> float:
        """Probability of bit 0 among kept draws."""
        return math.cos(self.theta) ** 2

    def category_thresholds(self) -> tuple[float, float, float]:
        """CDF break points over one uniform draw: HH | VV | bit 0 | bit 1."""
        t_hh = self.noise_hh / 2.0
        t_vv = t_hh + self.noise_vv / 2.0
        keep = 1.0 - t_vv
        return t_hh, t_vv, t_vv + keep * self.p_zero


@dataclass
class CoincidenceConfig:
    window: int = 2  # ns
    delays: dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.window <= 0:
            raise ValueError(f"coincidence window must be > 0, got {self.window}")
        for ch in self.delays:
            if ch not in CHANNELS:
                raise ValueError(f"delay for unknown channel {ch}")

    def delay_array(self) -> np.ndarray:
        out = np.zeros(5, dtype=np.int64)
        for ch, d in self.delays.items():
            out[ch] = d
        return out


@dataclass
class CoincidenceCounts:
    n_hv: int = 0
    n_vh: int = 0
    n_hh: int = 0
    n_vv: int = 0

    @property
    def total(self) -> int:
        return self.n_hv + self.n_vh + self.n_hh + self.n_vv


def visibility(counts: CoincidenceCounts) -> float:
    """(N_HV + N_VH - N_HH - N_VV) / total."""
    total = counts.total
    if total <= 0:
        raise ValueError("visibility undefined for zero coincidences")
    return (counts.n_hv + counts.n_vh - counts.n_hh - counts.n_vv) / total


def concurrence_pure(theta: float) -> float:
    """Analytic concurrence of the pure parameterized state: |sin 2*theta|."""
    if not 0.0 <= theta <= math.pi / 2:
        raise ValueError(f"theta must be within [0, pi/2], got {theta}")
    return abs(math.sin(2.0 * theta))


# ---------------------------------------------------------------------------
# Bit sources


class BitSource:
    """Sequential single-consumer stream of collapse bits."""

    kind = "abstract"

    def __init__(self) -> None:
        self.consumed = 0
        self.discarded = 0

    def next_bit(self) -> int:
        raise NotImplementedError

    def take(self, n: int) -> np.ndarray:
        out = np.empty(n, dtype=np.uint8)
        for i in range(n):
            out[i] = self.next_bit()
        return out


class ScriptedBitSource(BitSource):
    kind = "scripted"

    def __init__(self, bits: Iterable[int]) -> None:
        super().__init__()
        self.bits = [int(b) for b in bits]
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("scripted bits must all be 0 or 1")

    def remaining(self) -> int:
        return len(self.bits) - self.consumed

    def next_bit(self) -> int:
        if self.consumed >= len(self.bits):
            raise BitsExhausted("scripted bit source exhausted")
        bit = self.bits[self.consumed]
        self.consumed += 1
        return bit


class SimulatedBitSource(BitSource):
    """Seeded sampler of the entangled-state model; an unbounded stream.

    HH/VV draws are discarded (and counted) exactly as a player would
    discard an undesired component and retrieve the next stored state.
    """

    kind = "simulated"
    _CHUNK = 4096

    def __init__(self, params: StateParams, seed=None) -> None:
        super().__init__()
        self.params = params
        self.seed = seed
        self._rng = np.random.default_rng(seed)
        self._buffer = np.empty(0, dtype=np.uint8)
        self._cursor = 0

    def _refill(self, want: int) -> None:
        t_hh, t_vv, t_zero = self.params.category_thresholds()
        kept: list[np.ndarray] = [self._buffer[self._cursor:]]
        have = kept[0].shape[0]
        while have < want:
            u = self._rng.random(max(self._CHUNK, want - have))
            keep_mask = u >= t_vv
            self.discarded += int(u.shape[0] - keep_mask.sum())
            bits = (u[keep_mask] >= t_zero).astype(np.uint8)
            kept.append(bits)
            have += bits.shape[0]
        self._buffer = np.concatenate(kept)
        self._cursor = 0

    def take(self, n: int) -> np.ndarray:
        if self._buffer.shape[0] - self._cursor < n:
            self._refill(n)
        out = self._buffer[self._cursor:self._cursor + n].copy()
        self._cursor += n
        self.consumed += n
        return out

    def next_bit(self) -> int:
        return int(self.take(1)[0])


class FileBitSource(BitSource):
    """Bits extracted lazily from a time-tag file on first read."""

    kind = "file"

    def __init__(self, path, config: CoincidenceConfig | None = None) -> None:
        super().__init__()
        self.path = Path(path)
        self.config = config or CoincidenceConfig()
        self._bits: np.ndarray | None = None
        self.counts: CoincidenceCounts | None = None

    def _load(self) -> None:
        if self._bits is not None:
            return
        tags = read_tags(self.path)
        delays = self.config.delay_array()
        corrected = tags["timestamp"].astype(np.int64) - delays[tags["channel"]]
        order = np.lexsort((tags["channel"], corrected))
        if not np.array_equal(order, np.arange(len(tags))):
            warnings.warn(f"{self.path}: tags not time-sorted; sorting on load")
            tags = tags[order]
            corrected = corrected[order]
        self._bits, self.counts = _extract_sorted(tags["channel"], corrected,
                                                  self.config.window)
        self.discarded = self.counts.n_hh + self.counts.n_vv

    def remaining(self) -> int:
        self._load()
        return len(self._bits) - self.consumed

    def next_bit(self) -> int:
        self._load()
        if self.consumed >= len(self._bits):
            raise BitsExhausted(f"tag file {self.path} yielded no more bits")
        bit = int(self._bits[self.consumed])
        self.consumed += 1
        return bit


def sample_bit(source: BitSource) -> int:
    """Draw one collapse bit from a simulated source."""
    if source.kind != "simulated":
        raise ValueError(f"sample_bit requires a simulated source, got {source.kind}")
    return source.next_bit()


def parse_bit_script(text: str) -> list[int]:
    """Bit script format: 0/1 characters, whitespace ignored."""
    bits = []
    for ch in text:
        if ch in "01":
            bits.append(int(ch))
        elif not ch.isspace():
            raise ValueError(f"invalid character {ch!r} in bit script")
    return bits


def open_bitsource(spec) -> BitSource:
    """Build a bit source from a spec: an existing source, a dict
    (``{"kind": "scripted"|"simulated"|"file", ...}``) or a compact string
    (``scripted:0101``, ``simulated:theta=0.785,seed=42``, ``file:tags.bin``).
    """
    if isinstance(spec, BitSource):
        return spec
    if isinstance(spec, str):
        kind, _, detail = spec.partition(":")
        spec = {"kind": kind.strip()}
        if spec["kind"] == "scripted":
            spec["bits"] = parse_bit_script(detail)
        elif spec["kind"] == "file":
            spec["path"] = detail
        else:
            for item in detail.split(","):
                if not item.strip():
                    continue
                key, _, value = item.partition("=")
                spec[key.strip()] = value.strip()
    if not isinstance(spec, dict):
        raise ValueError(f"cannot open bit source from {spec!r}")
    kind = spec.get("kind")
    if kind == "scripted":
        bits = spec.get("bits")
        if bits is None and "path" in spec:
            bits = parse_bit_script(Path(spec["path"]).read_text())
        if isinstance(bits, str):
            bits = parse_bit_script(bits)
        if bits is None:
            raise ValueError("scripted source needs bits")
        return ScriptedBitSource(bits)
    if kind == "simulated":
        params = spec.get("params")
        if params is None:
            params = StateParams(
                theta=float(spec.get("theta", math.pi / 4)),
                phi=float(spec.get("phi", 0.0)),
                noise_hh=float(spec.get("noise_hh", 0.0)),
                noise_vv=float(spec.get("noise_vv", 0.0)),
            )
        seed = spec.get("seed")
        return SimulatedBitSource(params, None if seed is None else int(seed))
    if kind == "file":
        config = spec.get("config")
        if config is None:
            config = CoincidenceConfig(window=int(spec.get("window", 2)))
        return FileBitSource(spec["path"], config)
    raise ValueError(f"unknown bit source kind {kind!r}")


# ---------------------------------------------------------------------------
# Time-tag generation and coincidence extraction

# Channel assignment per category: (photon 1 output, photon 2 output).
_CATEGORY_CHANNELS = np.array(
    [[1, 4],   # HH: discarded
     [2, 3],   # VV: discarded
     [2, 4],   # cos component -> bit 0
     [1, 3]],  # sin component -> bit 1
    dtype=np.uint8)


def generate_timetags(params: StateParams, duration: float, seed=None) -> np.ndarray:
    """Synthesize a sorted four-channel tag stream for ``duration`` seconds.

    Pair arrivals are homogeneous Poisson at ``pair_rate``; each pair lands on
    the channel pair of its drawn category, its two tags sharing the arrival
    time plus independent per-detector jitter.  Independent Poisson dark
    counts are superimposed per channel.
    """
    if duration <= 0:
        raise ValueError(f"duration must be > 0, got {duration}")
    rng = np.random.default_rng(seed)
    span_ns = duration * 1e9
    t_hh, t_vv, t_zero = params.category_thresholds()

    n_pairs = rng.poisson(params.pair_rate * duration)
    times = np.sort(rng.uniform(0.0, span_ns, n_pairs))
    u = rng.random(n_pairs)
    category = np.where(u < t_hh, 0,
                        np.where(u < t_vv, 1, np.where(u < t_zero, 2, 3)))
    chans = _CATEGORY_CHANNELS[category]

    all_channels = [chans[:, 0], chans[:, 1]]
    if params.jitter > 0:
        t1 = times + rng.normal(0.0, params.jitter, n_pairs)
        t2 = times + rng.normal(0.0, params.jitter, n_pairs)
    else:
        t1 = times
        t2 = times.copy()
    all_times = [t1, t2]

    if params.dark_rate > 0:
        for ch in CHANNELS:
            n_dark = rng.poisson(params.dark_rate * duration)
            all_channels.append(np.full(n_dark, ch, dtype=np.uint8))
            all_times.append(rng.uniform(0.0, span_ns, n_dark))

    channels = np.concatenate(all_channels).astype(np.uint8)
    stamps = np.maximum(np.rint(np.concatenate(all_times)), 0).astype(np.int64)
    order = np.lexsort((channels, stamps))
    tags = np.empty(len(channels), dtype=TAG_DTYPE)
    tags["channel"] = channels[order]
    tags["timestamp"] = stamps[order]
    return tags


def _as_tag_array(tags) -> np.ndarray:
    if isinstance(tags, np.ndarray) and tags.dtype == TAG_DTYPE:
        return tags
    arr = np.empty(len(tags), dtype=TAG_DTYPE)
    for i, (ch, t) in enumerate(tags):
        arr[i] = (ch, t)
    return arr


def _extract_sorted(channels: np.ndarray, corrected: np.ndarray,
                    window: int) -> tuple[np.ndarray, CoincidenceCounts]:
    sides = (channels >= 3).astype(np.uint8)
    ia, ib = match_coincidences(corrected, sides, window)
    ch_a = channels[ia]
    ch_b = channels[ib]
    code = (ch_a.astype(np.int8) - 1) * 2 + (ch_b.astype(np.int8) - 3)
    counts = CoincidenceCounts(
        n_hv=int(np.count_nonzero(code == 3)),
        n_vh=int(np.count_nonzero(code == 0)),
        n_hh=int(np.count_nonzero(code == 1)),
        n_vv=int(np.count_nonzero(code == 2)),
    )
    signal = (code == 0) | (code == 3)
    bits = (code[signal] == 0).astype(np.uint8)
    return bits, counts


def extract_bits(tags, config: CoincidenceConfig | None = None
                 ) -> tuple[np.ndarray, CoincidenceCounts]:
    """Greedy earliest-first coincidence extraction over a sorted tag stream.

    A coincidence pairs one tag from channels {1,2} with one from {3,4}
    within ``window`` ns after delay correction; each tag is used at most
    once.  Returns the signal bits in completion order plus the four tallies.
    """
    config = config or CoincidenceConfig()
    arr = _as_tag_array(tags)
    if np.any(arr["channel"] < 1) or np.any(arr["channel"] > 4):
        raise ValueError("tag channels must be within 1..4")
    delays = config.delay_array()
    corrected = arr["timestamp"].astype(np.int64) - delays[arr["channel"]]
    if np.any(np.diff(corrected) < 0):
        raise ValueError("tags must be time-sorted after delay correction")
    return _extract_sorted(arr["channel"], corrected, config.window)


# ---------------------------------------------------------------------------
# Tag file I/O: packed binary (u8 channel, u64 ns) or CSV `channel,timestamp_ns`.


def write_tags(path, tags) -> None:
    path = Path(path)
    arr = _as_tag_array(tags)
    if path.suffix.lower() in (".csv", ".txt"):
        with open(path, "w") as fh:
            fh.write("channel,timestamp_ns\n")
            for ch, t in zip(arr["channel"], arr["timestamp"]):
                fh.write(f"{ch},{t}\n")
    else:
        out = np.empty(len(arr), dtype=_FILE_DTYPE)
        out["channel"] = arr["channel"]
        out["timestamp"] = arr["timestamp"].astype(np.uint64)
        out.tofile(path)


def read_tags(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"tag file {path} does not exist")
    if path.suffix.lower() in (".csv", ".txt"):
        with open(path) as fh:
            header = fh.readline().strip().lower().replace(" ", "")
            if header != "channel,timestamp_ns":
                raise ValueError(f"{path}: expected header 'channel,timestamp_ns'")
            data = np.loadtxt(fh, delimiter=",", dtype=np.int64, ndmin=2)
        if data.size == 0:
            return np.empty(0, dtype=TAG_DTYPE)
        arr = np.empty(data.shape[0], dtype=TAG_DTYPE)
        arr["channel"] = data[:, 0]
        arr["timestamp"] = data[:, 1]
    else:
        raw = np.fromfile(path, dtype=_FILE_DTYPE)
        arr = np.empty(len(raw), dtype=TAG_DTYPE)
        arr["channel"] = raw["channel"]
        arr["timestamp"] = raw["timestamp"].astype(np.int64)
    if len(arr) and (arr["channel"].min() < 1 or arr["channel"].max() > 4):
        raise ValueError(f"{path}: tag channels must be within 1..4")
    return arr
