"""Synthetic hierarchical instrument corpus, mel features and the MEL1 file format.

Instruments are grouped into families.  Each family has a prototype
(partial profile, spectral tilt, envelope, vibrato, inharmonicity) and every
instrument is a seeded perturbation of its family prototype, so instruments
of one family sound alike and families differ.  Every rendered example gets
its own random stream derived from ``(seed, example_index)``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, FormatError

MEL_FLOOR = 1e-5
SPLITS = ("train", "val", "test")
SPLIT_CODES = {name: i for i, name in enumerate(SPLITS)}

MAGIC = b"MEL1"
FORMAT_VERSION = 1

NOTE_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")


def midi_to_hz(midi) -> np.ndarray:
    return 440.0 * 2.0 ** ((np.asarray(midi, dtype=np.float64) - 69.0) / 12.0)


def midi_name(midi: int) -> str:
    return f"{NOTE_NAMES[midi % 12]}{midi // 12 - 1}"


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


# -- synthesis ---------------------------------------------------------------


@dataclass
class InstrumentSpec:
    instrument_id: int
    family_id: int
    name: str
    partial_gains: np.ndarray
    tilt_db_per_octave: float
    attack_ms: float
    decay_ms: float
    inharmonicity: float = 0.0
    vibrato_rate_hz: float = 0.0
    vibrato_depth: float = 0.0
    noise_level: float = 0.0
    # resonances fixed in Hz: (centre_hz, width_octaves, gain_db)
    formants: Tuple[Tuple[float, float, float], ...] = ()

    def __post_init__(self):
        self.partial_gains = np.asarray(self.partial_gains, dtype=np.float64)
        if (self.partial_gains < 0).any():
            raise ConfigError(f"{self.name}: partial gains must be non-negative")

    def formant_gain(self, freq_hz) -> np.ndarray:
        """Linear gain of the resonance envelope at ``freq_hz``."""
        f = np.asarray(freq_hz, dtype=np.float64)
        db = np.zeros_like(f)
        for centre, width, gain in self.formants:
            db += gain * np.exp(-0.5 * (np.log2(f / centre) / width) ** 2)
        return 10.0 ** (db / 20.0)


def envelope(n: int, sample_rate: float, attack_ms: float, decay_ms: float) -> np.ndarray:
    t = np.arange(n) / sample_rate
    attack = max(attack_ms, 1e-3) / 1000.0
    env = np.minimum(t / attack, 1.0)
    tail = np.clip(t - attack, 0.0, None)
    return env * np.exp(-tail / (decay_ms / 1000.0))


def shaped_noise(spec: InstrumentSpec, n: int, sample_rate: float, rng: np.random.Generator) -> np.ndarray:
    """White noise coloured by the instrument's resonances, unit RMS."""
    spectrum = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, 1.0 / sample_rate)
    spectrum *= spec.formant_gain(np.maximum(freqs, 1.0))
    noise = np.fft.irfft(spectrum, n)
    rms = np.sqrt(np.mean(noise**2))
    return noise / rms if rms > 0 else noise


def synth_tone(
    spec: InstrumentSpec,
    pitch_hz: float,
    duration_s: float,
    sample_rate: float,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Additive synthesis of one note, peak-normalized to 0.9.

    Partials at or above Nyquist are dropped.  ``rng`` drives the vibrato
    phase and the breath noise; without it both are deterministic.
    """
    if duration_s <= 0:
        raise ValueError(f"duration must be positive, got {duration_s}")
    if pitch_hz <= 0:
        raise ValueError(f"pitch must be positive, got {pitch_hz}")
    n = int(round(duration_s * sample_rate))
    t = np.arange(n) / sample_rate
    phase0 = rng.uniform(0.0, 2.0 * np.pi) if rng is not None else 0.0
    vib = np.zeros(n)
    if spec.vibrato_depth > 0 and spec.vibrato_rate_hz > 0:
        # phase offset of a frequency modulation f * (1 + depth * sin(2 pi r t))
        vib = -spec.vibrato_depth * np.cos(2 * np.pi * spec.vibrato_rate_hz * t + phase0) / spec.vibrato_rate_hz

    nyquist = sample_rate / 2.0
    out = np.zeros(n)
    for k, gain in enumerate(spec.partial_gains, start=1):
        fk = k * pitch_hz * (1.0 + spec.inharmonicity * k * k)
        if fk >= nyquist or gain == 0.0:
            continue
        g = gain * 10.0 ** (spec.tilt_db_per_octave * np.log2(k) / 20.0) * spec.formant_gain(fk)
        out += g * np.sin(2 * np.pi * fk * (t + vib))
    out *= envelope(n, sample_rate, spec.attack_ms, spec.decay_ms)
    if spec.noise_level > 0 and rng is not None:
        out += spec.noise_level * np.abs(out).max(initial=0.0) * shaped_noise(spec, n, sample_rate, rng)
    peak = np.abs(out).max(initial=0.0)
    if peak > 0:
        out *= 0.9 / peak
    return out


# -- features ----------------------------------------------------------------


@dataclass(frozen=True)
class FeatureConfig:
    sample_rate: float = 16000.0
    window_ms: float = 32.0
    hop_ms: float = 16.0
    n_mel: int = 64
    n_frames: int = 16
    fmin_hz: float = 27.0
    fmax_hz: float = 8000.0

    @classmethod
    def paper_scale(cls) -> "FeatureConfig":
        return cls(sample_rate=22050.0, window_ms=92.0, hop_ms=11.0, n_mel=256, n_frames=43, fmin_hz=27.0, fmax_hz=11000.0)

    @property
    def win_length(self) -> int:
        return int(round(self.sample_rate * self.window_ms / 1000.0))

    @property
    def hop_length(self) -> int:
        return int(round(self.sample_rate * self.hop_ms / 1000.0))

    @property
    def n_samples(self) -> int:
        return (self.n_frames - 1) * self.hop_length + self.win_length

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate


def mel_centers(n_mel: int, fmin_hz: float, fmax_hz: float) -> np.ndarray:
    """Band centers evenly spaced on the mel scale, first at ``fmin`` and last at ``fmax``."""
    return mel_to_hz(np.linspace(hz_to_mel(fmin_hz), hz_to_mel(fmax_hz), n_mel))


def mel_filterbank(n_mel: int, n_fft: int, sample_rate: float, fmin_hz: float, fmax_hz: float) -> np.ndarray:
    """Triangular filters on FFT bin frequencies; shape ``(n_mel, n_fft // 2 + 1)``.

    Each triangle spans its two neighbouring centers (one extra mel step
    beyond each end), so the responses sum to one everywhere in
    ``[fmin, fmax]``.
    """
    if not (0 < fmin_hz < fmax_hz <= sample_rate / 2.0):
        raise ConfigError(f"invalid mel band edges {fmin_hz}..{fmax_hz} Hz for sample rate {sample_rate}")
    if n_mel < 2:
        raise ConfigError("need at least two mel bands")
    m_lo, m_hi = hz_to_mel(fmin_hz), hz_to_mel(fmax_hz)
    step = (m_hi - m_lo) / (n_mel - 1)
    knots = mel_to_hz(m_lo + step * np.arange(-1, n_mel + 1))
    freqs = np.arange(n_fft // 2 + 1) * sample_rate / n_fft
    return triangle_weights(freqs, knots)


def triangle_weights(freqs: np.ndarray, knots: np.ndarray) -> np.ndarray:
    lo, mid, hi = knots[:-2, None], knots[1:-1, None], knots[2:, None]
    f = np.asarray(freqs, dtype=np.float64)[None, :]
    rise = (f - lo) / (mid - lo)
    fall = (hi - f) / (hi - mid)
    return np.clip(np.minimum(rise, fall), 0.0, None)


def stft_magnitude(x: np.ndarray, win_length: int, hop_length: int, n_frames: Optional[int] = None) -> np.ndarray:
    """Hann-windowed magnitude STFT, frames in columns: ``(win_length // 2 + 1, n_frames)``."""
    x = np.asarray(x, dtype=np.float64)
    if n_frames is None:
        n_frames = 1 + max(0, (len(x) - win_length) // hop_length)
    need = (n_frames - 1) * hop_length + win_length
    if len(x) < need:
        x = np.pad(x, (0, need - len(x)))
    idx = np.arange(win_length)[None, :] + hop_length * np.arange(n_frames)[:, None]
    window = np.hanning(win_length + 1)[:-1]  # periodic Hann
    return np.abs(np.fft.rfft(x[idx] * window, axis=-1)).T


def stft_mel(
    waveform: np.ndarray,
    sample_rate: float,
    window_ms: float,
    hop_ms: float,
    n_mel: int,
    fmin_hz: float,
    fmax_hz: float,
    n_frames: Optional[int] = None,
) -> np.ndarray:
    """Log-compressed mel magnitude spectrogram ``ln(mel + 1e-5)`` of shape ``(n_mel, frames)``."""
    win = int(round(sample_rate * window_ms / 1000.0))
    hop = int(round(sample_rate * hop_ms / 1000.0))
    fb = mel_filterbank(n_mel, win, sample_rate, fmin_hz, fmax_hz)
    mag = stft_magnitude(waveform, win, hop, n_frames)
    return np.log(fb @ mag + MEL_FLOOR)


def features(waveform: np.ndarray, cfg: FeatureConfig) -> np.ndarray:
    return stft_mel(waveform, cfg.sample_rate, cfg.window_ms, cfg.hop_ms, cfg.n_mel, cfg.fmin_hz, cfg.fmax_hz, cfg.n_frames)


# -- corpus ------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyPrototype:
    tilt_db_per_octave: float
    attack_ms: float
    decay_ms: float
    inharmonicity: float
    vibrato_rate_hz: float
    vibrato_depth: float
    noise_level: float
    odd_bias: float  # fraction removed from even partials
    formants: Tuple[Tuple[float, float, float], ...]


FAMILY_PROTOTYPES: Dict[str, FamilyPrototype] = {
    "woodwind": FamilyPrototype(-12.0, 45.0, 4000.0, 0.0, 4.5, 0.002, 0.04, 0.4, ((700.0, 0.6, 8.0),)),
    "brass": FamilyPrototype(-2.0, 30.0, 4000.0, 0.0, 5.0, 0.001, 0.02, 0.0, ((1500.0, 0.8, 10.0),)),
    "strings": FamilyPrototype(-6.0, 80.0, 4000.0, 0.0, 6.0, 0.004, 0.03, 0.0, ((450.0, 0.5, 6.0), (3000.0, 0.5, 6.0))),
    "keyboard": FamilyPrototype(-8.0, 3.0, 250.0, 4e-4, 0.0, 0.0, 0.02, 0.0, ()),
}

# span of the instrument-specific resonance centres within a family
INSTRUMENT_FORMANT_LOW_HZ = 600.0
INSTRUMENT_FORMANT_OCTAVES = 3.3
INSTRUMENT_FORMANT_GAIN_DB = 20.0
INSTRUMENT_FORMANT_WIDTH = 0.3

DEFAULT_FAMILIES = (
    ("woodwind", ("english_horn", "saxophone", "bassoon", "clarinet", "flute", "oboe")),
    ("brass", ("french_horn", "tenor_trombone", "trumpet")),
    ("strings", ("violin", "violoncello")),
    ("keyboard", ("piano",)),
)


@dataclass
class CorpusConfig:
    family_names: Tuple[str, ...] = tuple(f for f, _ in DEFAULT_FAMILIES)
    family_sizes: Tuple[int, ...] = tuple(len(m) for _, m in DEFAULT_FAMILIES)
    n_instruments: int = 12
    instrument_names: Optional[Tuple[str, ...]] = tuple(n for _, m in DEFAULT_FAMILIES for n in m)
    n_pitches: int = 20
    midi_low: int = 45
    midi_high: int = 93
    n_variations: int = 3
    n_partials: int = 24
    split_ratios: Tuple[float, float, float] = (0.81, 0.095, 0.095)
    features: FeatureConfig = field(default_factory=FeatureConfig)

    def validate(self) -> None:
        if len(self.family_names) != len(self.family_sizes):
            raise ConfigError("one size per family is required")
        if sum(self.family_sizes) != self.n_instruments:
            raise ConfigError(f"family sizes {self.family_sizes} do not sum to {self.n_instruments} instruments")
        if any(s < 1 for s in self.family_sizes):
            raise ConfigError("every family needs at least one instrument")
        if self.instrument_names is not None and len(self.instrument_names) != self.n_instruments:
            raise ConfigError("instrument_names length differs from n_instruments")
        if self.n_pitches < 1 or self.n_variations < 1:
            raise ConfigError("n_pitches and n_variations must be positive")
        if abs(sum(self.split_ratios) - 1.0) > 1e-9 or min(self.split_ratios) < 0:
            raise ConfigError("split ratios must be non-negative and sum to 1")

    def pitches_midi(self) -> np.ndarray:
        return np.round(np.linspace(self.midi_low, self.midi_high, self.n_pitches)).astype(int)

    def families(self) -> List[int]:
        """Family id of each instrument, in instrument order."""
        return [f for f, size in enumerate(self.family_sizes) for _ in range(size)]


def _prototype(name: str, index: int) -> FamilyPrototype:
    if name in FAMILY_PROTOTYPES:
        return FAMILY_PROTOTYPES[name]
    rng = np.random.default_rng([7919, index])
    formant = ((float(rng.uniform(300, 3000)), 0.6, 8.0),)
    return FamilyPrototype(rng.uniform(-12, -2), rng.uniform(3, 80), 4000.0, 0.0, rng.uniform(4, 6), 0.002, 0.01, rng.uniform(0, 0.4), formant)


def make_instruments(cfg: CorpusConfig, seed: int) -> List[InstrumentSpec]:
    """Family prototype plus a fixed per-instrument perturbation.

    Every instrument adds one resonance of its own; within a family the
    resonance centres are spread evenly (with jitter) over a few octaves so
    siblings stay distinguishable at every pitch.
    """
    cfg.validate()
    specs = []
    fam_of = cfg.families()
    k = np.arange(1, cfg.n_partials + 1)
    for i in range(cfg.n_instruments):
        fam = fam_of[i]
        proto = _prototype(cfg.family_names[fam], fam)
        rank = i - fam_of.index(fam)
        size = cfg.family_sizes[fam]
        rng = np.random.default_rng([seed, 1_000_003, i])
        centre = INSTRUMENT_FORMANT_LOW_HZ * 2.0 ** (INSTRUMENT_FORMANT_OCTAVES * (rank + rng.uniform(0.3, 0.7)) / size)
        own = (centre, INSTRUMENT_FORMANT_WIDTH, INSTRUMENT_FORMANT_GAIN_DB)
        base = np.where(k % 2 == 0, 1.0 - proto.odd_bias, 1.0)
        jitter = 10.0 ** (rng.normal(0.0, 2.0, size=k.size) / 20.0)
        name = cfg.instrument_names[i] if cfg.instrument_names else f"instrument_{i}"
        specs.append(
            InstrumentSpec(
                instrument_id=i,
                family_id=fam,
                name=name,
                partial_gains=base * jitter,
                tilt_db_per_octave=proto.tilt_db_per_octave + rng.normal(0.0, 1.0),
                attack_ms=proto.attack_ms * rng.uniform(0.7, 1.4),
                decay_ms=proto.decay_ms * rng.uniform(0.7, 1.4),
                inharmonicity=proto.inharmonicity * rng.uniform(0.5, 1.5),
                vibrato_rate_hz=proto.vibrato_rate_hz * rng.uniform(0.85, 1.15),
                vibrato_depth=proto.vibrato_depth * rng.uniform(0.5, 1.5),
                noise_level=proto.noise_level,
                formants=proto.formants + (own,),
            )
        )
    return specs


@dataclass
class Dataset:
    """Standardized mel examples plus labels, split tags and label tables.

    ``mel`` is float32 ``(N, n_mel, n_frames)`` exactly as stored on disk.
    Timbre names are ``"<family>/<instrument>"`` so the family partition
    travels with the file.
    """

    mel: np.ndarray
    pitch: np.ndarray
    timbre: np.ndarray
    split: np.ndarray
    pitch_names: List[str]
    timbre_names: List[str]
    mean: float
    std: float

    def __len__(self) -> int:
        return len(self.pitch)

    @property
    def n_pitch(self) -> int:
        return len(self.pitch_names)

    @property
    def n_timbre(self) -> int:
        return len(self.timbre_names)

    @property
    def input_shape(self) -> Tuple[int, int]:
        return tuple(self.mel.shape[1:])

    @property
    def floor(self) -> float:
        """Standardized value of silence."""
        return float(np.float32((np.log(MEL_FLOOR) - self.mean) / self.std))

    def families(self) -> List[int]:
        names = [n.split("/", 1)[0] if "/" in n else n for n in self.timbre_names]
        order: Dict[str, int] = {}
        for n in names:
            order.setdefault(n, len(order))
        return [order[n] for n in names]

    def indices(self, split: str) -> np.ndarray:
        return np.flatnonzero(self.split == SPLIT_CODES[split])

    def subset(self, split: str):
        idx = self.indices(split)
        return self.mel[idx], self.pitch[idx], self.timbre[idx]


def family_pairs(families: Sequence[int]):
    """Unordered label pairs within the same family and across families."""
    same, diff = [], []
    for a, b in combinations(range(len(families)), 2):
        (same if families[a] == families[b] else diff).append((a, b))
    return same, diff


def _assign_splits(n_items: int, ratios, rng: np.random.Generator) -> np.ndarray:
    n_val = int(round(ratios[1] * n_items))
    n_test = int(round(ratios[2] * n_items))
    if n_items >= 3:
        n_val, n_test = max(n_val, 1), max(n_test, 1)
    tags = np.zeros(n_items, dtype=np.uint8)
    order = rng.permutation(n_items)
    tags[order[:n_val]] = SPLIT_CODES["val"]
    tags[order[n_val : n_val + n_test]] = SPLIT_CODES["test"]
    return tags


# per-example performance variation
DETUNE_CENTS = 4.0
LOUDNESS_DB = 1.5
PARTIAL_JITTER_DB = 0.25


def render_example(spec: InstrumentSpec, midi: int, index: int, seed: int, feat: FeatureConfig) -> np.ndarray:
    """Render one note with per-example performance variation and return its log-mel matrix."""
    rng = np.random.default_rng([seed, index])
    detune = rng.normal(0.0, DETUNE_CENTS)
    loudness = rng.uniform(-1.0, 1.0)
    varied = InstrumentSpec(
        instrument_id=spec.instrument_id,
        family_id=spec.family_id,
        name=spec.name,
        partial_gains=spec.partial_gains * 10.0 ** (rng.normal(0.0, PARTIAL_JITTER_DB, size=spec.partial_gains.size) / 20.0),
        # louder notes are brighter
        tilt_db_per_octave=spec.tilt_db_per_octave + 1.5 * loudness,
        attack_ms=spec.attack_ms * rng.uniform(0.8, 1.25),
        decay_ms=spec.decay_ms,
        inharmonicity=spec.inharmonicity,
        vibrato_rate_hz=spec.vibrato_rate_hz,
        vibrato_depth=spec.vibrato_depth,
        noise_level=spec.noise_level,
        formants=spec.formants,
    )
    f0 = float(midi_to_hz(midi)) * 2.0 ** (detune / 1200.0)
    wave = synth_tone(varied, f0, feat.duration_s, feat.sample_rate, rng)
    wave *= 10.0 ** (LOUDNESS_DB * loudness / 20.0)
    return features(wave, feat)


def build_corpus(cfg: Optional[CorpusConfig] = None, seed: int = 0) -> Dataset:
    """Render every (instrument, pitch, variation) and standardize with train-split statistics."""
    cfg = cfg or CorpusConfig()
    cfg.validate()
    instruments = make_instruments(cfg, seed)
    midis = cfg.pitches_midi()
    feat = cfg.features
    rows, pitch, timbre, split = [], [], [], []
    index = 0
    for inst in instruments:
        per_inst = len(midis) * cfg.n_variations
        tags = _assign_splits(per_inst, cfg.split_ratios, np.random.default_rng([seed, 2_000_003, inst.instrument_id]))
        j = 0
        for p, midi in enumerate(midis):
            for _ in range(cfg.n_variations):
                rows.append(render_example(inst, int(midi), index, seed, feat))
                pitch.append(p)
                timbre.append(inst.instrument_id)
                split.append(tags[j])
                index += 1
                j += 1
    logmel = np.stack(rows)
    split_arr = np.asarray(split, dtype=np.uint8)
    train = logmel[split_arr == SPLIT_CODES["train"]]
    mean = float(train.mean())
    std = float(train.std())
    mel = ((logmel - mean) / std).astype(np.float32)
    return Dataset(
        mel=mel,
        pitch=np.asarray(pitch, dtype=np.int64),
        timbre=np.asarray(timbre, dtype=np.int64),
        split=split_arr,
        pitch_names=[midi_name(int(m)) for m in midis],
        timbre_names=[f"{cfg.family_names[i.family_id]}/{i.name}" for i in instruments],
        mean=mean,
        std=std,
    )


# -- MEL1 file format --------------------------------------------------------


def _pack_name(name: str) -> bytes:
    raw = name.encode("utf-8")
    return struct.pack("<H", len(raw)) + raw


def dumps_dataset(ds: Dataset) -> bytes:
    n, n_mel, n_frames = ds.mel.shape
    out = [
        MAGIC,
        struct.pack("<II", FORMAT_VERSION, n),
        struct.pack("<HHHH", n_mel, n_frames, ds.n_pitch, ds.n_timbre),
        struct.pack("<dd", ds.mean, ds.std),
    ]
    out += [_pack_name(s) for s in ds.pitch_names]
    out += [_pack_name(s) for s in ds.timbre_names]
    mel = np.ascontiguousarray(ds.mel, dtype="<f4")
    for i in range(n):
        out.append(struct.pack("<HHB", int(ds.pitch[i]), int(ds.timbre[i]), int(ds.split[i])))
        out.append(mel[i].tobytes(order="C"))
    return b"".join(out)


def loads_dataset(buf: bytes) -> Dataset:
    pos = 0

    def take(n: int, what: str) -> bytes:
        nonlocal pos
        if pos + n > len(buf):
            raise FormatError(f"truncated MEL1 data while reading {what}", pos)
        chunk = buf[pos : pos + n]
        pos += n
        return chunk

    if take(4, "magic") != MAGIC:
        raise FormatError("bad magic, expected MEL1", 0)
    version, n = struct.unpack("<II", take(8, "header"))
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported MEL1 version {version}", 4)
    n_mel, n_frames, n_pitch, n_timbre = struct.unpack("<HHHH", take(8, "shape header"))
    mean, std = struct.unpack("<dd", take(16, "compression statistics"))

    def names(count: int, what: str) -> List[str]:
        out = []
        for _ in range(count):
            (length,) = struct.unpack("<H", take(2, f"{what} name length"))
            start = pos
            try:
                out.append(take(length, f"{what} name").decode("utf-8"))
            except UnicodeDecodeError:
                raise FormatError(f"{what} name is not valid UTF-8", start) from None
        return out

    pitch_names = names(n_pitch, "pitch")
    timbre_names = names(n_timbre, "timbre")
    cells = n_mel * n_frames
    mel = np.empty((n, n_mel, n_frames), dtype=np.float32)
    pitch = np.empty(n, dtype=np.int64)
    timbre = np.empty(n, dtype=np.int64)
    split = np.empty(n, dtype=np.uint8)
    for i in range(n):
        start = pos
        p, t, s = struct.unpack("<HHB", take(5, f"labels of example {i}"))
        if p >= n_pitch or t >= n_timbre or s >= len(SPLITS):
            raise FormatError(f"label out of range in example {i}", start)
        pitch[i], timbre[i], split[i] = p, t, s
        mel[i] = np.frombuffer(take(4 * cells, f"mel values of example {i}"), dtype="<f4").reshape(n_mel, n_frames)
    if pos != len(buf):
        raise FormatError("trailing bytes after last example", pos)
    return Dataset(mel, pitch, timbre, split, pitch_names, timbre_names, mean, std)


def save_dataset(ds: Dataset, path) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps_dataset(ds))


def load_dataset(path) -> Dataset:
    with open(path, "rb") as fh:
        return loads_dataset(fh.read())
