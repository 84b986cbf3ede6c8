"""Experiment configuration and its ``section.key = value`` text format.

Example::

    # GFDM reproduction run
    waveform.kind = GFDM
    waveform.K = 32
    waveform.M = 3
    channel.profile = uniform
    sweep.start = 0
    sweep.stop = 20
    sweep.step = 2
    seed = 7
"""
import dataclasses
from dataclasses import dataclass, field

import numpy as np

from ..channel import ChannelProfile
from ..errors import ConfigError
from ..neuralnet.training import TrainConfig
from ..waveform import PulseFilter, WaveformKind, WaveformSpec

CLASSICAL_RECEIVERS = ("zf", "mf", "mmse", "zf-noeq")


@dataclass(frozen=True)
class SweepGrid:
    start: float = 0.0
    stop: float = 20.0
    step: float = 2.0

    def __post_init__(self):
        if not self.step > 0:
            raise ConfigError("sweep.step must be positive")
        if self.stop < self.start:
            raise ConfigError("sweep.stop must not be below sweep.start")

    def points(self):
        n = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [round(self.start + i * self.step, 10) for i in range(n)]


@dataclass(frozen=True)
class DataSizes:
    train_symbols: int = 10000
    test_symbols: int = 10000

    def __post_init__(self):
        if self.train_symbols < 1 or self.test_symbols < 1:
            raise ConfigError("train_symbols and test_symbols must be at least 1")


@dataclass(frozen=True)
class ExperimentConfig:
    waveform: WaveformSpec = field(default_factory=WaveformSpec.gfdm)
    channel: ChannelProfile = field(default_factory=ChannelProfile.uniform)
    sweep: SweepGrid = field(default_factory=SweepGrid)
    data: DataSizes = field(default_factory=DataSizes)
    train: TrainConfig = field(default_factory=TrainConfig)
    receivers: tuple = CLASSICAL_RECEIVERS
    seed: int = 0

    def __post_init__(self):
        unknown = set(self.receivers) - set(CLASSICAL_RECEIVERS)
        if unknown:
            raise ConfigError(f"unknown receivers: {', '.join(sorted(unknown))}")
        if self.channel.n_taps > self.waveform.ncp + 1:
            raise ConfigError(
                f"{self.channel.n_taps}-tap channel is longer than the cyclic prefix "
                f"({self.waveform.ncp} samples) allows"
            )

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def default_config(kind="GFDM", seed=0):
    if WaveformKind(kind.upper()) is WaveformKind.OFDM:
        return ExperimentConfig(waveform=WaveformSpec.ofdm(), seed=seed)
    return ExperimentConfig(waveform=WaveformSpec.gfdm(), seed=seed)


_INT_KEYS = {
    "waveform.K", "waveform.M", "waveform.ncp", "channel.ntaps",
    "data.train_symbols", "data.test_symbols", "train.epochs", "train.batch",
    "train.patience", "seed",
}
_FLOAT_KEYS = {
    "waveform.rolloff", "sweep.start", "sweep.stop", "sweep.step",
    "train.lr", "train.dropout", "train.min_delta", "train.val_fraction",
}
_STR_KEYS = {"waveform.kind", "waveform.filter", "channel.profile", "receivers"}
KNOWN_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS


def parse_pairs(text):
    """Parse config text into a ``{key: value}`` dict with typed values."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            if key in _INT_KEYS:
                values[key] = int(value, 0)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            else:
                values[key] = value
        except ValueError:
            raise ConfigError(f"line {lineno}: invalid value {value!r} for {key}") from None
    return values


def config_from_pairs(values):
    kind = values.get("waveform.kind", "GFDM").upper()
    try:
        if WaveformKind(kind) is WaveformKind.OFDM:
            waveform = WaveformSpec(
                WaveformKind.OFDM,
                K=values.get("waveform.K", 64),
                M=values.get("waveform.M", 1),
                filter=values.get("waveform.filter", "RECT").upper(),
                ncp=values.get("waveform.ncp", 16),
            )
        else:
            waveform = WaveformSpec(
                WaveformKind.GFDM,
                K=values.get("waveform.K", 32),
                M=values.get("waveform.M", 3),
                filter=PulseFilter(values.get("waveform.filter", "RRC").upper()),
                rolloff=values.get("waveform.rolloff", 0.1),
                ncp=values.get("waveform.ncp", 24),
            )
        channel = ChannelProfile.from_name(
            values.get("channel.profile", "uniform"), values.get("channel.ntaps", 10)
        )
        defaults = TrainConfig()
        train = TrainConfig(
            lr=values.get("train.lr", defaults.lr),
            max_epochs=values.get("train.epochs", defaults.max_epochs),
            batch_size=values.get("train.batch", defaults.batch_size),
            dropout=values.get("train.dropout", defaults.dropout),
            patience=values.get("train.patience", defaults.patience),
            min_delta=values.get("train.min_delta", defaults.min_delta),
            val_fraction=values.get("train.val_fraction", defaults.val_fraction),
        )
        receivers = CLASSICAL_RECEIVERS
        if "receivers" in values:
            receivers = tuple(r.strip() for r in values["receivers"].split(",") if r.strip())
        return ExperimentConfig(
            waveform=waveform,
            channel=channel,
            sweep=SweepGrid(
                values.get("sweep.start", 0.0),
                values.get("sweep.stop", 20.0),
                values.get("sweep.step", 2.0),
            ),
            data=DataSizes(
                values.get("data.train_symbols", 10000),
                values.get("data.test_symbols", 10000),
            ),
            train=train,
            receivers=receivers,
            seed=values.get("seed", 0),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(text):
    return config_from_pairs(parse_pairs(text))


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def format_config(cfg):
    """Render ``cfg`` back into the text format (round-trips through :func:`parse_config`)."""
    w, t = cfg.waveform, cfg.train
    lines = [
        f"waveform.kind = {w.kind.value}",
        f"waveform.K = {w.K}",
        f"waveform.M = {w.M}",
        f"waveform.ncp = {w.ncp}",
        f"waveform.filter = {w.filter.value}",
        f"waveform.rolloff = {w.rolloff!r}",
        f"channel.profile = {cfg.channel.kind.value.lower()}",
        f"channel.ntaps = {cfg.channel.n_taps}",
        f"sweep.start = {cfg.sweep.start!r}",
        f"sweep.stop = {cfg.sweep.stop!r}",
        f"sweep.step = {cfg.sweep.step!r}",
        f"data.train_symbols = {cfg.data.train_symbols}",
        f"data.test_symbols = {cfg.data.test_symbols}",
        f"train.lr = {t.lr!r}",
        f"train.epochs = {t.max_epochs}",
        f"train.batch = {t.batch_size}",
        f"train.dropout = {t.dropout!r}",
        f"train.patience = {t.patience}",
        f"train.min_delta = {t.min_delta!r}",
        f"train.val_fraction = {t.val_fraction!r}",
        f"receivers = {','.join(cfg.receivers)}",
        f"seed = {cfg.seed}",
    ]
    return "\n".join(lines) + "\n"
