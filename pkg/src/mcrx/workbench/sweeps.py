"""BER sweeps for classical and neural receivers, and the transfer experiment."""
import logging
import os
from dataclasses import asdict, dataclass, replace

import numpy as np

from .. import channel as ch
from .. import linear_rx as lrx
from .. import waveform as wf
from ..errors import NonFiniteLossError, SingularChannelError
from ..neuralnet import Model, fine_tune, load_checkpoint, registry, save_checkpoint, train
from ..neuralnet.registry import iq_features, symbols_from_output
from .dataset import gen_dataset
from .seeding import Stream, point_index, stream_rng, stream_seed

log = logging.getLogger(__name__)


def experiment_channel(cfg, stream=Stream.CHANNEL):
    """The fixed channel realization of an experiment, drawn once from the master seed."""
    return ch.draw_taps(cfg.channel, stream_rng(cfg.seed, stream))


def classical_estimates(receiver, y, h, mm, sigma2):
    """Symbol estimates for one classical receiver label."""
    if receiver == "zf-noeq":
        return lrx.detect(lrx.detector_matrix(lrx.DetectorKind.ZF, mm), y)
    z = lrx.zf_equalize(y, h)
    kind = {"zf": lrx.DetectorKind.ZF, "mf": lrx.DetectorKind.MF, "mmse": lrx.DetectorKind.MMSE}[receiver]
    return lrx.detect(lrx.detector_matrix(kind, mm, sigma2), z)


def run_classical_sweep(cfg, h=None):
    """BER of every configured classical receiver at every grid point.

    ``h`` overrides the experiment channel (e.g. ``[1]`` for pure AWGN).  A
    singular channel bin produces failed records instead of an exception.
    """
    mm = wf.build_mod_matrix(cfg.waveform)
    h = experiment_channel(cfg) if h is None else np.asarray(h, dtype=np.complex128)
    records = []
    for ebno in cfg.sweep.points():
        test = gen_dataset(cfg, ebno, "test", h, mm=mm)
        sigma2 = ch.ebno_to_sigma2(ebno, cfg.waveform.phi)
        for receiver in cfg.receivers:
            try:
                d_hat = classical_estimates(receiver, test.y, h, mm, sigma2)
            except SingularChannelError as exc:
                log.warning("%s at %s dB: %s", receiver, ebno, exc)
                records.append(lrx.failed_record(cfg.waveform.kind.value, receiver, ebno,
                                                 test.meta.seed, str(exc)))
                continue
            records.append(lrx.ber(wf.demap_symbols(d_hat), test.bits, cfg.waveform.kind.value,
                                   receiver, ebno, test.meta.seed))
    return records


def neural_ber(model, ds, label, waveform_name):
    out = model.predict(iq_features(ds.y, model.spec.input_shape))
    bits_hat = wf.demap_symbols(symbols_from_output(out))
    return lrx.ber(bits_hat, ds.bits, waveform_name, label, ds.meta.ebno_db, ds.meta.seed,
                   model=model.spec.name)


def train_point(cfg, model_name, ebno_db, h, mm=None, init_stream=Stream.INIT,
                fit_stream=Stream.FIT, data_role="train"):
    """Train a fresh registry model on the training set of one grid point."""
    spec = registry(model_name, cfg.waveform, dropout=cfg.train.dropout)
    idx = point_index(ebno_db)
    model = Model.initialize(spec, stream_seed(cfg.seed, init_stream, idx))
    ds = gen_dataset(cfg, ebno_db, data_role, h, mm=mm)
    tcfg = replace(cfg.train, seed=stream_seed(cfg.seed, fit_stream, idx))
    model, history = train(model, iq_features(ds.y, spec.input_shape), ds.targets, tcfg)
    return model, history


def checkpoint_name(model_name, ebno_db, tag=""):
    return f"{model_name}{tag}_ebno{ebno_db:+06.2f}dB.mcnn"


def run_neural_sweep(cfg, model_name, checkpoint_dir=None, shared_model=False, pivot_db=12.0):
    """Train and test ``model_name`` at every grid point.

    By default a separate model is trained per Eb/No.  With ``shared_model``
    one model trained at ``pivot_db`` is evaluated across the whole grid; its
    records carry the receiver label ``<model>-shared``.  Checkpoints are
    written to ``checkpoint_dir`` when given.
    """
    mm = wf.build_mod_matrix(cfg.waveform)
    h = experiment_channel(cfg)
    name = cfg.waveform.kind.value
    label = f"{model_name}-shared" if shared_model else model_name
    if checkpoint_dir:
        os.makedirs(checkpoint_dir, exist_ok=True)

    shared = None
    if shared_model:
        shared, _ = train_point(cfg, model_name, pivot_db, h, mm)
        if checkpoint_dir:
            save_checkpoint(shared, os.path.join(checkpoint_dir, checkpoint_name(model_name, pivot_db, "-shared")))

    records = []
    for ebno in cfg.sweep.points():
        test = gen_dataset(cfg, ebno, "test", h, mm=mm)
        if shared is not None:
            records.append(neural_ber(shared, test, label, name))
            continue
        try:
            model, history = train_point(cfg, model_name, ebno, h, mm)
        except NonFiniteLossError as exc:
            log.error("%s at %s dB: %s", model_name, ebno, exc)
            records.append(lrx.failed_record(name, label, ebno, test.meta.seed, str(exc), model_name))
            continue
        log.info("%s at %s dB: %d epochs, best val %.4g", model_name, ebno, len(history),
                 min(e.val_loss for e in history) if history else float("nan"))
        if checkpoint_dir:
            save_checkpoint(model, os.path.join(checkpoint_dir, checkpoint_name(model_name, ebno)))
        records.append(neural_ber(model, test, label, name))
    return records


@dataclass(frozen=True)
class TransferReport:
    model: str
    ebno_db: float
    seed: int
    same_channel: bool
    stale_ber: float
    finetuned_ber: float
    fullretrain_ber: float
    fine_tune_epochs: int = 1

    def to_dict(self):
        return asdict(self)


def run_transfer_experiment(cfg, model_name, base_model=None, checkpoint=None, ebno_db=12.0,
                            same_channel=False, epochs=1, full_retrain=True):
    """Adapt a trained receiver to a redrawn channel.

    The base model comes from ``base_model``, else from ``checkpoint``; if
    neither is given it is trained on the experiment channel first.  The
    report holds the BER on the new channel of the stale model, of the model
    after ``epochs`` fine-tuning epochs, and of a model retrained from scratch.
    With ``same_channel`` the "new" channel is the original one (control).
    ``full_retrain=False`` skips the from-scratch model (its BER is NaN).
    """
    mm = wf.build_mod_matrix(cfg.waveform)
    h_base = experiment_channel(cfg)
    if base_model is None:
        if checkpoint is not None:
            if not os.path.exists(checkpoint):
                raise FileNotFoundError(f"checkpoint {checkpoint} does not exist")
            base_model = load_checkpoint(checkpoint)
        else:
            base_model, _ = train_point(cfg, model_name, ebno_db, h_base, mm)
    h_new = h_base if same_channel else experiment_channel(cfg, Stream.TRANSFER_CHANNEL)
    train_role, test_role = ("train", "test") if same_channel else ("transfer-train", "transfer-test")
    test = gen_dataset(cfg, ebno_db, test_role, h_new, mm=mm)
    name = cfg.waveform.kind.value

    stale = neural_ber(base_model, test, model_name, name).ber
    adapt_set = gen_dataset(cfg, ebno_db, train_role, h_new, mm=mm)
    tuned = base_model.copy()
    tcfg = replace(cfg.train, seed=stream_seed(cfg.seed, Stream.TRANSFER_FIT, point_index(ebno_db)))
    fine_tune(tuned, iq_features(adapt_set.y, tuned.spec.input_shape), adapt_set.targets, tcfg, epochs)
    tuned_ber = neural_ber(tuned, test, model_name, name).ber

    full_ber = float("nan")
    if full_retrain:
        retrained, _ = train_point(cfg, base_model.spec.name, ebno_db, h_new, mm,
                                   init_stream=Stream.TRANSFER_INIT, fit_stream=Stream.TRANSFER_FIT,
                                   data_role=train_role)
        full_ber = neural_ber(retrained, test, model_name, name).ber
    return TransferReport(model_name, float(ebno_db), int(cfg.seed), bool(same_channel),
                          stale, tuned_ber, full_ber, epochs)
