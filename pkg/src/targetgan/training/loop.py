"""Alternating critic/generator updates over both training routes."""

from __future__ import annotations

import csv
import math
from dataclasses import astuple, dataclass, field
from pathlib import Path

import numpy as np

from .. import numcore as nc
from ..chem.matrices import batch_validity
from ..nets import Condition, SoftMol, sample_discrete
from ..nets.module import Module
from ..numcore import NonFiniteValue, Tape, adam_step
from .checkpoint import model_tensors, pocket_meta, save_checkpoint
from .config import Route, TrainConfig, Variant
from .data import DatasetBundle, check_bundle, epoch_batches, split_indices
from .errors import NonFiniteLoss
from .losses import (
    critic_loss,
    flat,
    generator_loss,
    gradient_penalty,
    reinforce_surrogate,
    scaffold_fingerprints,
    scaffold_similarities,
)
from .model import GANModel, sample_z

METRIC_HEADER = ("epoch", "step", "loss_d1", "loss_g1", "loss_d2", "loss_g2", "gp",
                 "w1_est", "w2_est", "validity")
VALIDITY_CHUNK = 64


@dataclass
class EpochRecord:
    epoch: int
    step: int
    loss_d1: float = 0.0
    loss_g1: float = 0.0
    loss_d2: float = 0.0
    loss_g2: float = 0.0
    gp: float = 0.0
    w1_est: float = 0.0
    w2_est: float = 0.0
    validity: float = math.nan

    def row(self) -> list[str]:
        return [str(self.epoch), str(self.step)] + [repr(float(v)) for v in astuple(self)[2:]]


@dataclass
class StepStats:
    loss_d1: float = 0.0
    loss_g1: float = 0.0
    loss_d2: float = 0.0
    loss_g2: float = 0.0
    gp: float = 0.0
    w1_est: float = 0.0
    w2_est: float = 0.0


def _streams(seed: int) -> dict[str, np.random.Generator]:
    names = ("init", "split", "batch", "noise", "gp", "eval", "drop", "rl")
    seqs = np.random.SeedSequence(seed).spawn(len(names))
    return {n: np.random.default_rng(s) for n, s in zip(names, seqs)}


def _named_grads(params: dict, grads) -> dict[str, np.ndarray]:
    return {k: g.data if hasattr(g, "data") else g for k, g in zip(params, grads)}


def _check(values: dict[str, float]) -> None:
    for k, v in values.items():
        if not math.isfinite(v):
            raise NonFiniteValue(f"{k} is {v}")


class Trainer:
    """Owns the model, the data split and every random stream of one run."""

    def __init__(self, cfg: TrainConfig, bundle: DatasetBundle, out_dir: str | Path | None = None):
        check_bundle(bundle, cfg)
        self.cfg = cfg
        self.bundle = bundle
        self.rng = _streams(cfg.seed)
        self.model = GANModel(cfg.model_config(), cfg.variant, self.rng["init"], (cfg.beta1, cfg.beta2))
        self.train_idx, self.test_idx = split_indices(len(bundle.general), cfg.split_ratio, self.rng["split"])
        if len(self.train_idx) < cfg.batch:
            epoch_batches(self.train_idx, cfg.batch, self.rng["batch"])  # raises DataExhausted
        self.ref_fps = scaffold_fingerprints(bundle.inhibitors.graphs()) \
            if cfg.variant is Variant.RL else []
        self.epoch = 0
        self.step = 0
        self.records: list[EpochRecord] = []
        self.checkpoints: list[Path] = []
        self.out_dir = Path(out_dir) if out_dir is not None else None
        if self.out_dir is not None:
            (self.out_dir / "checkpoints").mkdir(parents=True, exist_ok=True)
            with open(self.metrics_path, "w", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerow(METRIC_HEADER)

    @property
    def metrics_path(self) -> Path:
        assert self.out_dir is not None
        return self.out_dir / "metrics.csv"

    # -- batches -----------------------------------------------------------

    def _inhibitor_batch(self, b: int, rng: np.random.Generator):
        inh = self.bundle.inhibitors
        return inh.onehot(rng.integers(0, len(inh), size=b))

    def _real1(self, idx: np.ndarray):
        if self.cfg.variant is Variant.CROSSLOSS:
            return self._inhibitor_batch(len(idx), self.rng["batch"])
        return self.bundle.general.onehot(idx)

    def _condition(self, b: int, rng: np.random.Generator) -> Condition | None:
        kind = self.cfg.variant.cond_kind
        if kind == "pocket":
            return Condition("pocket", *self.bundle.pocket_arrays())
        if kind == "ligand":
            return Condition("ligand", *self._inhibitor_batch(b, rng))
        return None

    def _z(self, b: int, real=None):
        return sample_z(self.model.config, b, self.rng["noise"], real)

    # -- updates -----------------------------------------------------------

    def _apply(self, nets: tuple[str, ...], grads: dict[str, np.ndarray]) -> None:
        for n in nets:
            if getattr(self.model, n) is None:
                continue
            params = self.model.params(n)
            state = self.model.opt[n]
            mine = {k: grads[k] for k in params if k in grads}
            if not all(np.isfinite(g).all() for g in mine.values()):
                raise NonFiniteValue(f"non-finite gradient for {n}")
            with np.errstate(over="ignore", invalid="ignore"):
                adam_step(params, mine, state, self.cfg.lr)
            for k in mine:
                if not (np.isfinite(params[k].data).all() and np.isfinite(state.v[k]).all()):
                    raise NonFiniteValue(f"optimizer state of {k} overflowed")

    def critic_step(self, stages: tuple[int, ...], real1, real2, z, cond, joint_gp: bool,
                    stats: StepStats) -> None:
        m = self.model
        train = self.cfg.dropout > 0
        with nc.no_record():
            f1 = m.g1(*z, train=train, rng=self.rng["drop"])
            f2 = m.g2(f1, cond, train=train, rng=self.rng["drop"]) if 2 in stages else None
        critics = tuple(f"d{s}" for s in stages)
        params = m.params(*critics)
        tape = Tape()
        with tape:
            total = None
            if 1 in stages:
                l1, w1 = critic_loss(m.d1, real1, (f1.annotation, f1.adjacency))
                stats.loss_d1, stats.w1_est = float(l1.data), w1
                total = l1
            if 2 in stages:
                l2, w2 = critic_loss(m.d2, real2, (f2.annotation, f2.adjacency))
                stats.loss_d2, stats.w2_est = float(l2.data), w2
                total = l2 if total is None else nc.add(total, l2)
        grads = _named_grads(params, nc.grad(tape, total, list(params.values())))
        if self.cfg.lambda_gp > 0:
            fakes = {1: f1, 2: f2}
            reals = {1: real1, 2: real2}
            groups = [stages] if joint_gp else [(s,) for s in stages]
            for group in groups:
                nets = [getattr(m, f"d{s}") for s in group]
                gparams = m.params(*(f"d{s}" for s in group))
                val, gg = gradient_penalty([d.score_flat for d in nets], list(gparams.values()),
                                           [flat(reals[s]) for s in group], [flat(fakes[s]) for s in group],
                                           self.cfg.lambda_gp, self.rng["gp"])
                stats.gp += val
                for k, g in zip(gparams, gg):
                    grads[k] = grads[k] + g
        _check({"loss_d": float(total.data), "gp": stats.gp})
        self._apply(critics, grads)

    def _rl_term(self, soft: SoftMol):
        with nc.no_record():
            a = soft.annotation.data
            b = soft.adjacency.data
        mats = sample_discrete(a, b, "temperature", self.cfg.rl_tau, self.rng["rl"])
        atoms = np.stack([mm.atom_classes() for mm in mats])
        bonds = np.stack([mm.bond_classes() for mm in mats])
        rewards = scaffold_similarities(mats, self.ref_fps)
        sur = reinforce_surrogate(soft, atoms, bonds, rewards)
        return nc.scale(sur, self.cfg.rl_coeff), self.cfg.rl_coeff * float(rewards.mean())

    def generator_step(self, stages: tuple[int, ...], z, cond, detach_g1: bool, stats: StepStats) -> None:
        m = self.model
        train = self.cfg.dropout > 0
        nets = tuple(f"g{s}" for s in stages)
        params = m.params(*nets)
        rl_on = self.cfg.variant is Variant.RL and self.cfg.rl_coeff > 0
        rl_stages = (1, 2) if self.cfg.rl_stages == "both" else (2,)
        tape = Tape()
        with tape:
            if detach_g1:
                with nc.no_record():
                    f1 = m.g1(*z, train=train, rng=self.rng["drop"])
                f1 = f1.detach()
            else:
                f1 = m.g1(*z, train=train, rng=self.rng["drop"])
            terms = []
            if 1 in stages:
                l1 = generator_loss(m.d1, (f1.annotation, f1.adjacency))
                stats.loss_g1 = float(l1.data)
                terms.append(l1)
                if rl_on and 1 in rl_stages:
                    t, v = self._rl_term(f1)
                    terms.append(t)
                    stats.loss_g1 += v
            if 2 in stages:
                f2 = m.g2(f1, cond, train=train, rng=self.rng["drop"])
                l2 = generator_loss(m.d2, (f2.annotation, f2.adjacency))
                stats.loss_g2 = float(l2.data)
                terms.append(l2)
                if rl_on and 2 in rl_stages:
                    t, v = self._rl_term(f2)
                    terms.append(t)
                    stats.loss_g2 += v
            total = terms[0]
            for t in terms[1:]:
                total = nc.add(total, t)
        grads = _named_grads(params, nc.grad(tape, total, list(params.values())))
        _check({"loss_g": float(total.data)})
        self._apply(nets, grads)

    def train_step(self, idx: np.ndarray) -> StepStats:
        cfg, m = self.cfg, self.model
        b = len(idx)
        stats = StepStats()
        real1 = self._real1(idx)
        two = cfg.variant.two_stage
        warm = cfg.route is Route.WARMUP and self.epoch < cfg.warmup_epochs
        if not two or warm:
            self.critic_step((1,), real1, None, self._z(b, real1), None, True, stats)
            self.generator_step((1,), self._z(b, real1), None, False, stats)
        elif cfg.route is Route.JOINT:
            real2 = self._inhibitor_batch(b, self.rng["batch"])
            cond = self._condition(b, self.rng["batch"])
            self.critic_step((1, 2), real1, real2, self._z(b, real1), cond, True, stats)
            cond = self._condition(b, self.rng["batch"])
            self.generator_step((1, 2), self._z(b, real1), cond, False, stats)
        else:
            self.critic_step((1,), real1, None, self._z(b, real1), None, True, stats)
            self.generator_step((1,), self._z(b, real1), None, False, stats)
            real2 = self._inhibitor_batch(b, self.rng["batch"])
            cond = self._condition(b, self.rng["batch"])
            self.critic_step((2,), real1, real2, self._z(b, real1), cond, True, stats)
            cond = self._condition(b, self.rng["batch"])
            self.generator_step((2,), self._z(b, real1), cond, True, stats)
        self.step += 1
        return stats

    # -- evaluation --------------------------------------------------------

    def sample_validity(self, n: int) -> float:
        if n == 0:
            return math.nan
        rng = self.rng["eval"]
        mats = []
        with nc.no_record():
            for start in range(0, n, VALIDITY_CHUNK):
                b = min(VALIDITY_CHUNK, n - start)
                real = None
                if self.model.config.input_mode == "perturbed":
                    real = self.bundle.general.onehot(rng.choice(self.train_idx, size=b))
                z = sample_z(self.model.config, b, rng, real)
                f1, f2 = self.model.generate_soft(z, self._condition(b, rng))
                out = f2 if f2 is not None else f1
                mats += sample_discrete(out.annotation.data, out.adjacency.data, "argmax")
        return batch_validity(mats)

    # -- epochs and checkpoints -------------------------------------------

    def run_epoch(self) -> EpochRecord:
        batches = epoch_batches(self.train_idx, self.cfg.batch, self.rng["batch"])
        totals = np.zeros(7)
        try:
            for idx in batches:
                totals += astuple(self.train_step(idx))
        except NonFiniteValue as exc:
            path = self.save(diagnostic=str(exc))
            raise NonFiniteLoss(f"non-finite value at epoch {self.epoch} step {self.step}: {exc}",
                                str(path) if path else None) from exc
        rec = EpochRecord(self.epoch, self.step, *(totals / len(batches)).tolist(),
                          validity=self.sample_validity(self.cfg.validity_samples))
        self.records.append(rec)
        self.epoch += 1
        if self.out_dir is not None:
            with open(self.metrics_path, "a", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerow(rec.row())
            self.checkpoints.append(self.save())
        return rec

    def meta(self, diagnostic: str | None = None) -> dict:
        inh = self.bundle.inhibitors
        return {
            "format": "targetgan-checkpoint",
            "variant": self.cfg.variant.value,
            "train_config": self.cfg.to_dict(),
            "model_config": self.model.config.to_dict(),
            "betas": [self.cfg.beta1, self.cfg.beta2],
            "epoch": self.epoch,
            "step": self.step,
            "split": {"seed": self.cfg.seed, "ratio": self.cfg.split_ratio,
                      "n_general": len(self.bundle.general),
                      "test_indices": self.test_idx.tolist()},
            "inhibitor_smiles": list(inh.smiles) if inh is not None else [],
            "pocket": pocket_meta(self.bundle.pocket),
            "adam_steps": {k: s.step for k, s in self.model.opt.items()},
            "diagnostic": diagnostic,
        }

    def save(self, diagnostic: str | None = None) -> Path | None:
        if self.out_dir is None:
            return None
        name = "diagnostic.dgck" if diagnostic else f"epoch_{self.epoch:03d}.dgck"
        return save_checkpoint(self.out_dir / "checkpoints" / name, self.cfg.variant,
                               self.meta(diagnostic), model_tensors(self.model))

    def run(self) -> list[EpochRecord]:
        while self.epoch < self.cfg.epochs:
            self.run_epoch()
        return self.records


def train(cfg: TrainConfig, bundle: DatasetBundle, out_dir: str | Path | None = None) -> Trainer:
    """Train for ``cfg.epochs`` epochs; files go under ``out_dir`` when given."""
    t = Trainer(cfg, bundle, out_dir)
    t.run()
    return t
