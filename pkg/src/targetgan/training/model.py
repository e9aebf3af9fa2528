"""The four networks of a run, their optimizer states and the generator inputs."""

from __future__ import annotations

import numpy as np

from ..chem.elements import N_ATOM_CLASSES, N_BOND_CLASSES
from ..nets import Condition, DecoderGenerator, Discriminator, EncoderGenerator, ModelConfig, SoftMol
from ..nets.module import Module
from ..numcore import AdamState, Tensor
from .config import Variant

NETWORKS = ("g1", "d1", "g2", "d2")


class GANModel:
    """G1/D1 always; G2/D2 for the two-stage variants."""

    def __init__(self, mcfg: ModelConfig, variant: Variant, rng: np.random.Generator,
                 betas: tuple[float, float] = (0.9, 0.999)):
        self.config = mcfg
        self.variant = variant
        self.g1 = EncoderGenerator(mcfg.encoder, rng)
        self.d1 = Discriminator(mcfg.discriminator, mcfg.encoder, rng)
        self.g2 = DecoderGenerator(mcfg.decoder, mcfg.encoder, variant.cond_kind, rng) \
            if variant.two_stage else None
        self.d2 = Discriminator(mcfg.discriminator, mcfg.encoder, rng) if variant.two_stage else None
        self.opt = {name: AdamState(*betas) for name in self.networks()}

    def networks(self) -> dict[str, Module]:
        return {n: getattr(self, n) for n in NETWORKS if getattr(self, n) is not None}

    def params(self, *names: str) -> dict[str, Tensor]:
        out = {}
        for n in names:
            net = getattr(self, n)
            if net is not None:
                out.update({f"{n}.{k}": v for k, v in net.named_parameters()})
        return out

    def snapshot(self) -> dict[str, np.ndarray]:
        return {k: v.data.copy() for k, v in self.params(*NETWORKS).items()}

    def generate_soft(self, z: tuple[np.ndarray, np.ndarray], cond: Condition | None,
                      train: bool = False, rng=None) -> tuple[SoftMol, SoftMol | None]:
        """Run G1 and, for two-stage variants, G2 on its output."""
        f1 = self.g1(z[0], z[1], train=train, rng=rng)
        f2 = self.g2(f1, cond, train=train, rng=rng) if self.g2 is not None else None
        return f1, f2


def sample_z(mcfg: ModelConfig, batch: int, rng: np.random.Generator,
             real: tuple[np.ndarray, np.ndarray] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Generator input: Gaussian noise shaped like molecule matrices.

    The adjacency noise is symmetrized.  In ``perturbed`` input mode the
    noise, scaled by ``perturb_sigma``, is added to the one-hot ``real`` batch.
    """
    n = mcfg.max_atoms
    ann = rng.standard_normal((batch, n, N_ATOM_CLASSES))
    adj = rng.standard_normal((batch, n, n, N_BOND_CLASSES))
    adj = (adj + adj.transpose(0, 2, 1, 3)) / np.sqrt(2.0)
    if mcfg.input_mode == "perturbed":
        if real is None:
            raise ValueError("perturbed input mode needs a real batch")
        ann = real[0] + mcfg.perturb_sigma * ann
        adj = real[1] + mcfg.perturb_sigma * adj
    return ann, adj
