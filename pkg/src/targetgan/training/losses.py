"""Wasserstein losses, the gradient penalty and the scaffold-similarity penalty."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .. import numcore as nc
from ..chem.errors import ChemError, EmptyBatch
from ..chem.graph import MolGraph
from ..chem.matrices import MolMatrices, check_validity, from_matrices
from ..metrics.fingerprint import Fingerprint, fingerprint, tanimoto
from ..metrics.scaffold import murcko_scaffold
from ..nets import Condition, SoftMol, VariantMismatch
from ..nets.discriminator import Discriminator, flatten_pair
from ..numcore import Tape, Tensor
from .model import GANModel

Critic = Callable[[Tensor], Tensor]


@dataclass
class WGANLosses:
    loss_d1: Tensor
    loss_d2: Tensor
    loss_g1: Tensor
    loss_g2: Tensor
    w1: float
    w2: float

    @property
    def wasserstein_estimates(self) -> tuple[float, float]:
        return self.w1, self.w2


ZERO = 0.0


def critic_loss(d: Discriminator, real, fake) -> tuple[Tensor, float]:
    """``-(E D(real) - E D(fake))`` and the Wasserstein estimate inside it."""
    w = nc.sub(nc.mean(d(*real)), nc.mean(d(*fake)))
    return nc.neg(w), float(w.data)


def generator_loss(d: Discriminator, fake) -> Tensor:
    return nc.neg(nc.mean(d(*fake)))


def _pair(x):
    return (x.annotation, x.adjacency) if isinstance(x, SoftMol) else x


def wgan_losses(model: GANModel, real1, real2, z, cond: Condition | None) -> WGANLosses:
    """All four adversarial losses for one batch.

    ``real1``/``real2`` are ``(annotation, adjacency)`` batches for the two
    critics; stage-2 losses are exact zeros for single-stage variants.
    Differentiation is up to the caller's tape.
    """
    if real1[0].shape[0] == 0 or z[0].shape[0] == 0:
        raise EmptyBatch("empty training batch")
    if real1[0].shape[0] != z[0].shape[0]:
        raise nc.ShapeMismatch("real and noise batches differ in size")
    two = model.variant.two_stage
    if two and (real2 is None or cond is None):
        raise VariantMismatch(f"variant {model.variant.value} needs a stage-2 batch and condition")
    f1, f2 = model.generate_soft(z, cond)
    loss_d1, w1 = critic_loss(model.d1, real1, _pair(f1))
    loss_g1 = generator_loss(model.d1, _pair(f1))
    if not two:
        zero = Tensor(np.float64(ZERO))
        return WGANLosses(loss_d1, zero, loss_g1, zero, w1, 0.0)
    if real2[0].shape[0] != z[0].shape[0]:
        raise nc.ShapeMismatch("stage-2 real and noise batches differ in size")
    loss_d2, w2 = critic_loss(model.d2, real2, _pair(f2))
    loss_g2 = generator_loss(model.d2, _pair(f2))
    return WGANLosses(loss_d1, loss_d2, loss_g1, loss_g2, w1, w2)


def interpolate(real: np.ndarray, fake: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """``eps * real + (1 - eps) * fake`` with one ``eps`` per sample (leading axis)."""
    e = eps.reshape((-1,) + (1,) * (real.ndim - 1))
    return e * real + (1.0 - e) * fake


def gradient_penalty(critics: Sequence[Critic], params: Sequence[Tensor],
                     reals: Sequence[np.ndarray], fakes: Sequence[np.ndarray],
                     lambda_gp: float, rng: np.random.Generator) -> tuple[float, list[np.ndarray]]:
    """``lambda * E[(||grad D~(x^)|| - 1)^2]`` with ``D~`` the sum of ``critics``.

    ``reals``/``fakes`` hold one flat ``(B, F_k)`` batch per critic.  Every
    sample draws one ``eps ~ U(0, 1)`` shared by all critics, so ``x^`` is a
    single point on the segment between the concatenated real and fake
    inputs.  Returns the scaled penalty and its gradients for ``params``.
    """
    b = reals[0].shape[0]
    eps = rng.uniform(0.0, 1.0, size=b)
    xs = [Tensor(interpolate(np.asarray(r, dtype=np.float64), np.asarray(f, dtype=np.float64), eps),
                 requires_grad=True) for r, f in zip(reals, fakes)]
    tape = Tape()
    with tape:
        out = critics[0](xs[0])
        for c, x in zip(critics[1:], xs[1:]):
            out = nc.add(out, c(x))
    pen, grads = nc.grad_of_grad_norm(tape, out, xs, list(params))
    return lambda_gp * float(pen.data), [lambda_gp * g.data for g in grads]


def flat(x) -> np.ndarray:
    """Numeric flat critic input from a SoftMol or an ``(annotation, adjacency)`` pair."""
    a, b = _pair(x)
    with nc.no_record():
        return flatten_pair(a, b).data


# ---------------------------------------------------------------------------
# scaffold penalty


def scaffold_fingerprints(reference: Sequence[MolGraph]) -> list[Fingerprint]:
    """Fingerprints of the non-empty Bemis-Murcko scaffolds of ``reference``."""
    out = []
    for g in reference:
        s = murcko_scaffold(g)
        if len(s):
            out.append(fingerprint(s))
    return out


def scaffold_similarities(generated: Sequence[MolMatrices], ref_fps: Sequence[Fingerprint]) -> np.ndarray:
    """Per-molecule max scaffold Tanimoto; 1 for invalid decodes, 0 for acyclic molecules."""
    out = np.zeros(len(generated))
    for k, m in enumerate(generated):
        try:
            g = from_matrices(m)
        except ChemError:
            out[k] = 1.0
            continue
        if not check_validity(g):
            out[k] = 1.0
            continue
        s = murcko_scaffold(g)
        if len(s) == 0 or not ref_fps:
            continue
        fp = fingerprint(s)
        out[k] = max(tanimoto(fp, r) for r in ref_fps)
    return out


def rl_scaffold_penalty(generated: Sequence[MolMatrices], reference) -> float:
    """Mean over ``generated`` of the max scaffold similarity to ``reference``.

    ``reference`` is a list of graphs or of precomputed scaffold fingerprints.
    """
    if len(generated) == 0:
        return 0.0
    refs = list(reference)
    if refs and isinstance(refs[0], MolGraph):
        refs = scaffold_fingerprints(refs)
    return float(scaffold_similarities(generated, refs).mean())


def sample_log_prob(soft: SoftMol, atoms: np.ndarray, bonds: np.ndarray) -> Tensor:
    """Log-probability per sample of discrete ``atoms (B, n)`` and ``bonds (B, n, n)``.

    Each unordered atom pair counts once (upper triangle).
    """
    a_cls = soft.annotation.shape[-1]
    b_cls = soft.adjacency.shape[-1]
    n = atoms.shape[1]
    pa = nc.sum_(nc.mul(soft.annotation, Tensor(np.eye(a_cls)[atoms])), axis=-1)
    pb = nc.sum_(nc.mul(soft.adjacency, Tensor(np.eye(b_cls)[bonds])), axis=-1)
    upper = np.triu(np.ones((n, n)), 1)[None]
    la = nc.sum_(nc.log(nc.add(pa, 1e-12)), axis=-1)
    lb = nc.mul(nc.log(nc.add(pb, 1e-12)), Tensor(upper))
    lb = nc.sum_(nc.reshape(lb, (pb.shape[0], -1)), axis=-1)
    return nc.add(la, lb)


def reinforce_surrogate(soft: SoftMol, atoms: np.ndarray, bonds: np.ndarray,
                        rewards: np.ndarray) -> Tensor:
    """Score-function surrogate ``mean_b (r_b - mean r) log p(sample_b)``.

    Its gradient is the mean-baseline REINFORCE estimate of ``grad E[r]``.
    """
    adv = Tensor(rewards - rewards.mean())
    return nc.mean(nc.mul(adv, sample_log_prob(soft, atoms, bonds)))
