"""Network hyperparameters."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from ..chem.elements import MAX_ATOMS, N_ATOM_CLASSES, N_BOND_CLASSES
from ..pocket.types import MAX_POCKET_ATOMS, N_POCKET_EDGES, N_POCKET_TYPES


@dataclass(frozen=True)
class EncoderConfig:
    depth: int = 8
    heads: int = 8
    model_dim: int = 128
    embed_hidden: int = 64
    ff_mult: int = 2
    dropout: float = 0.0
    max_atoms: int = MAX_ATOMS
    atom_classes: int = N_ATOM_CLASSES
    bond_classes: int = N_BOND_CLASSES

    def __post_init__(self) -> None:
        if self.model_dim % self.heads:
            raise ValueError("model_dim must be divisible by heads")
        if min(self.depth, self.heads, self.model_dim, self.max_atoms) < 1:
            raise ValueError("sizes must be positive")


@dataclass(frozen=True)
class DecoderConfig:
    depth: int = 8
    heads: int = 8
    model_dim: int = 128
    embed_hidden: int = 64
    ff_mult: int = 2
    dropout: float = 0.0
    pocket_atoms: int = MAX_POCKET_ATOMS
    pocket_classes: int = N_POCKET_TYPES
    pocket_edge_classes: int = N_POCKET_EDGES

    def __post_init__(self) -> None:
        if self.model_dim % self.heads:
            raise ValueError("model_dim must be divisible by heads")


@dataclass(frozen=True)
class DiscriminatorConfig:
    sizes: tuple[int, ...] = (256, 128, 64, 32, 16, 1)

    def __post_init__(self) -> None:
        if self.sizes[-1] != 1:
            raise ValueError("the critic must end in a single unit")


@dataclass(frozen=True)
class ModelConfig:
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    discriminator: DiscriminatorConfig = field(default_factory=DiscriminatorConfig)
    input_mode: str = "noise"      # "noise" or "perturbed"
    perturb_sigma: float = 0.5

    def __post_init__(self) -> None:
        if self.encoder.model_dim != self.decoder.model_dim:
            raise ValueError("encoder and decoder model_dim differ")
        if self.input_mode not in ("noise", "perturbed"):
            raise ValueError(f"unknown input_mode {self.input_mode!r}")

    @property
    def max_atoms(self) -> int:
        return self.encoder.max_atoms

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(EncoderConfig(**d["encoder"]), DecoderConfig(**d["decoder"]),
                   DiscriminatorConfig(tuple(d["discriminator"]["sizes"])),
                   d.get("input_mode", "noise"), d.get("perturb_sigma", 0.5))

    @classmethod
    def tiny(cls, depth: int = 2, model_dim: int = 32, heads: int = 4, max_atoms: int = 12,
             pocket_atoms: int = 30, embed_hidden: int = 32,
             disc_sizes: tuple[int, ...] = (64, 32, 16, 1), **kw) -> "ModelConfig":
        enc = EncoderConfig(depth, heads, model_dim, embed_hidden, max_atoms=max_atoms)
        dec = DecoderConfig(depth, heads, model_dim, embed_hidden, pocket_atoms=pocket_atoms)
        return cls(enc, dec, DiscriminatorConfig(disc_sizes), **kw)
