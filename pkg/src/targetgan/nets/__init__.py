"""Generators G1/G2 and critics D1/D2."""

from .attention import (
    CrossAttention,
    DecoderLayer,
    EncoderLayer,
    GraphSelfAttention,
    cross_attention,
    mol_self_attention,
)
from .config import DecoderConfig, DiscriminatorConfig, EncoderConfig, ModelConfig
from .discriminator import Discriminator, discriminate, flatten_pair
from .generator import (
    Condition,
    DecoderGenerator,
    EncoderGenerator,
    OutputHeads,
    SoftMol,
    VariantMismatch,
)
from .module import MLP, Linear, Module
from .sampling import sample_classes, sample_discrete

__all__ = [name for name in dir() if not name.startswith("_")]
