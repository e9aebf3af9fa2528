"""Two-stage WGAN-GP training, checkpoints and sampling."""

from .checkpoint import Checkpoint, decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint
from .config import Route, TrainConfig, Variant, load_config, parse_config_text
from .data import (
    DatasetBundle,
    MolSet,
    epoch_batches,
    load_bundle,
    read_molecules,
    split_indices,
    toy_molecule,
    toy_molecules,
)
from .errors import (
    CheckpointCorrupt,
    ConfigError,
    DataError,
    DataExhausted,
    EmptyBatch,
    NonFiniteLoss,
    TrainingError,
    VariantMismatch,
)
from .generate import Generated, decode_smiles, generate
from .losses import (
    WGANLosses,
    critic_loss,
    generator_loss,
    gradient_penalty,
    interpolate,
    reinforce_surrogate,
    rl_scaffold_penalty,
    sample_log_prob,
    scaffold_fingerprints,
    scaffold_similarities,
    wgan_losses,
)
from .loop import METRIC_HEADER, EpochRecord, Trainer, train
from .model import GANModel, sample_z

__all__ = [name for name in dir() if not name.startswith("_")]
