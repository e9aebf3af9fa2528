"""Generation benchmarks, descriptors, drug-likeness and similarity filters."""

from .descriptors import (
    LIMITS,
    DescriptorSet,
    descriptors,
    lipinski_veber_pass,
    logp_approx,
    mol_weight,
    pass_flags,
    rotatable_bonds,
    tpsa_approx,
)
from .distribution import (
    int_div,
    max_similarities,
    novelty,
    similarity_filter,
    uniqueness,
    wasserstein_1d,
)
from .errors import BatchTooSmall, EmptySample, MetricError, WidthMismatch
from .fingerprint import Fingerprint, atom_identifiers, fingerprint, tanimoto
from .report import MetricReport, report
from .scaffold import murcko_scaffold

__all__ = [name for name in dir() if not name.startswith("_")]
