"""Latent-space exploration platform for a flow-based molecular graph generator.

The package is organised around a small pipeline:

* :mod:`molscope.molgraph` -- molecular graphs, a kekulized SMILES subset,
  one-hot tensor conversion and post-hoc validity correction.
* :mod:`molscope.flow` -- an invertible coupling-layer flow over the graph
  tensors with exact encode/decode and log-likelihood training.
* :mod:`molscope.latent` -- reconstruction, neighborhood grids and linear
  interpolation in the flow's latent space.
* :mod:`molscope.chem` -- circular fingerprints, Tanimoto similarity and
  exactly computable property scores.
* :mod:`molscope.optimize` -- similarity-constrained hill climbing over a
  property objective.
* :mod:`molscope.geometry` -- deterministic 2D depiction, approximate 3D
  embedding, SVG and xyz serialization.
* :mod:`molscope.platform` -- checkpoints, dataset ingestion, the HTTP/JSON
  API, background optimization jobs and the CLI.
"""

from molscope.molgraph import (
    Element,
    ELEMENTS,
    MolecularGraph,
    GraphTensors,
    parse_smiles,
    to_smiles,
    to_tensors,
    from_tensors,
    is_valid,
    validity_correct,
)
from molscope.flow import FlowConfig, FlowModel, LatentPoint, new_model
from molscope.chem import fingerprint, tanimoto, property_score, PROPERTY_NAMES

__version__ = "0.1.0"

__all__ = [
    "Element",
    "ELEMENTS",
    "MolecularGraph",
    "GraphTensors",
    "parse_smiles",
    "to_smiles",
    "to_tensors",
    "from_tensors",
    "is_valid",
    "validity_correct",
    "FlowConfig",
    "FlowModel",
    "LatentPoint",
    "new_model",
    "fingerprint",
    "tanimoto",
    "property_score",
    "PROPERTY_NAMES",
    "__version__",
]
