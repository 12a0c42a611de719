"""mwe-adapter: neural scorer plugging into the spanforge toolkit.

Fine-tunes a token encoder with three independent sigmoid heads (start,
end, inside) plus optional NP-chunk and dependency-distance embeddings,
and exchanges corpora, features and probabilities with the toolkit
through its file formats only.
"""

__version__ = "0.1.0"

from .model import AdapterConfig, BoundaryScorer, load_checkpoint, save_checkpoint  # noqa: F401
from .training import predict_to_file, train  # noqa: F401
