from .corpusstats import ANATOMY_VOCAB, MODALITY_VOCAB, corpus_statistics
from . import charts

__all__ = ["corpus_statistics", "MODALITY_VOCAB", "ANATOMY_VOCAB", "charts"]
