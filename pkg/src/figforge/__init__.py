"""figforge: compound-figure article packages -> multi-image instruction datasets.

Library layout mirrors the pipeline: ``corpus`` parses and gates article
packages, ``figures`` segments compound figures and derives panel geometry,
``gateway`` talks to (or mocks) model endpoints, ``forge`` runs the five-stage
instruction generation, ``evalsuite`` scores predictions, ``stats`` computes
rater-agreement statistics, ``bench`` curates and exports benchmarks, and
``report`` renders figures for the CLI report paths.
"""

__version__ = "0.1.0"
