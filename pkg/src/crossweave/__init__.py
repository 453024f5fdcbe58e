"""Tools for building knowledge-anchored bilingual pretraining corpora.

The package turns monolingual document streams plus a bilingual knowledge
base (entity lexicon, relation table, fact triples, linked passages) into
mixed training examples for three objectives: entity-masked language
modeling over code-switched text, relation-masked modeling over documents
with appended facts, and passage-pair relationship classification.  A
marker protocol for porting span annotations across translation lives in
:mod:`crossweave.markers`.
"""

__version__ = "0.1.0"

from crossweave.errors import ConfigError, CorpusError, LoadError, MarkerError, PipelineError

__all__ = [
    "ConfigError",
    "CorpusError",
    "LoadError",
    "MarkerError",
    "PipelineError",
    "__version__",
]
