"""Video provenance from container metadata.

MP4/MOV files carry a tree of metadata boxes whose exact shape betrays
the device, editing tool, or sharing service that wrote them.  This
package parses that tree, canonicalizes it into strings, turns string
collections into numeric vectors, thins redundant features by
correlation clustering, and classifies videos by brand, tool, service,
or manipulation -- all deterministically from a seed.

Layers, each importable on its own:

- :mod:`vidmeta.bmff`      -- byte-level box tree parsing
- :mod:`vidmeta.refine`    -- box payloads to typed metadata fields
- :mod:`vidmeta.strings`   -- canonical string serialization
- :mod:`vidmeta.features`  -- vectors, correlation, spectral selection
- :mod:`vidmeta.classify`  -- LDA projection, kNN, decision tree, metrics
- :mod:`vidmeta.svgplot`   -- deterministic SVG scatter/region plots
- :mod:`vidmeta.scenarios` -- manifest-to-metrics experiment harness
- :mod:`vidmeta.cli`       -- `vidmeta` command-line entry point
"""

from .bmff import (
    BoxHeader,
    BoxNode,
    NotIsoBmff,
    ParseError,
    ParseReport,
    TruncatedHeader,
    parse_header,
    parse_tree,
)
from .classify import (
    KnnModel,
    LdaModel,
    Metrics,
    TreeModel,
    decision_grid,
    evaluate,
    knn_fit,
    knn_predict,
    lda_fit,
    lda_transform,
    tree_fit,
    tree_predict,
)
from .features import (
    DEFAULT_CONTINUOUS,
    ContinuousKeyList,
    SelectionMask,
    Vocabulary,
    build_vocabulary,
    clamp_positive,
    correlation_matrix,
    select_features,
    spectral_cluster,
    vectorize,
    vectorize_corpus,
)
from .refine import (
    DEFAULT_EXCLUSIONS,
    ExclusionList,
    FieldValue,
    MetadataNode,
    XmlNotWellFormed,
    flatten_xml,
    refine,
)
from .scenarios import (
    ClassTooSmall,
    CorpusRecord,
    DataError,
    EmptyCorpus,
    ManifestRow,
    ScenarioConfig,
    ScenarioModel,
    ScenarioReport,
    UnknownDeviceId,
    extract_strings,
    ingest,
    load_manifest,
    read_corpus,
    run_blind_device,
    run_leave_one_model_out,
    run_scenario,
    write_corpus,
)
from .strings import (
    MalformedMetadataString,
    MetadataString,
    escape,
    parse_string,
    serialize,
    unescape,
)

__version__ = "0.1.0"

__all__ = [
    "BoxHeader",
    "BoxNode",
    "ClassTooSmall",
    "ContinuousKeyList",
    "CorpusRecord",
    "DataError",
    "DEFAULT_CONTINUOUS",
    "DEFAULT_EXCLUSIONS",
    "EmptyCorpus",
    "ExclusionList",
    "FieldValue",
    "KnnModel",
    "LdaModel",
    "MalformedMetadataString",
    "ManifestRow",
    "MetadataNode",
    "MetadataString",
    "Metrics",
    "NotIsoBmff",
    "ParseError",
    "ParseReport",
    "ScenarioConfig",
    "ScenarioModel",
    "ScenarioReport",
    "SelectionMask",
    "TreeModel",
    "TruncatedHeader",
    "UnknownDeviceId",
    "Vocabulary",
    "XmlNotWellFormed",
    "build_vocabulary",
    "clamp_positive",
    "correlation_matrix",
    "decision_grid",
    "escape",
    "evaluate",
    "extract_strings",
    "flatten_xml",
    "ingest",
    "knn_fit",
    "knn_predict",
    "lda_fit",
    "lda_transform",
    "load_manifest",
    "parse_header",
    "parse_string",
    "parse_tree",
    "read_corpus",
    "refine",
    "run_blind_device",
    "run_leave_one_model_out",
    "run_scenario",
    "select_features",
    "serialize",
    "spectral_cluster",
    "tree_fit",
    "tree_predict",
    "unescape",
    "vectorize",
    "vectorize_corpus",
    "write_corpus",
]
