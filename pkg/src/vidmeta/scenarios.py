"""End-to-end experiment harness: manifest in, metrics and plots out.

A manifest CSV (columns: path, brand, model_id, tool, social, edited)
names the videos and their ground truth.  Ingestion parses each file
down to its canonical string collection; a scenario then turns the
label columns into classes (device brand, editing tool, hosting
service, manipulated-or-not), splits the corpus, fits the feature
pipeline on the training half only, trains a classifier, and reports
per-class F1, confusion counts, balanced accuracy, and -- for the
projected scenarios -- an SVG of the discriminant plane.

Splits, clustering, and thinning all run from one seed; rerunning a
scenario with the same inputs reproduces its outputs byte for byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import bmff
from .refine import refine as refine_tree
from .classify import (
    KnnModel,
    LdaModel,
    Metrics,
    TreeModel,
    TreeNode,
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
)
from .strings import MetadataString, parse_string, serialize
from .svgplot import emit_svg

log = logging.getLogger(__name__)

SCENARIOS = (
    "brand",
    "tool",
    "social",
    "manip-social",
    "manip-local",
    "blind-device",
)

MANIFEST_COLUMNS = ("path", "brand", "model_id", "tool", "social", "edited")

_GRID_RESOLUTION = 150
_TRUTHY = frozenset({"1", "true", "yes", "y", "edited"})


class DataError(ValueError):
    """Problems with the supplied data, not with the code."""


class EmptyCorpus(DataError):
    pass


class ClassTooSmall(DataError):
    pass


class UnknownDeviceId(DataError):
    pass


class ManifestMissingColumn(DataError):
    pass


# ---------------------------------------------------------------------------
# manifest and corpus


@dataclass(frozen=True)
class ManifestRow:
    path: str
    brand: str = ""
    model_id: str = ""
    tool: str = ""
    social: str = ""
    edited: str = ""


def load_manifest(path) -> list[ManifestRow]:
    """Read the manifest CSV; only the path column is mandatory."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "path" not in reader.fieldnames:
            raise ManifestMissingColumn("manifest needs at least a 'path' column")
        rows = []
        for record in reader:
            rows.append(
                ManifestRow(
                    path=(record.get("path") or "").strip(),
                    brand=(record.get("brand") or "").strip(),
                    model_id=(record.get("model_id") or "").strip(),
                    tool=(record.get("tool") or "").strip(),
                    social=(record.get("social") or "").strip(),
                    edited=(record.get("edited") or "").strip(),
                )
            )
    return [r for r in rows if r.path]


@dataclass
class CorpusRecord:
    """One video's labels plus its canonical string collection."""

    file: str
    labels: dict[str, str]
    strings: list[MetadataString]

    def label_for(self, scenario: str) -> str:
        if "class" in self.labels:
            return self.labels["class"]
        if scenario in ("brand", "blind-device"):
            return self.labels.get("brand", "")
        if scenario == "tool":
            return self.labels.get("tool", "") or "native"
        if scenario == "social":
            return self.labels.get("social", "") or "Other"
        if scenario in ("manip-social", "manip-local"):
            flag = self.labels.get("edited", "").lower()
            return "edited" if flag in _TRUTHY else "pristine"
        raise ValueError(f"unknown scenario {scenario!r}")


def extract_strings(data: bytes) -> list[MetadataString]:
    """Parse one file's bytes all the way to its string collection."""
    report = bmff.parse_tree(data)
    tree = refine_tree(report)
    return serialize(tree)


def ingest(
    manifest: Sequence[ManifestRow], root_dir
) -> tuple[list[CorpusRecord], list[tuple[str, str]]]:
    """Parse every manifest entry; unreadable files are skipped.

    Returns (records, skipped) where skipped pairs each failed path
    with the reason.  Raises :class:`EmptyCorpus` when nothing at all
    could be ingested.
    """
    root = Path(root_dir)
    records: list[CorpusRecord] = []
    skipped: list[tuple[str, str]] = []
    for row in manifest:
        full = root / row.path
        try:
            data = full.read_bytes()
            strings = extract_strings(data)
        except (OSError, bmff.ParseError) as exc:
            log.warning("skipping %s: %s", row.path, exc)
            skipped.append((row.path, str(exc)))
            continue
        records.append(
            CorpusRecord(
                file=row.path,
                labels={
                    "brand": row.brand,
                    "model_id": row.model_id,
                    "tool": row.tool,
                    "social": row.social,
                    "edited": row.edited,
                },
                strings=strings,
            )
        )
    if not records:
        raise EmptyCorpus("no manifest entry could be ingested")
    return records, skipped


def write_corpus(records: Iterable[CorpusRecord], path) -> None:
    """Write records as JSON Lines: {"file", "label", "strings"}."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            doc = {
                "file": rec.file,
                "label": rec.labels.get("class", rec.labels),
                "strings": [ms.text for ms in rec.strings],
            }
            fh.write(json.dumps(doc, sort_keys=True) + "\n")


def read_corpus(path) -> list[CorpusRecord]:
    """Read a JSON Lines corpus back into records.

    ``label`` may be an object of label columns or a single string (the
    class for whatever scenario the corpus was built for).
    """
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
                label = doc["label"]
                labels = dict(label) if isinstance(label, dict) else {"class": str(label)}
                strings = [parse_string(t) for t in doc["strings"]]
                records.append(CorpusRecord(doc["file"], labels, strings))
            except (KeyError, ValueError) as exc:
                raise DataError(f"corpus line {line_no} malformed: {exc}") from exc
    if not records:
        raise EmptyCorpus("corpus holds no records")
    return records


def filter_records(
    records: Sequence[CorpusRecord], filters: dict[str, str]
) -> list[CorpusRecord]:
    out = [
        r
        for r in records
        if all(r.labels.get(col, "") == val for col, val in filters.items())
    ]
    if not out:
        raise EmptyCorpus(f"no record matches filter {filters}")
    return out


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ScenarioConfig:
    """Hyperparameters of one experiment run.

    alpha: correlation-cluster count; beta: largest cluster kept whole;
    lambda_: neighbors in the plane vote.  ``classifier`` None routes
    two-class tasks to the tree and the rest to the projected
    neighbor vote; ``split`` None picks leave-one-model-out for the
    manip-local scenario and a stratified half split otherwise.
    """

    scenario: str
    alpha: int = 300
    beta: int = 4
    lambda_: int = 5
    seed: int = 0
    classifier: str | None = None  # None=auto, "lda-knn", "tree"
    split: str | None = None  # None=auto, "stratified-half", "leave-one-model-out"
    small_clusters: str = "keep"
    continuous: ContinuousKeyList = DEFAULT_CONTINUOUS

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.classifier not in (None, "lda-knn", "tree"):
            raise ValueError(f"unknown classifier {self.classifier!r}")
        if self.split not in (None, "stratified-half", "leave-one-model-out"):
            raise ValueError(f"unknown split {self.split!r}")
        if min(self.alpha, self.beta, self.lambda_) < 1:
            raise ValueError("alpha, beta and lambda must be >= 1")

    def effective_split(self) -> str:
        if self.split is not None:
            return self.split
        return "leave-one-model-out" if self.scenario == "manip-local" else "stratified-half"

    def effective_classifier(self, n_classes: int) -> str:
        if self.classifier is not None:
            return self.classifier
        return "tree" if n_classes == 2 else "lda-knn"

    def to_json_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "alpha": self.alpha,
            "beta": self.beta,
            "lambda": self.lambda_,
            "seed": self.seed,
            "classifier": self.classifier,
            "split": self.effective_split(),
            "small_clusters": self.small_clusters,
            "continuous_patterns": sorted(self.continuous.patterns),
        }


# ---------------------------------------------------------------------------
# feature pipeline


@dataclass
class FeaturePipeline:
    """Vocabulary plus selection mask, fitted on training data only."""

    vocabulary: Vocabulary
    mask: SelectionMask
    alpha_used: int

    def transform(self, strings: Sequence[MetadataString]) -> np.ndarray:
        return self.mask.apply(vectorize(strings, self.vocabulary))

    def transform_many(
        self, collections: Sequence[Sequence[MetadataString]]
    ) -> np.ndarray:
        return np.stack([self.transform(c) for c in collections])


def fit_pipeline(
    collections: Sequence[Sequence[MetadataString]], config: ScenarioConfig
) -> FeaturePipeline:
    """Vocabulary, correlation, clustering, thinning -- training half only."""
    vocab = build_vocabulary(collections, config.continuous)
    if vocab.dim == 0:
        raise EmptyCorpus("training collections produced no strings")
    X = np.stack([vectorize(c, vocab) for c in collections])
    affinity = clamp_positive(correlation_matrix(X))
    alpha_used = min(config.alpha, vocab.dim)
    if alpha_used < config.alpha:
        log.info(
            "cluster count clamped from %d to the %d available features",
            config.alpha,
            vocab.dim,
        )
    labels = spectral_cluster(affinity, alpha_used, config.seed)
    mask = select_features(labels, config.beta, config.seed, config.small_clusters)
    return FeaturePipeline(vocabulary=vocab, mask=mask, alpha_used=alpha_used)


def stratified_split(
    labels: Sequence[str], seed: int
) -> tuple[list[int], list[int]]:
    """Disjoint half split, stratified per class, seeded.

    Training takes ceil(n/2) of each class, so the validation share is
    within one sample of 50% per class.
    """
    rng = np.random.default_rng(seed)
    train: list[int] = []
    val: list[int] = []
    by_class: dict[str, list[int]] = {}
    for i, label in enumerate(labels):
        by_class.setdefault(label, []).append(i)
    for label in sorted(by_class):
        idx = by_class[label]
        perm = rng.permutation(len(idx))
        cut = (len(idx) + 1) // 2
        train.extend(idx[p] for p in perm[:cut])
        val.extend(idx[p] for p in perm[cut:])
    return sorted(train), sorted(val)


# ---------------------------------------------------------------------------
# fitted model


@dataclass
class ScenarioModel:
    """Everything needed to classify a new string collection."""

    scenario: str
    config: ScenarioConfig
    pipeline: FeaturePipeline
    kind: str  # "lda-knn" | "tree"
    classes: tuple
    lda: LdaModel | None = None
    knn: KnnModel | None = None
    tree: TreeModel | None = None

    def predict_vectors(self, X: np.ndarray):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.kind == "lda-knn":
            return knn_predict(self.knn, lda_transform(self.lda, X))
        return tree_predict(self.tree, X)

    def predict_strings(self, strings: Sequence[MetadataString]):
        return self.predict_vectors(self.pipeline.transform(strings))[0]

    def to_json_dict(self) -> dict:
        vocab_doc = self.pipeline.vocabulary.to_json_dict()
        vocab_hash = hashlib.sha256(
            json.dumps(vocab_doc, sort_keys=True).encode("utf-8")
        ).hexdigest()
        doc = {
            "scenario": self.scenario,
            "config": self.config.to_json_dict(),
            "kind": self.kind,
            "classes": list(self.classes),
            "vocabulary_sha256": vocab_hash,
            "vocabulary": vocab_doc,
            "selection_mask": self.pipeline.mask.to_json_dict(),
            "alpha_used": self.pipeline.alpha_used,
        }
        if self.kind == "lda-knn":
            doc["lda"] = {
                "projection": self.lda.projection.tolist(),
                "mean": self.lda.mean.tolist(),
                "classes": list(self.lda.classes),
                "class_means_2d": self.lda.class_means_2d.tolist(),
                "ridge_scale": self.lda.ridge_scale,
            }
            doc["knn"] = {
                "points": self.knn.points.tolist(),
                "labels": list(self.knn.labels),
                "n_neighbors": self.knn.n_neighbors,
                "metric": self.knn.metric,
                "weighting": self.knn.weighting,
            }
        else:
            doc["tree"] = {
                "classes": list(self.tree.classes),
                "n_features": self.tree.n_features,
                "nodes": [
                    {
                        "feature": n.feature,
                        "threshold": n.threshold,
                        "left": n.left,
                        "right": n.right,
                        "label": n.label,
                    }
                    for n in self.tree.nodes
                ],
            }
        return doc

    @staticmethod
    def from_json_dict(doc: dict) -> "ScenarioModel":
        cfg = doc["config"]
        config = ScenarioConfig(
            scenario=doc["scenario"],
            alpha=cfg["alpha"],
            beta=cfg["beta"],
            lambda_=cfg["lambda"],
            seed=cfg["seed"],
            classifier=cfg.get("classifier"),
            split=None,
            small_clusters=cfg.get("small_clusters", "keep"),
            continuous=ContinuousKeyList(
                frozenset(cfg.get("continuous_patterns", ()))
            ),
        )
        pipeline = FeaturePipeline(
            vocabulary=Vocabulary.from_json_dict(doc["vocabulary"]),
            mask=SelectionMask.from_json_dict(doc["selection_mask"]),
            alpha_used=doc["alpha_used"],
        )
        model = ScenarioModel(
            scenario=doc["scenario"],
            config=config,
            pipeline=pipeline,
            kind=doc["kind"],
            classes=tuple(doc["classes"]),
        )
        if model.kind == "lda-knn":
            lda_doc = doc["lda"]
            model.lda = LdaModel(
                projection=np.asarray(lda_doc["projection"], dtype=np.float64),
                mean=np.asarray(lda_doc["mean"], dtype=np.float64),
                classes=tuple(lda_doc["classes"]),
                class_means_2d=np.asarray(lda_doc["class_means_2d"], dtype=np.float64),
                ridge_scale=float(lda_doc["ridge_scale"]),
            )
            knn_doc = doc["knn"]
            model.knn = KnnModel(
                points=np.asarray(knn_doc["points"], dtype=np.float64),
                labels=tuple(knn_doc["labels"]),
                n_neighbors=int(knn_doc["n_neighbors"]),
                metric=knn_doc.get("metric", "euclidean"),
                weighting=knn_doc.get("weighting", "inverse"),
            )
        else:
            tree_doc = doc["tree"]
            model.tree = TreeModel(
                nodes=[
                    TreeNode(
                        feature=int(n["feature"]),
                        threshold=float(n["threshold"]),
                        left=int(n["left"]),
                        right=int(n["right"]),
                        label=n["label"],
                    )
                    for n in tree_doc["nodes"]
                ],
                classes=tuple(tree_doc["classes"]),
                n_features=int(tree_doc["n_features"]),
            )
        return model


# ---------------------------------------------------------------------------
# scenario runs


@dataclass
class ScenarioReport:
    scenario: str
    config: ScenarioConfig
    classes: tuple
    counts: dict  # class -> {"train": n, "val": n}
    metrics: Metrics
    model: ScenarioModel
    svg: str | None
    train_files: list[str]
    val_files: list[str]
    skipped_files: int = 0

    def to_json_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "config": self.config.to_json_dict(),
            "classes": list(self.classes),
            "counts": {
                str(k): {"train": v["train"], "val": v["val"]}
                for k, v in self.counts.items()
            },
            "vocabulary_size": self.model.pipeline.vocabulary.dim,
            "selected_features": len(self.model.pipeline.mask.retained),
            "metrics": self.metrics.to_json_dict(),
            "skipped_files": self.skipped_files,
        }

    def metrics_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"


def _positive_label(classes: Sequence[str]) -> str | None:
    return "edited" if set(classes) == {"edited", "pristine"} else None


def _scatter_bounds(points: np.ndarray) -> tuple[float, float, float, float]:
    xmin, xmax = float(points[:, 0].min()), float(points[:, 0].max())
    ymin, ymax = float(points[:, 1].min()), float(points[:, 1].max())
    pad_x = (xmax - xmin) * 0.08 or 1.0
    pad_y = (ymax - ymin) * 0.08 or 1.0
    return xmin - pad_x, xmax + pad_x, ymin - pad_y, ymax + pad_y


def run_scenario(config: ScenarioConfig, records: Sequence[CorpusRecord]) -> ScenarioReport:
    """Stratified half-split run of one scenario over a corpus."""
    if not records:
        raise EmptyCorpus("no records supplied")
    labels = [r.label_for(config.scenario) for r in records]
    classes = tuple(sorted(set(labels)))
    if len(classes) < 2:
        raise ClassTooSmall(f"need two classes, corpus has only {classes}")
    for cls in classes:
        if labels.count(cls) < 2:
            raise ClassTooSmall(f"class {cls!r} has fewer than 2 samples")

    train_idx, val_idx = stratified_split(labels, config.seed)
    train = [records[i] for i in train_idx]
    val = [records[i] for i in val_idx]
    y_train = [labels[i] for i in train_idx]
    y_val = [labels[i] for i in val_idx]

    pipeline = fit_pipeline([r.strings for r in train], config)
    X_train = pipeline.transform_many([r.strings for r in train])
    X_val = pipeline.transform_many([r.strings for r in val])

    kind = config.effective_classifier(len(classes))
    model = ScenarioModel(
        scenario=config.scenario,
        config=config,
        pipeline=pipeline,
        kind=kind,
        classes=classes,
    )
    svg = None
    if kind == "lda-knn":
        model.lda = lda_fit(X_train, y_train)
        pts_train = lda_transform(model.lda, X_train)
        pts_val = lda_transform(model.lda, X_val)
        model.knn = knn_fit(pts_train, y_train, n_neighbors=config.lambda_)
        preds = list(knn_predict(model.knn, pts_val))
        bounds = _scatter_bounds(np.vstack([pts_train, pts_val]))
        grid = decision_grid(model.knn, bounds, _GRID_RESOLUTION)
        all_points = np.vstack([pts_train, pts_val])
        all_labels = y_train + y_val
        markers = ["circle"] * len(pts_train) + ["square"] * len(pts_val)
        svg = emit_svg(
            all_points,
            all_labels,
            grid=grid,
            markers=markers,
            title=f"{config.scenario}: training (circles) and validation (squares)",
        )
    else:
        model.tree = tree_fit(X_train, y_train)
        preds = list(tree_predict(model.tree, X_val))

    metrics = evaluate(y_val, preds, positive_label=_positive_label(classes))
    counts = {
        cls: {"train": y_train.count(cls), "val": y_val.count(cls)} for cls in classes
    }
    return ScenarioReport(
        scenario=config.scenario,
        config=config,
        classes=classes,
        counts=counts,
        metrics=metrics,
        model=model,
        svg=svg,
        train_files=[r.file for r in train],
        val_files=[r.file for r in val],
    )


@dataclass
class BlindDeviceReport:
    holdout_model_id: str
    holdout_brands: tuple
    n_holdout: int
    fraction_in_true_region: float
    predictions: list
    model: ScenarioModel
    svg: str | None
    config: ScenarioConfig

    def to_json_dict(self) -> dict:
        return {
            "scenario": "blind-device",
            "config": self.config.to_json_dict(),
            "holdout_model_id": self.holdout_model_id,
            "holdout_brands": list(self.holdout_brands),
            "n_holdout": self.n_holdout,
            "fraction_in_true_region": self.fraction_in_true_region,
            "predictions": [str(p) for p in self.predictions],
            "vocabulary_size": self.model.pipeline.vocabulary.dim,
            "selected_features": len(self.model.pipeline.mask.retained),
        }

    def metrics_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"


def run_blind_device(
    config: ScenarioConfig,
    records: Sequence[CorpusRecord],
    holdout_model_id: str,
) -> BlindDeviceReport:
    """Hold one device model out entirely; judge where it lands.

    The brand classifier trains on every other sample (no split); the
    holdout's videos are projected into the trained plane and the
    reported fraction is the share classified as their true brand.
    """
    holdout = [r for r in records if r.labels.get("model_id") == holdout_model_id]
    if not holdout:
        raise UnknownDeviceId(f"no record has model_id {holdout_model_id!r}")
    train = [r for r in records if r.labels.get("model_id") != holdout_model_id]
    if not train:
        raise EmptyCorpus("holdout removed every training sample")
    y_train = [r.label_for("brand") for r in train]
    classes = tuple(sorted(set(y_train)))
    if len(classes) < 2:
        raise ClassTooSmall("training half needs at least two brands")

    pipeline = fit_pipeline([r.strings for r in train], config)
    X_train = pipeline.transform_many([r.strings for r in train])
    X_hold = pipeline.transform_many([r.strings for r in holdout])

    model = ScenarioModel(
        scenario="blind-device",
        config=config,
        pipeline=pipeline,
        kind="lda-knn",
        classes=classes,
    )
    model.lda = lda_fit(X_train, y_train)
    pts_train = lda_transform(model.lda, X_train)
    pts_hold = lda_transform(model.lda, X_hold)
    model.knn = knn_fit(pts_train, y_train, n_neighbors=config.lambda_)
    preds = list(knn_predict(model.knn, pts_hold))
    truths = [r.label_for("brand") for r in holdout]
    fraction = float(np.mean([p == t for p, t in zip(preds, truths)]))

    bounds = _scatter_bounds(np.vstack([pts_train, pts_hold]))
    grid = decision_grid(model.knn, bounds, _GRID_RESOLUTION)
    points = np.vstack([pts_train, pts_hold])
    point_labels = y_train + truths
    markers = ["circle"] * len(pts_train) + ["open"] * len(pts_hold)
    svg = emit_svg(
        points,
        point_labels,
        grid=grid,
        markers=markers,
        title=f"blind device {holdout_model_id}: holdout drawn as open markers",
    )
    return BlindDeviceReport(
        holdout_model_id=holdout_model_id,
        holdout_brands=tuple(sorted(set(truths))),
        n_holdout=len(holdout),
        fraction_in_true_region=fraction,
        predictions=preds,
        model=model,
        svg=svg,
        config=config,
    )


@dataclass
class LooReport:
    folds: list[dict]
    mean_balanced_accuracy: float
    config: ScenarioConfig

    def to_json_dict(self) -> dict:
        return {
            "scenario": "manip-local",
            "config": self.config.to_json_dict(),
            "split": "leave-one-model-out",
            "folds": self.folds,
            "mean_balanced_accuracy": self.mean_balanced_accuracy,
        }

    def metrics_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"


def run_leave_one_model_out(
    config: ScenarioConfig, records: Sequence[CorpusRecord]
) -> LooReport:
    """One fold per device model: it validates, everything else trains.

    Folds whose training or validation half misses one of the two
    classes are skipped and reported as such; the mean balanced
    accuracy covers executed folds only.
    """
    model_ids = sorted({r.labels.get("model_id", "") for r in records})
    if len(model_ids) < 2:
        raise DataError("leave-one-model-out needs at least two device models")
    folds: list[dict] = []
    scores: list[float] = []
    for model_id in model_ids:
        val = [r for r in records if r.labels.get("model_id", "") == model_id]
        train = [r for r in records if r.labels.get("model_id", "") != model_id]
        y_val = [r.label_for("manip-local") for r in val]
        y_train = [r.label_for("manip-local") for r in train]
        missing = []
        for side, ys in (("train", y_train), ("validation", y_val)):
            if len(set(ys)) < 2:
                missing.append(side)
        if missing:
            folds.append(
                {
                    "model_id": model_id,
                    "skipped": f"{' and '.join(missing)} half missing a class",
                }
            )
            continue
        pipeline = fit_pipeline([r.strings for r in train], config)
        X_train = pipeline.transform_many([r.strings for r in train])
        X_val = pipeline.transform_many([r.strings for r in val])
        kind = config.effective_classifier(2)
        if kind == "lda-knn":
            lda = lda_fit(X_train, y_train)
            knn = knn_fit(lda_transform(lda, X_train), y_train, n_neighbors=config.lambda_)
            preds = list(knn_predict(knn, lda_transform(lda, X_val)))
        else:
            tree = tree_fit(X_train, y_train)
            preds = list(tree_predict(tree, X_val))
        metrics = evaluate(y_val, preds, positive_label=_positive_label(set(y_val)))
        scores.append(metrics.balanced_accuracy)
        folds.append(
            {
                "model_id": model_id,
                "n_validation": len(val),
                "balanced_accuracy": metrics.balanced_accuracy,
            }
        )
    if not scores:
        raise DataError("every fold was skipped; no class-complete split exists")
    return LooReport(
        folds=folds,
        mean_balanced_accuracy=float(np.mean(scores)),
        config=config,
    )
