"""Model-space enumeration, posterior probabilities, and summaries.

Models are tuples of 0-based candidate-column indices.  Evidence arrives as
null-based log Bayes factors; probabilities come out of a max-shifted
exponentiation, so the layer is safe for sample sizes where raw Bayes
factors overflow.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .bayesfactors import PriorMethod, log_evidence, zs_evidence_batch
from .regression import Dataset, fit_suffstats

__all__ = [
    "ModelSpace",
    "ModelPosterior",
    "enumerate_models",
    "posterior_from_evidence",
    "hpm",
    "mpm",
    "inclusion_probs",
    "entropy",
]

_MAX_ALL_SUBSETS = 25


@dataclass(frozen=True)
class ModelSpace:
    """Enumerable family of models plus the prior over it.

    ``all_subsets`` enumerates every subset of p candidates including the
    empty model; ``nested`` enumerates prefixes of sizes 1..k (or 0..k).
    The prior is uniform over models or uniform over model sizes.
    """

    kind: str
    size: int
    include_null: bool = True
    model_prior: str = "uniform_models"

    def __post_init__(self):
        if self.kind not in ("all_subsets", "nested"):
            raise ValueError(f"unknown model space kind {self.kind!r}")
        if self.model_prior not in ("uniform_models", "uniform_size"):
            raise ValueError(f"unknown model prior {self.model_prior!r}")
        if self.size < 0:
            raise ValueError("size must be nonnegative")
        if self.kind == "all_subsets" and self.size > _MAX_ALL_SUBSETS:
            raise ValueError(
                f"all-subsets enumeration capped at {_MAX_ALL_SUBSETS} predictors"
            )

    @classmethod
    def all_subsets(cls, p: int, model_prior: str = "uniform_models") -> "ModelSpace":
        return cls(kind="all_subsets", size=p, model_prior=model_prior)

    @classmethod
    def nested(
        cls, k: int, include_null: bool = False, model_prior: str = "uniform_size"
    ) -> "ModelSpace":
        return cls(kind="nested", size=k, include_null=include_null,
                   model_prior=model_prior)

    def models(self) -> list[tuple[int, ...]]:
        if self.kind == "all_subsets":
            out = []
            for size in range(self.size + 1):
                out.extend(itertools.combinations(range(self.size), size))
            return out
        start = 0 if self.include_null else 1
        return [tuple(range(j)) for j in range(start, self.size + 1)]

    def log_prior(self, models) -> np.ndarray:
        if self.model_prior == "uniform_models":
            return np.zeros(len(models))
        sizes = np.array([len(m) for m in models])
        counts = {s: int(np.sum(sizes == s)) for s in set(sizes.tolist())}
        n_sizes = len(counts)
        return np.array([-math.log(n_sizes) - math.log(counts[s]) for s in sizes])


@dataclass(frozen=True)
class ModelPosterior:
    """Log evidence and normalized posterior probabilities over a model space."""

    models: tuple
    log_evidence: np.ndarray
    posterior_prob: np.ndarray
    space: ModelSpace

    def to_json_obj(self) -> list[dict]:
        return [
            {"model": list(m), "log_evidence": float(le), "prob": float(pr)}
            for m, le, pr in zip(self.models, self.log_evidence, self.posterior_prob)
        ]


def _model_order(model) -> tuple:
    # Parsimony first, then lexicographic: the deterministic tie-break.
    return (len(model), model)


def posterior_from_evidence(models, log_ev, space: ModelSpace) -> ModelPosterior:
    """Apply the model prior to log evidences and normalize.

    A +inf evidence marker hands probability one to the marked model (the
    tie-break picks one if several are marked).
    """
    models = tuple(tuple(m) for m in models)
    log_ev = np.asarray(log_ev, dtype=np.float64)
    if len(models) == 0:
        raise ValueError("empty model list")
    if log_ev.shape != (len(models),):
        raise ValueError("log evidence length must match the model list")
    probs = np.zeros(len(models))
    if np.any(np.isposinf(log_ev)):
        marked = [m for m, le in zip(models, log_ev) if np.isposinf(le)]
        winner = min(marked, key=_model_order)
        probs[models.index(winner)] = 1.0
    else:
        scores = log_ev + space.log_prior(models)
        scores -= scores.max()
        weights = np.exp(scores)
        probs = weights / weights.sum()
    return ModelPosterior(
        models=models, log_evidence=log_ev, posterior_prob=probs, space=space
    )


def enumerate_models(
    dataset: Dataset, space: ModelSpace, method: PriorMethod
) -> ModelPosterior:
    """Evidence and posterior for every model in the space, fitted locally.

    Each model gets its own fitted prior scale (the local empirical-Bayes
    convention); errors from a single model are re-raised with that model's
    index attached.
    """
    models = space.models()
    stats = []
    for i, model in enumerate(models):
        try:
            stats.append(fit_suffstats(dataset, model))
        except ValueError as exc:
            raise ValueError(f"model {i} (columns {model}): {exc}") from exc
    log_ev = evidence_for_stats(stats, method, model_index_offset=0)
    return posterior_from_evidence(models, log_ev, space)


def evidence_for_stats(stats_list, method: PriorMethod, model_index_offset: int = 0):
    """Log evidence for a pre-fitted list of sufficient statistics.

    The Zellner-Siow rule is evaluated as one batched quadrature over the
    whole list; everything else is a closed form per model.
    """
    if method.kind == "zs":
        if not stats_list:
            return np.zeros(0)
        n, p0 = stats_list[0].n, stats_list[0].p0
        p_sizes = [s.p for s in stats_list]
        omr2 = [s.sse / s.total_ss if s.total_ss > 0 else 1.0 for s in stats_list]
        return zs_evidence_batch(n, p0, p_sizes, omr2, method.quadrature)
    out = np.empty(len(stats_list))
    for i, s in enumerate(stats_list):
        try:
            out[i] = log_evidence(s, method)
        except ValueError as exc:
            raise ValueError(f"model {i + model_index_offset}: {exc}") from exc
    return out


def hpm(posterior: ModelPosterior) -> tuple[int, ...]:
    """Highest probability model; exact ties go to the smaller model."""
    best = None
    best_prob = -1.0
    for model, prob in zip(posterior.models, posterior.posterior_prob):
        if prob > best_prob or (prob == best_prob and _model_order(model) < _model_order(best)):
            best, best_prob = model, prob
    return best


def inclusion_probs(posterior: ModelPosterior) -> np.ndarray:
    """Posterior probability that each candidate predictor is in the model."""
    p = posterior.space.size
    out = np.zeros(p)
    for model, prob in zip(posterior.models, posterior.posterior_prob):
        for j in model:
            out[j] += prob
    return out


def mpm(posterior: ModelPosterior) -> tuple[int, ...]:
    """Median probability model.

    All-subsets spaces: the model of predictors with inclusion probability
    at least one half.  Nested spaces: the largest size whose upper-tail
    posterior probability is at least one half.
    """
    if posterior.space.kind == "all_subsets":
        incl = inclusion_probs(posterior)
        return tuple(int(j) for j in np.nonzero(incl >= 0.5)[0])
    sizes = np.array([len(m) for m in posterior.models])
    order = np.argsort(sizes)
    tail = np.cumsum(posterior.posterior_prob[order][::-1])[::-1]
    chosen = sizes[order][0]
    for size, tail_prob in zip(sizes[order], tail):
        if tail_prob >= 0.5:
            chosen = size
    return tuple(range(int(chosen)))


def entropy(posterior: ModelPosterior) -> float:
    """Shannon entropy (nats) of the posterior over models."""
    p = posterior.posterior_prob
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())
