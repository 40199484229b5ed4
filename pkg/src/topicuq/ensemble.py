"""Topic-model ensembles: repeated runs that expose modeling uncertainty.

Two generation regimes:

* ``sampling``: every member shares one hyperparameter configuration and
  differs only in the RNG seed, exposing run-to-run (sampling) variance.
* ``vary_alpha`` / ``vary_beta`` / ``vary_k``: exactly one hyperparameter
  sweeps over an ordered value list, exposing model variance for that
  parameter.

Built-in presets E1/E3/E4/E5 mirror the standard experiment grid; E2
(external hyperparameter optimization) cannot be generated here and exists
only as an import target.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterator, Optional, Sequence

import numpy as np

from .corpus import DocTermMatrix, Vocabulary
from .lda import LdaConfig, TopicModel, train

__all__ = [
    "MODES",
    "TopicRef",
    "EnsembleSpec",
    "Ensemble",
    "generate",
    "preset",
    "PRESET_NAMES",
]

MODES = ("sampling", "vary_alpha", "vary_beta", "vary_k")
PRESET_NAMES = ("E1", "E3", "E4", "E5")


@dataclass(frozen=True, order=True)
class TopicRef:
    """(member index, topic index) address of one topic in an ensemble."""

    model_index: int
    topic_index: int


@dataclass(frozen=True)
class EnsembleSpec:
    """Recipe for generating an ensemble.

    ``parameter_values`` is required for the vary_* modes: one strictly
    increasing value per member, substituted into that member's config.
    Member i trains with seed ``base_seed + i`` unless ``pin_seed`` holds
    every member to ``base_seed``.
    """

    mode: str
    base_config: LdaConfig
    members: int
    parameter_values: Optional[tuple] = None
    base_seed: int = 0
    pin_seed: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}, expected one of {MODES}")
        if self.members < 2:
            raise ValueError(f"an ensemble needs >= 2 members, got {self.members}")
        if self.mode == "sampling":
            if self.parameter_values is not None:
                raise ValueError("sampling mode takes no parameter_values")
        else:
            if self.parameter_values is None:
                raise ValueError(f"{self.mode} mode requires parameter_values")
            values = tuple(self.parameter_values)
            object.__setattr__(self, "parameter_values", values)
            if len(values) != self.members:
                raise ValueError(
                    f"parameter_values has {len(values)} entries "
                    f"for {self.members} members"
                )
            if any(b <= a for a, b in zip(values, values[1:])):
                raise ValueError("parameter_values must be strictly increasing")

    def member_config(self, i: int) -> LdaConfig:
        if not 0 <= i < self.members:
            raise IndexError(f"member index {i} out of range")
        seed = self.base_seed if self.pin_seed else self.base_seed + i
        base = replace(self.base_config, seed=seed)
        if self.mode == "sampling":
            return base
        value = self.parameter_values[i]
        if self.mode == "vary_alpha":
            return replace(base, alpha=float(value))
        if self.mode == "vary_beta":
            return replace(base, beta=float(value))
        # vary_k: alpha is a multiple of 1/k, so the base's alpha * k product
        # (5 for the default) tracks the member's own topic count.
        alpha_multiple = self.base_config.alpha * self.base_config.k
        return replace(base, k=int(value), alpha=alpha_multiple / int(value))


@dataclass
class Ensemble:
    """Ordered topic models over one shared vocabulary.

    ``spec`` is None for ensembles imported from external tool output;
    ``import_info`` then records per-member provenance (source files and the
    smoothing baseline applied to absent terms).
    """

    members: list[TopicModel]
    spec: Optional[EnsembleSpec]
    vocabulary: Vocabulary
    doc_ids: Optional[list[str]] = None
    import_info: Optional[dict] = None

    def __post_init__(self):
        if len(self.members) < 2:
            raise ValueError("an ensemble needs >= 2 members")
        n_terms = len(self.vocabulary)
        for m in self.members:
            if m.n_terms != n_terms:
                raise ValueError(
                    f"member {m.model_id} has {m.n_terms} terms, vocabulary has {n_terms}"
                )
        if self.spec is not None and self.spec.members != len(self.members):
            raise ValueError("member count does not match the spec")

    @property
    def total_topics(self) -> int:
        return sum(m.k for m in self.members)

    def model_sizes(self) -> list[int]:
        return [m.k for m in self.members]

    def topic_refs(self) -> Iterator[TopicRef]:
        for l, m in enumerate(self.members):
            for j in range(m.k):
                yield TopicRef(model_index=l, topic_index=j)

    def contains(self, ref: TopicRef) -> bool:
        return (
            0 <= ref.model_index < len(self.members)
            and 0 <= ref.topic_index < self.members[ref.model_index].k
        )

    def phi_of(self, ref: TopicRef) -> np.ndarray:
        if not self.contains(ref):
            raise KeyError(f"unknown topic {ref}")
        return self.members[ref.model_index].phi[ref.topic_index]

    @property
    def has_theta(self) -> bool:
        return all(m.theta is not None for m in self.members)


def generate(matrix: DocTermMatrix, spec: EnsembleSpec, vocabulary: Vocabulary,
             n_jobs: int = 1) -> Ensemble:
    """Train all ensemble members from one document-term matrix.

    Deterministic given (matrix, spec); members are independent and train in
    parallel when ``n_jobs`` > 1.
    """
    if matrix.n_terms != len(vocabulary):
        raise ValueError("matrix column count does not match the vocabulary")
    configs = [spec.member_config(i) for i in range(spec.members)]
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            models = list(
                pool.map(lambda ic: train(matrix, ic[1], model_id=ic[0]),
                         enumerate(configs))
            )
    else:
        models = [train(matrix, cfg, model_id=i) for i, cfg in enumerate(configs)]
    return Ensemble(members=models, spec=spec, vocabulary=vocabulary,
                    doc_ids=list(matrix.doc_ids))


def preset(name: str, *, k: int = 20, members: int = 10,
           iterations: int = 10_000, base_seed: int = 0,
           k_range: Sequence[int] = (20, 50), pin_seed: bool = False) -> EnsembleSpec:
    """Built-in ensemble recipes.

    E1: sampling mode, shared (k, alpha=5/k, beta=0.01).
    E3: alpha sweep, log-spaced over [0.5/k, 20/k].
    E4: beta sweep, linear over [0.01, 0.23].
    E5: topic-count sweep, round(linspace) over ``k_range``.

    E2 denotes ensembles produced by an external tool's hyperparameter
    optimizer; it cannot be generated and must be imported instead.
    """
    base = LdaConfig(k=k, iterations=iterations, seed=base_seed)
    if name == "E1":
        return EnsembleSpec(mode="sampling", base_config=base, members=members,
                            base_seed=base_seed, pin_seed=pin_seed)
    if name == "E2":
        raise ValueError(
            "E2 (external hyperparameter optimization) cannot be generated; "
            "import its output with import_mallet instead"
        )
    if name == "E3":
        values = tuple(float(v) for v in np.geomspace(0.5 / k, 20.0 / k, members))
        return EnsembleSpec(mode="vary_alpha", base_config=base, members=members,
                            parameter_values=values, base_seed=base_seed,
                            pin_seed=pin_seed)
    if name == "E4":
        values = tuple(float(v) for v in np.linspace(0.01, 0.23, members))
        return EnsembleSpec(mode="vary_beta", base_config=base, members=members,
                            parameter_values=values, base_seed=base_seed,
                            pin_seed=pin_seed)
    if name == "E5":
        lo, hi = k_range
        values = tuple(int(v) for v in np.round(np.linspace(lo, hi, members)))
        return EnsembleSpec(mode="vary_k", base_config=base, members=members,
                            parameter_values=values, base_seed=base_seed,
                            pin_seed=pin_seed)
    raise ValueError(f"unknown preset {name!r}; generatable presets: {PRESET_NAMES}")
