"""Sample container and seeded split partitioning."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..core.rng import RngState
from ..core.types import Image, LabelMap, check_pair
from ..errors import InvalidInputError


@dataclass
class Sample:
    sample_id: str
    image: Image
    label: LabelMap | None = None

    def __post_init__(self):
        if self.label is not None:
            check_pair(self.image, self.label)


@dataclass
class SplitDataset:
    """Disjoint labeled / unlabeled / validation / test splits. Unlabeled
    samples carry no label."""

    labeled: list[Sample] = field(default_factory=list)
    unlabeled: list[Sample] = field(default_factory=list)
    validation: list[Sample] = field(default_factory=list)
    test: list[Sample] = field(default_factory=list)

    def __post_init__(self):
        ids = [s.sample_id for split in self.splits().values() for s in split]
        if len(ids) != len(set(ids)):
            raise InvalidInputError("sample ids must be unique across splits")
        for s in self.labeled + self.validation + self.test:
            if s.label is None:
                raise InvalidInputError(f"sample {s.sample_id} is missing its label")

    def splits(self) -> dict[str, list[Sample]]:
        return {
            "labeled": self.labeled,
            "unlabeled": self.unlabeled,
            "validation": self.validation,
            "test": self.test,
        }

    @property
    def n_labeled(self) -> int:
        return len(self.labeled)

    @property
    def n_unlabeled(self) -> int:
        return len(self.unlabeled)

    @property
    def num_classes(self) -> int:
        for s in self.labeled + self.validation + self.test:
            return s.label.num_classes
        raise InvalidInputError("dataset has no labeled samples to infer classes from")


def make_splits(
    samples: list[Sample], counts: tuple[int, int, int, int], rng: RngState
) -> SplitDataset:
    """Seeded shuffle, then partition into (labeled, unlabeled, validation,
    test) of the requested sizes; unlabeled samples are stripped of labels."""
    n_l, n_u, n_v, n_t = counts
    if min(counts) < 0:
        raise InvalidInputError(f"split counts must be nonnegative, got {counts}")
    if n_l + n_u + n_v + n_t > len(samples):
        raise InvalidInputError(
            f"requested {n_l + n_u + n_v + n_t} samples but only {len(samples)} available"
        )
    order = rng.permutation(len(samples))
    picked = [samples[i] for i in order]
    labeled = picked[:n_l]
    unlabeled = [
        Sample(s.sample_id, s.image, None) for s in picked[n_l : n_l + n_u]
    ]
    validation = picked[n_l + n_u : n_l + n_u + n_v]
    test = picked[n_l + n_u + n_v : n_l + n_u + n_v + n_t]
    return SplitDataset(labeled, unlabeled, validation, test)
