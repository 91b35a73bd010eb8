"""Synthetic labeled product-name corpus for desk-scale experiments.

Names are assembled from templates: one or two keywords drawn (Zipf-weighted) from a pool
unique to the category, optionally a descriptor, a brand, a pack size and a
generic filler word. Descriptors, sizes and fillers are shared by every
category; each brand has a home category and is drawn from it with
probability ``brand_affinity``, otherwise from the whole brand list. With
probability ``noise_rate`` a name also receives one keyword that belongs to
a different category, which makes it ambiguous. Class sizes follow a
geometric profile whose largest/smallest ratio is ``imbalance``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError

CATEGORIES = (
    "bread_cereals", "meat", "fish_seafood", "milk_cheese_eggs", "oils_fats", "fruit", "vegetables",
    "sugar_confectionery", "other_food", "coffee_tea_cocoa", "water_soft_drinks", "spirits", "wine",
    "beer", "tobacco",
)

_ONSETS = ("b", "c", "d", "f", "g", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "cr", "dr", "fl",
           "gr", "pl", "pr", "st", "tr", "ș", "ț")
_VOWELS = ("a", "e", "i", "o", "u", "ă", "â", "ea", "ia", "oa")
_DESCRIPTORS = ("bio", "extra", "premium", "clasic", "natural", "proaspat", "light", "traditional",
                "family", "mini", "maxi", "eco")
_FILLERS = ("pachet", "oferta", "promo", "cutie", "set", "nou", "import", "local")
_UNITS = ("g", "kg", "ml", "l", "buc")
_SIZES = {"g": (50, 100, 150, 200, 250, 400, 500, 750), "kg": (1, 2, 5), "ml": (200, 250, 330, 500, 750),
          "l": (1, 2, 5), "buc": (6, 10, 12, 20)}


@dataclass(frozen=True)
class CorpusSpec:
    classes: int = 15
    size: int = 2500
    seed: int = 0
    noise_rate: float = 0.05
    imbalance: float = 3.0
    keywords_per_class: int = 12
    n_brands: int = 45
    brand_affinity: float = 0.8
    zipf: float = 1.0
    name_seed: int | None = None  # resample names over the same lexicon

    def validate(self) -> "CorpusSpec":
        if self.classes < 2:
            raise ConfigError("classes must be >= 2")
        if self.size < self.classes:
            raise ConfigError("size must be >= classes")
        if not 0.0 <= self.noise_rate <= 1.0:
            raise ConfigError("noise_rate must lie in [0, 1]")
        if self.zipf < 0.0:
            raise ConfigError("zipf must be >= 0")
        if not 0.0 <= self.brand_affinity <= 1.0:
            raise ConfigError("brand_affinity must lie in [0, 1]")
        if self.imbalance < 1.0:
            raise ConfigError("imbalance must be >= 1")
        if self.keywords_per_class < 1 or self.n_brands < 1:
            raise ConfigError("keywords_per_class and n_brands must be >= 1")
        return self


def class_sizes(size: int, classes: int, imbalance: float) -> np.ndarray:
    """Records per class: geometric shares rounded by the largest-remainder rule.

    Class 0 is the largest; remainders are handed out by decreasing fractional
    part, lower class index first on ties. Every class gets at least one record.
    """
    shares = imbalance ** (-np.arange(classes) / max(classes - 1, 1))
    quota = size * shares / shares.sum()
    counts = np.floor(quota).astype(np.int64)
    frac = quota - counts
    order = np.lexsort((np.arange(classes), -frac))
    counts[order[: size - counts.sum()]] += 1
    while counts.min() < 1:
        counts[np.argmin(counts)] += 1
        # take from the last of the largest classes so sizes stay non-increasing
        counts[classes - 1 - np.argmax(counts[::-1])] -= 1
    return counts


def _pseudo_words(rng: np.random.Generator, n: int, taken: set[str]) -> list[str]:
    out = []
    while len(out) < n:
        syl = rng.integers(2, 4)
        w = "".join(_ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))] for _ in range(syl))
        if w not in taken:
            taken.add(w)
            out.append(w)
    return out


def category_labels(classes: int) -> list[str]:
    if classes <= len(CATEGORIES):
        return list(CATEGORIES[:classes])
    return list(CATEGORIES) + [f"category_{i:02d}" for i in range(len(CATEGORIES), classes)]


@dataclass
class Lexicon:
    labels: list[str]
    keywords: list[list[str]]
    brands: list[str]


def _zipf_weights(n: int, s: float) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** s
    return w / w.sum()


def build_lexicon(spec: CorpusSpec) -> Lexicon:
    rng = np.random.default_rng([spec.seed, 0])
    taken = set(_DESCRIPTORS) | set(_FILLERS)
    keywords = [_pseudo_words(rng, spec.keywords_per_class, taken) for _ in range(spec.classes)]
    brands = [w.capitalize() for w in _pseudo_words(rng, spec.n_brands, taken)]
    return Lexicon(category_labels(spec.classes), keywords, brands)


def generate_records(spec: CorpusSpec) -> list[tuple[str, str]]:
    """(name, label) pairs in shuffled order, deterministic per seed."""
    spec.validate()
    lex = build_lexicon(spec)
    rng = np.random.default_rng([spec.seed if spec.name_seed is None else spec.name_seed, 1])
    sizes = class_sizes(spec.size, spec.classes, spec.imbalance)
    kw_p = _zipf_weights(spec.keywords_per_class, spec.zipf)
    rows = []
    for c, count in enumerate(sizes):
        pool = lex.keywords[c]
        for _ in range(count):
            n_kw = 1 + int(rng.random() < 0.6)
            words = [pool[i] for i in rng.choice(len(pool), size=n_kw, replace=False, p=kw_p)]
            if rng.random() < spec.noise_rate:
                other = (c + 1 + rng.integers(spec.classes - 1)) % spec.classes
                words.insert(int(rng.integers(len(words) + 1)), lex.keywords[other][rng.choice(len(pool), p=kw_p)])
            if rng.random() < 0.5:
                words.append(_DESCRIPTORS[rng.integers(len(_DESCRIPTORS))])
            if rng.random() < 0.8:
                own = lex.brands[c :: spec.classes]
                if own and rng.random() < spec.brand_affinity:
                    brand = own[rng.integers(len(own))]
                else:
                    brand = lex.brands[rng.integers(len(lex.brands))]
                words.insert(0, brand)
            if rng.random() < 0.3:
                words.append(_FILLERS[rng.integers(len(_FILLERS))])
            if rng.random() < 0.9:
                unit = _UNITS[rng.integers(len(_UNITS))]
                amount = _SIZES[unit][rng.integers(len(_SIZES[unit]))]
                words.append(f"{amount}{unit}")
            rows.append((" ".join(words), lex.labels[c]))
    order = rng.permutation(len(rows))
    return [rows[i] for i in order]


def corpus_csv(spec: CorpusSpec) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "category"])
    w.writerows(generate_records(spec))
    return buf.getvalue()


def generate_corpus(spec: CorpusSpec, path: str | Path) -> Path:
    """Write the corpus as UTF-8 CSV with header ``name,category`` (atomically)."""
    from .pipeline import atomic_write_text

    path = Path(path)
    atomic_write_text(path, corpus_csv(spec))
    return path
