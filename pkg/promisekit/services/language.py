# promisekit/services/language.py
"""Vocabularies, body vectors and translation matrices between agent languages.

Classification uses exact rational arithmetic so that results never depend on floating
point rounding.
"""
import logging
from collections import Counter
from enum import Enum
from fractions import Fraction
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from promisekit.errors import ShapeMismatch, VocabMismatch

logger = logging.getLogger(__name__)


class Vocabulary(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str = Field(min_length=1)
    symbols: Tuple[str, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _distinct(self):
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError(f"vocabulary {self.id!r} repeats a symbol")
        return self

    @property
    def dimension(self) -> int:
        return len(self.symbols)

    def vector(self, words: Iterable[str]) -> "BodyVector":
        """Count word multiplicities into a BodyVector."""
        counts = Counter(words)
        unknown = set(counts) - set(self.symbols)
        if unknown:
            raise VocabMismatch(f"{sorted(unknown)} are not words of vocabulary {self.id!r}")
        return BodyVector(vocab=self.id, coeffs=tuple(counts.get(s, 0) for s in self.symbols))

    def words(self, v: "BodyVector") -> List[str]:
        """Expand a vector back into words, each repeated by its coefficient."""
        if v.vocab != self.id:
            raise VocabMismatch(f"vector is in {v.vocab!r}, not {self.id!r}")
        return [s for s, c in zip(self.symbols, v.coeffs) for _ in range(c)]


class BodyVector(BaseModel):
    model_config = ConfigDict(frozen=True)

    vocab: str
    coeffs: Tuple[int, ...]

    @model_validator(mode="after")
    def _nonnegative(self):
        if any(c < 0 for c in self.coeffs):
            raise ValueError("body coefficients are word multiplicities and cannot be negative")
        return self

    def __add__(self, other: "BodyVector") -> "BodyVector":
        if other.vocab != self.vocab or len(other.coeffs) != len(self.coeffs):
            raise VocabMismatch(f"cannot add vectors of {self.vocab!r} and {other.vocab!r}")
        return BodyVector(vocab=self.vocab, coeffs=tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))


class TranslationMatrix(BaseModel):
    """Rows index the target vocabulary, columns the source vocabulary."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    from_vocab: str
    to_vocab: str
    entries: Tuple[Tuple[int, ...], ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _rectangular(self):
        widths = {len(row) for row in self.entries}
        if len(widths) != 1 or 0 in widths:
            raise ValueError("translation matrix rows must be nonempty and of equal length")
        if any(x < 0 for row in self.entries for x in row):
            raise ValueError("translation matrix entries cannot be negative")
        return self

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.entries), len(self.entries[0])

    def array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=np.int64)

    def check_vocabularies(self, source: Vocabulary, target: Vocabulary) -> None:
        if (source.id, target.id) != (self.from_vocab, self.to_vocab):
            raise VocabMismatch(
                f"matrix maps {self.from_vocab}->{self.to_vocab}, not {source.id}->{target.id}"
            )
        if self.shape != (target.dimension, source.dimension):
            raise ShapeMismatch(
                f"matrix {self.from_vocab}->{self.to_vocab} is {self.shape}, "
                f"vocabularies need {(target.dimension, source.dimension)}"
            )

    @classmethod
    def identity(cls, vocab: str, n: int, to_vocab: Optional[str] = None) -> "TranslationMatrix":
        rows = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
        return cls(from_vocab=vocab, to_vocab=to_vocab or vocab, entries=rows)

    @classmethod
    def from_array(cls, from_vocab: str, to_vocab: str, a) -> "TranslationMatrix":
        return cls(from_vocab=from_vocab, to_vocab=to_vocab, entries=tuple(tuple(int(x) for x in row) for row in a))


class TranslationClass(str, Enum):
    BIJECTIVE = "Bijective"
    ONE_WAY = "OneWay"
    LOSSY = "Lossy"


def translate(v: BodyVector, L: TranslationMatrix) -> BodyVector:
    if v.vocab != L.from_vocab:
        raise VocabMismatch(f"vector is in {v.vocab!r} but the matrix translates from {L.from_vocab!r}")
    rows, cols = L.shape
    if len(v.coeffs) != cols:
        raise VocabMismatch(f"vector has {len(v.coeffs)} coefficients, matrix expects {cols}")
    out = L.array() @ np.asarray(v.coeffs, dtype=np.int64)
    return BodyVector(vocab=L.to_vocab, coeffs=tuple(int(x) for x in out))


def _echelon(rows: Sequence[Sequence[Fraction]]) -> List[List[Fraction]]:
    m = [list(r) for r in rows]
    n_rows, n_cols = len(m), len(m[0])
    pivot_row = 0
    for col in range(n_cols):
        pivot = next((r for r in range(pivot_row, n_rows) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[pivot_row], m[pivot] = m[pivot], m[pivot_row]
        lead = m[pivot_row][col]
        m[pivot_row] = [x / lead for x in m[pivot_row]]
        for r in range(n_rows):
            if r != pivot_row and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [x - factor * y for x, y in zip(m[r], m[pivot_row])]
        pivot_row += 1
        if pivot_row == n_rows:
            break
    return m


def rank(L: TranslationMatrix) -> int:
    """Exact rank over the rationals."""
    reduced = _echelon([[Fraction(x) for x in row] for row in L.entries])
    return sum(1 for row in reduced if any(x != 0 for x in row))


def _rational_inverse(L: TranslationMatrix) -> Optional[List[List[Fraction]]]:
    n, m = L.shape
    if n != m:
        return None
    augmented = [
        [Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
        for i, row in enumerate(L.entries)
    ]
    reduced = _echelon(augmented)
    left = [row[:n] for row in reduced]
    if any(left[i][j] != int(i == j) for i in range(n) for j in range(n)):
        return None
    return [row[n:] for row in reduced]


def classify(L: TranslationMatrix) -> TranslationClass:
    """Bijective when an integer two-sided inverse exists; OneWay at full row or column rank."""
    rows, cols = L.shape
    r = rank(L)
    inverse = _rational_inverse(L) if rows == cols == r else None
    if inverse is not None and all(x.denominator == 1 for row in inverse for x in row):
        return TranslationClass.BIJECTIVE
    if r == rows or r == cols:
        return TranslationClass.ONE_WAY
    return TranslationClass.LOSSY


def unitarity_check(Lab: TranslationMatrix, Lba: TranslationMatrix) -> bool:
    """True iff translating a->b->a is the identity on vocabulary a."""
    if Lab.to_vocab != Lba.from_vocab or Lab.from_vocab != Lba.to_vocab:
        raise ShapeMismatch(
            f"{Lab.from_vocab}->{Lab.to_vocab} does not compose with {Lba.from_vocab}->{Lba.to_vocab}"
        )
    (b_rows, a_cols), (a_rows, b_cols) = Lab.shape, Lba.shape
    if b_rows != b_cols or a_rows != a_cols:
        raise ShapeMismatch(f"shapes {Lab.shape} and {Lba.shape} do not compose")
    product = Lba.array() @ Lab.array()
    return bool(np.array_equal(product, np.eye(a_cols, dtype=np.int64)))


def round_trip(v: BodyVector, Lab: TranslationMatrix, Lba: TranslationMatrix) -> BodyVector:
    return translate(translate(v, Lab), Lba)


def colanguage(a: Vocabulary, b: Vocabulary) -> FrozenSet[str]:
    """Words both agents can use literally."""
    return frozenset(a.symbols) & frozenset(b.symbols)
