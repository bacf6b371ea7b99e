"""Edit-distance alignment and word/character error rates.

Counts come from a minimum-edit alignment with unit costs. The error rate
is (substitutions + deletions + insertions) / (substitutions + deletions +
correct), i.e. errors over reference length; it can exceed 1 when the
hypothesis is much longer than the reference.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


class EmptyReferenceError(ValueError):
    """Raised when an error rate is requested against an empty reference."""


@dataclass(frozen=True, slots=True)
class EditCounts:
    """Substitution/deletion/insertion/correct counts from one alignment."""

    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    correct: int = 0

    def __post_init__(self) -> None:
        if min(self.substitutions, self.deletions, self.insertions, self.correct) < 0:
            raise ValueError("edit counts must be non-negative")

    @property
    def reference_length(self) -> int:
        return self.substitutions + self.deletions + self.correct

    @property
    def hypothesis_length(self) -> int:
        return self.substitutions + self.insertions + self.correct

    @property
    def distance(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    def __add__(self, other: "EditCounts") -> "EditCounts":
        return EditCounts(
            self.substitutions + other.substitutions,
            self.deletions + other.deletions,
            self.insertions + other.insertions,
            self.correct + other.correct,
        )


def align_tokens(ref: Sequence, hyp: Sequence) -> EditCounts:
    """Minimum-edit-distance alignment of two token sequences.

    Among minimal alignments, the backtrace resolves ties preferring
    correct > substitution > deletion > insertion at each step, so the
    returned counts are deterministic.
    """
    n, m = len(ref), len(hyp)
    # dp[i][j] = edit distance between ref[:i] and hyp[:j]
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dp[i][0] = i
    for j in range(1, m + 1):
        dp[0][j] = j
    for i in range(1, n + 1):
        row, prev = dp[i], dp[i - 1]
        ri = ref[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (0 if ri == hyp[j - 1] else 1)
            dele = prev[j] + 1
            ins = row[j - 1] + 1
            row[j] = min(sub, dele, ins)

    subs = dels = inss = corr = 0
    i, j = n, m
    while i > 0 or j > 0:
        here = dp[i][j]
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and dp[i - 1][j - 1] == here:
            corr += 1
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and dp[i - 1][j - 1] + 1 == here:
            subs += 1
            i, j = i - 1, j - 1
        elif i > 0 and dp[i - 1][j] + 1 == here:
            dels += 1
            i -= 1
        else:
            inss += 1
            j -= 1
    return EditCounts(subs, dels, inss, corr)


def wer(counts: EditCounts) -> float:
    """Word error rate from edit counts: errors over reference length."""
    if counts.reference_length == 0:
        raise EmptyReferenceError("cannot compute an error rate against an empty reference")
    return counts.distance / counts.reference_length


def word_error_rate(ref: str, hyp: str) -> float:
    """Convenience: align on whitespace tokens and apply :func:`wer`."""
    return wer(align_tokens(ref.split(), hyp.split()))


def cer(ref: str, hyp: str) -> float:
    """Character error rate: the same measure over character tokens.

    Spaces count as tokens.
    """
    if not ref:
        raise EmptyReferenceError("cannot compute CER against an empty reference")
    return wer(align_tokens(list(ref), list(hyp)))


def pooled_wer(pairs: Sequence[tuple[str, str]]) -> float:
    """Micro-averaged error rate: pool counts across (ref, hyp) pairs, then
    apply the rate formula once."""
    total = EditCounts()
    for ref, hyp in pairs:
        total = total + align_tokens(ref.split(), hyp.split())
    return wer(total)
