"""Syllable segmentation with lossless reconstruction.

A text is split into maximal runs of non-delimiter codepoints (the syllables)
plus the delimiter runs around them (separators), so that the original string
can always be rebuilt byte for byte. The delimiter set is configurable; the
default covers the Tibetan tsheg and shad marks plus ASCII space and newline,
but any token stream split on any delimiter set works the same way.
"""

from __future__ import annotations

from dataclasses import dataclass, field

TSHEG = "་"
SHAD = "།"
DOUBLE_SHAD = "༎"

DEFAULT_UNK_TOKEN = "<UNK>"


@dataclass(frozen=True)
class DelimiterPolicy:
    """Set of codepoints treated as syllable separators."""

    delimiters: frozenset[str] = frozenset({TSHEG, SHAD, DOUBLE_SHAD, " ", "\n"})

    def __post_init__(self) -> None:
        for ch in self.delimiters:
            if len(ch) != 1:
                raise ValueError(f"delimiter entries must be single codepoints, got {ch!r}")

    def is_delimiter(self, ch: str) -> bool:
        return ch in self.delimiters

    def contains_delimiter(self, token: str) -> bool:
        return any(ch in self.delimiters for ch in token)


DEFAULT_POLICY = DelimiterPolicy()


@dataclass(frozen=True)
class SyllableSequence:
    """An immutable segmented text: n syllables plus n+1 separator runs.

    ``separators[0]`` is the (possibly empty) prefix before the first
    syllable, ``separators[i]`` the run following syllable i. Positions in
    the public API are 1-based, matching the substitution records emitted
    by the attack engine.
    """

    syllables: tuple[str, ...]
    separators: tuple[str, ...]
    policy: DelimiterPolicy = field(default=DEFAULT_POLICY, compare=False)

    def __post_init__(self) -> None:
        if len(self.separators) != len(self.syllables) + 1:
            raise ValueError(
                f"need {len(self.syllables) + 1} separators for "
                f"{len(self.syllables)} syllables, got {len(self.separators)}"
            )
        for syl in self.syllables:
            if not syl:
                raise ValueError("empty syllable token")
            if self.policy.contains_delimiter(syl):
                raise ValueError(f"syllable {syl!r} contains a delimiter codepoint")
        for sep in self.separators:
            for ch in sep:
                if not self.policy.is_delimiter(ch):
                    raise ValueError(f"separator run {sep!r} contains non-delimiter {ch!r}")

    @property
    def n(self) -> int:
        return len(self.syllables)

    def __len__(self) -> int:
        return len(self.syllables)


def segment(text: str, policy: DelimiterPolicy = DEFAULT_POLICY) -> SyllableSequence:
    """Split ``text`` into syllables and separator runs under ``policy``.

    Empty input yields n == 0 with a single empty separator slot.
    """
    syllables: list[str] = []
    separators: list[str] = []
    current = []
    in_delim = True  # the prefix separator comes first, even when empty
    sep_current: list[str] = []
    for ch in text:
        if policy.is_delimiter(ch):
            if not in_delim:
                syllables.append("".join(current))
                current = []
                sep_current = []
                in_delim = True
            sep_current.append(ch)
        else:
            if in_delim:
                separators.append("".join(sep_current))
                sep_current = []
                in_delim = False
            current.append(ch)
    if in_delim:
        separators.append("".join(sep_current))
    else:
        syllables.append("".join(current))
        separators.append("")
    return SyllableSequence(tuple(syllables), tuple(separators), policy)


def substitute(seq: SyllableSequence, position: int, replacement: str) -> SyllableSequence:
    """Return a new sequence with the syllable at 1-based ``position`` replaced."""
    if not 1 <= position <= seq.n:
        raise IndexError(f"position {position} out of range 1..{seq.n}")
    if not replacement:
        raise ValueError("replacement token must be non-empty")
    if seq.policy.contains_delimiter(replacement):
        raise ValueError(f"replacement {replacement!r} contains a delimiter codepoint")
    syllables = list(seq.syllables)
    syllables[position - 1] = replacement
    return SyllableSequence(tuple(syllables), seq.separators, seq.policy)


def mask(seq: SyllableSequence, position: int, unk_token: str = DEFAULT_UNK_TOKEN) -> SyllableSequence:
    """Replace the syllable at ``position`` with the out-of-vocabulary marker."""
    return substitute(seq, position, unk_token)


def reconstruct(seq: SyllableSequence) -> str:
    """Interleave separators and syllables back into the original string."""
    parts = [seq.separators[0]]
    for syl, sep in zip(seq.syllables, seq.separators[1:]):
        parts.append(syl)
        parts.append(sep)
    return "".join(parts)
