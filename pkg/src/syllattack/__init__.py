"""Black-box syllable-substitution adversarial attack engine."""

__version__ = "0.1.0"

from .segmentation import (
    DEFAULT_POLICY,
    DEFAULT_UNK_TOKEN,
    DelimiterPolicy,
    SyllableSequence,
    mask,
    reconstruct,
    segment,
    substitute,
)

__all__ = [
    "DEFAULT_POLICY",
    "DEFAULT_UNK_TOKEN",
    "DelimiterPolicy",
    "SyllableSequence",
    "mask",
    "reconstruct",
    "segment",
    "substitute",
    "__version__",
]
