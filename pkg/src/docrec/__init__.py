"""docrec: decoding, metrics, layout grammar, attention kernels and synthetic
documents for handwritten text and document recognition."""

from .tokens import BLANK_SYMBOL, EOT, SOT, TokenDictionary

__version__ = "0.1.0"

__all__ = ["BLANK_SYMBOL", "EOT", "SOT", "TokenDictionary", "__version__"]
