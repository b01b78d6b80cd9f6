"""synthcard: a seedable simulator of card transactions with fraud labels."""

__version__ = "0.1.0"
