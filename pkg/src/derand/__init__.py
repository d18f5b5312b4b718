"""Seeded extractors, condensers and the codes, wiretap schemes and group tests built from them."""

__version__ = "0.1.0"
