"""Phrase-based Sinhala/Tamil-English translation with augmented bilingual lists."""

__version__ = "0.1.0"
