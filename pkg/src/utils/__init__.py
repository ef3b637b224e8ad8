"""Shared utilities: seeding, logging, file I/O and fuzzy key matching."""
