"""Completion of incomplete pairwise comparison matrices."""
