"""Test suite for forget_mi."""
