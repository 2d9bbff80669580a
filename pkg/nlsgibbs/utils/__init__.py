"""Utility modules for nlsgibbs."""
