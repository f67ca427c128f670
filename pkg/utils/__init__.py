"""Logging setup and on-disk persistence for the registry."""
