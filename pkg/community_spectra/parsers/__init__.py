"""Parsers for model configuration and graph files."""
