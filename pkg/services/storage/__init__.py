"""
Result persistence: CSV tables with embedded configuration, JSON manifests, plot scripts.
"""
from .result_writer import ResultWriter, read_embedded_config, read_table

__all__ = ['ResultWriter', 'read_embedded_config', 'read_table']
