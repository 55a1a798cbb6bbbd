"""
Human-readable run summaries.
"""
from .run_report_formatter import RunReportFormatter

__all__ = ['RunReportFormatter']
