import logging
from typing import Any, Dict, List, Optional
from datetime import datetime
import pytz

logger = logging.getLogger(__name__)


class RunReportFormatter:
    @staticmethod
    def _format_value(value: Any) -> str:
        if isinstance(value, float):
            return f"{value:.6g}"
        return str(value)

    @staticmethod
    def format_run_report(
        experiment: str,
        label: str,
        metrics: Dict[str, Any],
        files: Optional[List[str]] = None,
        wall_time: Optional[float] = None,
    ) -> str:
        """
        Format the human-readable summary of a finished run

        Args:
            experiment: Experiment kind (g2tau, pulsed, sweep, validate, scan-truncation)
            label: Run label
            metrics: Flat mapping of headline numbers
            files: Optional names of the files written
            wall_time: Optional wall time in seconds

        Returns:
            str: Formatted report
        """
        try:
            message = [
                f"RUN COMPLETE: {experiment}",
                "---------------------------------------------------",
                "",
                f"Label: {label}",
                "",
            ]
            for key, value in metrics.items():
                message.append(f"  {key:<28} {RunReportFormatter._format_value(value)}")

            if wall_time is not None:
                message.append(f"\nWall time: {wall_time:.2f}s")

            if files:
                message.append("\nFiles:")
                message.extend(f"  {name}" for name in files)

            utc_now = datetime.now(pytz.utc)
            message.append(f"\n{utc_now.strftime('%H:%M:%S UTC · %d %b %y')}")
            return "\n".join(message)

        except Exception as e:
            logger.error(f"Error formatting run report: {str(e)}")
            return f"{experiment}: {label}"
