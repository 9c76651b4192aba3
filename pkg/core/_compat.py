"""Backports of Python 3.11 stdlib names used by this package (for Python 3.10)."""

from datetime import timezone
from enum import Enum

try:
    from enum import StrEnum
except ImportError:  # Python < 3.11

    class StrEnum(str, Enum):  # type: ignore[no-redef]
        """Equivalent of Python 3.11 ``enum.StrEnum``."""

        __str__ = str.__str__
        __format__ = str.__format__  # type: ignore[assignment]

        @staticmethod
        def _generate_next_value_(name: str, start: int, count: int, last_values: list) -> str:
            return name.lower()


try:
    from datetime import UTC
except ImportError:  # Python < 3.11
    UTC = timezone.utc  # type: ignore[misc]

__all__ = ["UTC", "StrEnum"]
