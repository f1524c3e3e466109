"""
Event type definitions for the telemetry bus.
"""
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Dict, Optional


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


class EventType(str, Enum):
    """Event types for the telemetry bus."""

    # Training events
    TRAINING_STARTED = "training:started"
    EPOCH_COMPLETED = "epoch:completed"
    TRAINING_COMPLETED = "training:completed"
    TRAINING_ABORTED = "training:aborted"

    # Pruning events
    PRUNE_ROUND_COMPLETED = "prune:round_completed"


class Event:
    """
    Base event class.

    Contains common event data and helper methods.
    """

    def __init__(
        self,
        event_type: EventType,
        data: Dict[str, Any],
        timestamp: Optional[datetime] = None
    ):
        self.event_type = event_type
        self.data = data
        self.timestamp = timestamp or utc_now()

    def to_dict(self) -> Dict[str, Any]:
        """
        Convert event to dictionary.

        Returns:
            Dict: Event data
        """
        return {
            "event_type": self.event_type.value,
            "data": self.data,
            "timestamp": self.timestamp.isoformat()
        }
