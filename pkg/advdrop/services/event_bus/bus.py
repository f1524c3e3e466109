"""
Synchronous event bus used to fan telemetry out of the training loop.

Subscribers are called in subscription order on the publishing thread.
A failing subscriber is logged and recorded but never interrupts the
publisher or the remaining subscribers.
"""
import logging
import threading
from typing import Any, Callable, Dict, List, Optional, Set, Tuple

from advdrop.services.event_bus.events import Event, EventType, utc_now

logger = logging.getLogger("advdrop.eventbus")


class EventBus:
    """Event bus for in-process telemetry."""

    def __init__(self):
        self._subscribers: Dict[str, List[Tuple[str, Callable]]] = {}
        self._subscriber_ids: Dict[str, Set[str]] = {}
        self._lock = threading.Lock()
        self._event_history: List[Dict[str, Any]] = []
        self._max_history = 100
        self._failed_deliveries: Dict[str, List[Dict[str, Any]]] = {}

    def publish(self, event_type: EventType, data: Dict[str, Any]) -> bool:
        """
        Publish an event to subscribers.

        Args:
            event_type: Type of event
            data: Event payload, passed to subscribers unchanged

        Returns:
            bool: True if every subscriber handled the event
        """
        key = EventType(event_type).value
        with self._lock:
            subscribers = list(self._subscribers.get(key, []))

        event = Event(EventType(key), data)
        if len(self._event_history) >= self._max_history:
            self._event_history.pop(0)
        self._event_history.append(event.to_dict())

        if not subscribers:
            logger.debug(f"No subscribers for event: {key}")
            return True

        all_successful = True
        for subscriber_id, callback in subscribers:
            try:
                callback(data)
            except Exception as e:
                logger.error(f"Error in subscriber {subscriber_id} for {key}: {e}", exc_info=True)
                failures = self._failed_deliveries.setdefault(subscriber_id, [])
                failures.append({
                    "event_type": key,
                    "error": str(e),
                    "timestamp": utc_now().isoformat(),
                })
                if len(failures) > self._max_history:
                    failures.pop(0)
                all_successful = False

        return all_successful

    def subscribe(
        self,
        event_type: EventType,
        callback: Callable[[Dict[str, Any]], None],
        subscriber_id: Optional[str] = None
    ) -> str:
        """
        Subscribe to an event type.

        Args:
            event_type: Event type to subscribe to
            callback: Function to call with the event payload
            subscriber_id: Optional subscriber ID; re-subscribing an ID replaces its callback

        Returns:
            str: Subscriber ID
        """
        key = EventType(event_type).value
        if subscriber_id is None:
            subscriber_id = f"{callback.__module__}.{getattr(callback, '__name__', 'callback')}_{id(callback):x}"

        with self._lock:
            subs = self._subscribers.setdefault(key, [])
            ids = self._subscriber_ids.setdefault(key, set())
            if subscriber_id not in ids:
                subs.append((subscriber_id, callback))
                ids.add(subscriber_id)
                logger.debug(f"Subscribed to {key}: {subscriber_id}")
            else:
                for i, (sid, _) in enumerate(subs):
                    if sid == subscriber_id:
                        subs[i] = (subscriber_id, callback)
                        break
        return subscriber_id

    def unsubscribe(self, event_type: EventType, subscriber_id: str) -> bool:
        """
        Unsubscribe from an event type.

        Returns:
            bool: True if unsubscribed, False if not found
        """
        key = EventType(event_type).value
        with self._lock:
            if subscriber_id not in self._subscriber_ids.get(key, set()):
                return False
            self._subscribers[key] = [
                (sid, cb) for sid, cb in self._subscribers[key] if sid != subscriber_id
            ]
            self._subscriber_ids[key].remove(subscriber_id)
            self._failed_deliveries.pop(subscriber_id, None)
        logger.debug(f"Unsubscribed from {key}: {subscriber_id}")
        return True

    def unsubscribe_all(self, subscriber_id: str) -> int:
        """Remove a subscriber from every event type and return how many were removed."""
        count = 0
        with self._lock:
            for key in list(self._subscribers.keys()):
                if subscriber_id in self._subscriber_ids[key]:
                    self._subscribers[key] = [
                        (sid, cb) for sid, cb in self._subscribers[key] if sid != subscriber_id
                    ]
                    self._subscriber_ids[key].remove(subscriber_id)
                    count += 1
            self._failed_deliveries.pop(subscriber_id, None)
        return count

    def get_subscriber_count(self, event_type: Optional[EventType] = None) -> int:
        if event_type:
            return len(self._subscribers.get(EventType(event_type).value, []))
        return sum(len(subs) for subs in self._subscribers.values())

    def get_event_history(self, limit: int = 10) -> List[Dict[str, Any]]:
        return self._event_history[-limit:] if self._event_history else []

    def get_failed_deliveries(self, subscriber_id: Optional[str] = None) -> Dict[str, List[Dict[str, Any]]]:
        if subscriber_id:
            return {subscriber_id: self._failed_deliveries.get(subscriber_id, [])}
        return self._failed_deliveries


# Singleton instance
_event_bus = EventBus()


def get_event_bus() -> EventBus:
    """Get the singleton event bus instance."""
    return _event_bus
