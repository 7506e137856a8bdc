"""Discrete-event core: a time-ordered queue with FIFO tie-breaking."""

import heapq

from .errors import InvalidInputError


class EventQueue:
    """Future event list keyed on simulated time in milliseconds.

    Events at equal times run in the order they were scheduled.  Scheduling
    into the past (before the time of the last dispatched event) is an error,
    because it would silently reorder causality.
    """

    def __init__(self, start_time_ms=0.0):
        self._heap = []
        self._counter = 0
        self.now_ms = float(start_time_ms)

    def __len__(self):
        return len(self._heap)

    def schedule(self, time_ms, action):
        """Schedule ``action`` (a zero-argument callable) at ``time_ms``."""
        if not callable(action):
            raise InvalidInputError("action must be callable, got %r" % (action,))
        time_ms = float(time_ms)
        if time_ms < self.now_ms:
            raise InvalidInputError(
                "cannot schedule at %r ms: queue time already at %r ms"
                % (time_ms, self.now_ms))
        heapq.heappush(self._heap, (time_ms, self._counter, action))
        self._counter += 1

    def schedule_in(self, delay_ms, action):
        """Schedule ``action`` after a non-negative delay from now."""
        delay_ms = float(delay_ms)
        if delay_ms < 0.0:
            raise InvalidInputError("delay_ms must be non-negative, got %r" % (delay_ms,))
        self.schedule(self.now_ms + delay_ms, action)

    def step(self):
        """Dispatch the earliest event; returns False if the queue is empty."""
        if not self._heap:
            return False
        time_ms, _, action = heapq.heappop(self._heap)
        self.now_ms = time_ms
        action()
        return True

    def run_until(self, horizon_ms):
        """Dispatch every event scheduled at or before ``horizon_ms``.

        The queue clock ends at ``horizon_ms`` even if it drains early, so a
        caller stepping a fixed window always lands exactly on the boundary.
        """
        horizon_ms = float(horizon_ms)
        if horizon_ms < self.now_ms:
            raise InvalidInputError(
                "horizon %r ms is before current time %r ms" % (horizon_ms, self.now_ms))
        dispatched = 0
        while self._heap and self._heap[0][0] <= horizon_ms:
            self.step()
            dispatched += 1
        self.now_ms = horizon_ms
        return dispatched

    def run(self):
        """Dispatch every remaining event."""
        dispatched = 0
        while self.step():
            dispatched += 1
        return dispatched
