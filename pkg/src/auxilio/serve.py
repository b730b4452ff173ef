"""WebSocket bridge: stream driver output events to the experiment UI.

Events are paced on the wall clock according to their timestamps (scaled by
``speed``) into a bounded handoff queue; on overflow the oldest events are
dropped and counted.  One client is served at a time; extra connections are
turned away with a transient-error close code.  Frames are JSON text in the
same schema as the event log lines.
"""

from __future__ import annotations

import asyncio
import json
from collections import deque
from typing import Sequence

import websockets

from .driver import OutputEvent

QUEUE_MAX = 1024
BUSY_CLOSE_CODE = 1013


class EventBridge:
    def __init__(
        self,
        events: Sequence[OutputEvent],
        speed: float = 1.0,
        loop_forever: bool = False,
        queue_max: int = QUEUE_MAX,
    ):
        self.events = list(events)
        self.speed = speed
        self.loop_forever = loop_forever
        self.queue: deque[OutputEvent] = deque()
        self.queue_max = queue_max
        self.dropped = 0
        self.finished = False
        self.client_connected = False
        self.had_client = False
        self._cond: asyncio.Condition | None = None

    def _condition(self) -> asyncio.Condition:
        if self._cond is None:
            self._cond = asyncio.Condition()
        return self._cond

    async def pace(self) -> None:
        cond = self._condition()
        while True:
            t0 = self.events[0].t if self.events else 0.0
            loop = asyncio.get_running_loop()
            start = loop.time()
            for event in self.events:
                if self.speed > 0.0:
                    delay = (event.t - t0) / self.speed - (loop.time() - start)
                    if delay > 0.0:
                        await asyncio.sleep(delay)
                async with cond:
                    if len(self.queue) >= self.queue_max:
                        self.queue.popleft()
                        self.dropped += 1
                    self.queue.append(event)
                    cond.notify_all()
            if not self.loop_forever:
                break
        async with cond:
            self.finished = True
            cond.notify_all()

    async def handler(self, websocket) -> None:
        if self.client_connected:
            await websocket.close(BUSY_CLOSE_CODE, "another client is connected")
            return
        self.client_connected = True
        self.had_client = True
        cond = self._condition()
        try:
            while True:
                async with cond:
                    while not self.queue and not self.finished:
                        await cond.wait()
                    if not self.queue and self.finished:
                        break
                    event = self.queue.popleft()
                    cond.notify_all()
                await websocket.send(json.dumps(event.to_json()))
        except websockets.ConnectionClosed:
            pass
        finally:
            self.client_connected = False

    async def done(self) -> None:
        """Resolve once every event has been streamed to some client."""
        cond = self._condition()
        async with cond:
            while not (self.finished and not self.queue):
                await cond.wait()
        if not self.events:
            return
        # Linger until the first client has connected and drained the stream.
        while not self.had_client or self.client_connected:
            await asyncio.sleep(0.1)


async def _serve(bridge: EventBridge, host: str, port: int) -> None:
    async with websockets.serve(bridge.handler, host, port) as server:
        bound = server.sockets[0].getsockname()[1] if server.sockets else port
        print(f"serving {len(bridge.events)} events on ws://{host}:{bound}", flush=True)
        pacer = asyncio.create_task(bridge.pace())
        await bridge.done()
        await pacer


def serve_events(
    events: Sequence[OutputEvent],
    host: str = "localhost",
    port: int = 8090,
    speed: float = 1.0,
    loop_forever: bool = False,
) -> int:
    """Blockingly serve an event stream; returns the dropped-event count."""
    bridge = EventBridge(events, speed=speed, loop_forever=loop_forever)
    try:
        asyncio.run(_serve(bridge, host, port))
    except KeyboardInterrupt:
        pass
    return bridge.dropped
