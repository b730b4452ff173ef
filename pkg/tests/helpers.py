"""Shared test utilities: random frame streams and output legality checking."""

import numpy as np

from auxilio.driver import Button, Driver, DriverConfig, Mode
from auxilio.wire import (
    CH_LEFT,
    CH_RIGHT,
    EDGE_PRESS,
    EDGE_RELEASE,
    ClickFrame,
    MovementFrame,
    StatusFrame,
)


def random_frame_stream(n: int, seed: int = 0) -> list[tuple[object, float]]:
    """Mixed movement/click/status frames with monotone timestamps.

    Movement angles roam past the gesture gate so mode toggles occur; click
    edges are unconstrained, so input alternation violations are exercised.
    """
    rng = np.random.default_rng(seed)
    frames: list[tuple[object, float]] = []
    t = 0.0
    for _ in range(n):
        t += 0.01
        r = rng.random()
        if r < 0.70:
            frames.append((MovementFrame.from_degrees(
                float(rng.uniform(-60.0, 60.0)), float(rng.uniform(-60.0, 60.0))), t))
        elif r < 0.95:
            mask = int(rng.choice([CH_LEFT, CH_RIGHT, CH_LEFT | CH_RIGHT]))
            edge = int(rng.choice([EDGE_PRESS, EDGE_RELEASE]))
            frames.append((ClickFrame(channels=mask, edge=edge), t))
        else:
            frames.append((StatusFrame(code=int(rng.integers(0, 256))), t))
    return frames


def run_stream(frames, cfg: DriverConfig | None = None):
    driver = Driver(cfg or DriverConfig())
    events = []
    for frame, t in frames:
        events.extend(driver.step(frame, t))
    return events, driver


def check_event_legality(events, cfg: DriverConfig) -> dict:
    """Assert output-stream invariants; returns simple stream statistics.

    - per-button down/up alternation,
    - no cursor/button events inside disabled intervals,
    - no button left pressed across a disable transition,
    - cursor always within screen bounds.
    """
    down = {Button.LEFT: False, Button.RIGHT: False}
    mode = Mode.ENABLED
    stats = {"moves": 0, "downs": 0, "ups": 0, "modes": 0}
    last_t = None
    for e in events:
        if last_t is not None:
            assert e.t >= last_t, "events out of order"
        last_t = e.t
        if e.kind == "move":
            assert mode is Mode.ENABLED, "cursor move while disabled"
            assert 0 <= e.x < cfg.screen_w and 0 <= e.y < cfg.screen_h
            stats["moves"] += 1
        elif e.kind == "down":
            assert mode is Mode.ENABLED, "button down while disabled"
            assert not down[e.btn], f"double down on {e.btn}"
            down[e.btn] = True
            stats["downs"] += 1
        elif e.kind == "up":
            assert mode is Mode.ENABLED, "button up while disabled"
            assert down[e.btn], f"up without down on {e.btn}"
            down[e.btn] = False
            stats["ups"] += 1
        elif e.kind == "mode":
            if e.mode is Mode.DISABLED:
                assert not down[Button.LEFT] and not down[Button.RIGHT], \
                    "stuck button across disable"
            mode = e.mode
            stats["modes"] += 1
        else:
            raise AssertionError(f"unknown event kind {e.kind}")
    return stats


# Usability-questionnaire reference data: 15 respondents, their published
# per-respondent scores/grades, and the column footer (mean/SD per item plus
# the score column).
SUS_ROWS = [
    ((4, 1, 5, 1, 5, 1, 4, 1, 4, 1), 92.50, "A+"),
    ((4, 2, 4, 2, 5, 1, 5, 1, 4, 3), 82.50, "A"),
    ((4, 1, 4, 2, 3, 2, 3, 2, 3, 1), 72.50, "C+"),
    ((4, 1, 5, 2, 5, 1, 4, 2, 5, 1), 90.00, "A+"),
    ((4, 1, 5, 1, 5, 1, 4, 1, 4, 1), 92.50, "A+"),
    ((5, 2, 4, 2, 5, 1, 4, 1, 5, 1), 90.00, "A+"),
    ((5, 1, 5, 2, 5, 1, 5, 1, 5, 1), 97.50, "A+"),
    ((4, 2, 5, 4, 4, 2, 5, 2, 3, 2), 72.50, "C+"),
    ((4, 1, 3, 2, 4, 2, 3, 2, 3, 2), 70.00, "C"),
    ((3, 1, 5, 1, 4, 2, 4, 2, 3, 1), 80.00, "A-"),
    ((4, 1, 4, 3, 5, 1, 4, 1, 5, 1), 87.50, "A+"),
    ((4, 1, 4, 1, 5, 3, 5, 2, 2, 1), 80.00, "A-"),
    ((4, 1, 5, 2, 4, 2, 5, 3, 5, 1), 85.00, "A+"),
    ((5, 2, 4, 2, 5, 1, 5, 1, 4, 3), 85.00, "A+"),
    ((5, 1, 5, 2, 3, 2, 4, 1, 4, 1), 85.00, "A+"),
]
SUS_FOOTER_MEANS = (4.20, 1.27, 4.47, 1.93, 4.47, 1.53, 4.27, 1.53, 3.93, 1.40)
SUS_FOOTER_SDS = (0.56, 0.46, 0.64, 0.80, 0.74, 0.64, 0.70, 0.64, 0.96, 0.74)
SUS_MEAN_SCORE = 84.17
SUS_SCORE_SD = 8.05
SUS_MEAN_GRADE = "A+"

# Published per-sentence mean typing metrics:
# (sentence, device, mean_fat, mean_sct, mean_miss, mean_accuracy_pct, mean_wpm)
TYPING_SENTENCES = [
    "Rise and shine.",
    "Nothing lasts forever.",
    "Be honest.",
    "Respect the elders.",
    "Follow your heart.",
]
TYPING_MEAN_ROWS = [
    ("Rise and shine.", "mouse", 4.2338, 12.7990, 0.7391, 95.00, 14.0370),
    ("Rise and shine.", "auxilio", 12.1407, 91.1267, 5.1111, 66.00, 1.9256),
    ("Nothing lasts forever.", "mouse", 1.5568, 15.4589, 2.9600, 86.36, 17.4888),
    ("Nothing lasts forever.", "auxilio", 11.7847, 118.0624, 6.0000, 72.56, 2.1822),
    ("Be honest.", "mouse", 1.7468, 7.4531, 0.4000, 96.00, 16.2004),
    ("Be honest.", "auxilio", 8.6648, 57.3056, 1.8889, 81.11, 1.9633),
    ("Respect the elders.", "mouse", 3.2318, 12.4513, 0.9200, 95.20, 18.2612),
    ("Respect the elders.", "auxilio", 8.5381, 116.5487, 4.4444, 76.67, 2.0733),
    ("Follow your heart.", "mouse", 2.1651, 11.7892, 1.3896, 92.71, 17.2762),
    ("Follow your heart.", "auxilio", 7.1614, 108.9044, 3.3333, 81.44, 2.1089),
]
