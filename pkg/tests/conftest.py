import random
import sys
from pathlib import Path

import pytest

from cascore import EventRecord

sys.path.insert(0, str(Path(__file__).parent))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and "test_acceptance" in item.nodeid:
        label = (item.function.__doc__ or item.name).strip().splitlines()[0]
        status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        print(f"\nACCEPTANCE {label}: {status}", file=sys.stderr)


def random_instance(
    rng: random.Random,
    max_cascades: int = 10,
    max_participants: int = 10,
    tie_prob: float = 0.3,
    dup_prob: float = 0.15,
    viewed_prob: float = 0.0,
) -> list[EventRecord]:
    """A small random event set with ties, duplicates, and shuffled order."""
    participants = [f"p{i}" for i in range(rng.randint(1, max_participants))]
    events = []
    for c in range(rng.randint(1, max_cascades)):
        cascade_id = f"c{c}"
        members = rng.sample(participants, rng.randint(1, len(participants)))
        times: list[float] = []
        for _ in members:
            if times and rng.random() < tie_prob:
                times.append(times[-1])
            elif times:
                times.append(times[-1] + rng.uniform(0.5, 2.0))
            else:
                times.append(rng.uniform(0.0, 10.0))
        for pid, ts in zip(members, times):
            viewed = None
            if viewed_prob and rng.random() < viewed_prob:
                viewed = rng.random() < 0.5
            events.append(EventRecord(cascade_id, pid, ts, viewed))
        if rng.random() < dup_prob:
            # A repeated appearance by one member, sometimes earlier than
            # their kept record, to exercise keep-first dedup.
            pid = rng.choice(members)
            ts = rng.choice(times) + rng.choice([-0.25, 0.0, 3.0])
            events.append(EventRecord(cascade_id, pid, ts, None))
    rng.shuffle(events)
    return events
