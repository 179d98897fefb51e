"""Synthetic crash-record corpus.

The real report set cannot be redistributed, so tests and demos run on
generated records shaped like the originals: two vehicles, all sixteen
entry/exit combinations, damage codes across the full localized range,
and narratives long enough to exercise the info-box truncation.
"""
from __future__ import annotations

import json
from typing import Iterable

from .records import (
    COLLISION_KINDS,
    COMPASS_POSITIONS,
    DEFAULT_ROAD_NAMES,
    CollisionType,
    CrashRecord,
    VehicleRecord,
    record_to_dict,
)

_WEATHER = ("clear", "rain", "overcast", "snow")
_LIGHTING = ("daylight", "dusk", "dark-road lighted")

_LONG_TAIL = (
    " Both drivers stated they were traveling at low speed. The roadway was dry "
    "and traffic was moderate at the time. Officer observed debris in the "
    "circulating lane consistent with the stated point of impact, and both "
    "vehicles were moved to the shoulder before the report was taken."
)


def synthetic_record(index: int) -> CrashRecord:
    entry1 = COMPASS_POSITIONS[index % 4]
    exit1 = COMPASS_POSITIONS[(index // 4) % 4]
    entry2 = COMPASS_POSITIONS[(index + 2) % 4]
    exit2 = COMPASS_POSITIONS[(index // 2 + 1) % 4]
    code1 = 1 + (index % 13)
    code2 = 1 + ((index * 5 + 3) % 13)
    kind = COLLISION_KINDS[index % len(COLLISION_KINDS)]

    narrative = (
        f"V1 entered the roundabout from the {entry1} approach "
        f"({DEFAULT_ROAD_NAMES[entry1]}) intending to exit at the {exit1} leg "
        f"({DEFAULT_ROAD_NAMES[exit1]}). V2 was circulating from the {entry2} "
        f"approach ({DEFAULT_ROAD_NAMES[entry2]}) toward the {exit2} leg. "
        f"V1 failed to yield on entry and the vehicles collided within the "
        f"circulating roadway."
    )
    if index % 7 == 0:
        narrative += _LONG_TAIL

    conditions = {}
    if index % 3 != 2:
        conditions = {
            "weather": _WEATHER[index % len(_WEATHER)],
            "lighting": _LIGHTING[index % len(_LIGHTING)],
            "surface": "dry" if index % 2 == 0 else "wet",
        }

    return CrashRecord(
        case_id=f"case-{index + 1:03d}",
        location="US 9 / NY 67 roundabout, Malta NY",
        narrative=narrative,
        vehicles=(
            VehicleRecord("V1", entry1, exit1, code1),
            VehicleRecord("V2", entry2, exit2, code2, pre_impact_action="entering"),
        ),
        collision_type=CollisionType(kind),
        conditions=conditions,
    )


def synthetic_corpus(n: int = 79) -> list[CrashRecord]:
    return [synthetic_record(i) for i in range(n)]


def corpus_json(records: Iterable[CrashRecord]) -> str:
    return json.dumps([record_to_dict(r) for r in records], indent=2) + "\n"


def main(argv: list[str] | None = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(description="emit a synthetic record corpus as JSON")
    parser.add_argument("--count", type=int, default=79)
    parser.add_argument("--out", default="-")
    args = parser.parse_args(argv)
    payload = corpus_json(synthetic_corpus(args.count))
    if args.out == "-":
        print(payload, end="")
    else:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(payload)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
