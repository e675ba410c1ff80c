"""Game-file ingestion.

A game file is UTF-8 JSON with one of two shapes:

probability form::

    {"devices": [{"id": "web", "p": "1/2"},
                 {"id": "db",  "p": "0.25"}]}

vulnerability-count form::

    {"denominator": 6,
     "devices": [{"id": "web", "vulns": 3},
                 {"id": "db",  "vulns": 2}]}

Probabilities are strings (exact rationals or finite decimals) so no binary
floating-point ambiguity enters the parse; the count form maps directly to a
rationalized game with p_i = vulns / denominator.  Exactly one of the two
forms must be used, and an optional free-form ``metadata`` map is carried
through untouched.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .game import BernoulliGame, parse_probability
from .racs import RationalizedGame


class GameFileError(ValueError):
    """Malformed or out-of-range game file; maps to CLI exit code 2."""


@dataclass(frozen=True)
class GameFileResult:
    game: BernoulliGame
    rationalized: RationalizedGame | None
    metadata: dict

    @property
    def is_count_form(self) -> bool:
        return self.rationalized is not None


def _parse_devices(raw) -> list[dict]:
    if not isinstance(raw, list) or not raw:
        raise GameFileError("'devices' must be a nonempty list")
    ids = []
    for idx, dev in enumerate(raw):
        if not isinstance(dev, dict):
            raise GameFileError(f"device #{idx} must be an object")
        dev_id = dev.get("id")
        if not isinstance(dev_id, str) or not dev_id:
            raise GameFileError(f"device #{idx} needs a nonempty string 'id'")
        ids.append(dev_id)
    if len(set(ids)) != len(ids):
        raise GameFileError("device ids must be unique")
    return raw


def parse_game_data(data: dict) -> GameFileResult:
    """Validate and convert an already-decoded game-file object."""
    if not isinstance(data, dict):
        raise GameFileError("top-level value must be an object")
    devices = _parse_devices(data.get("devices"))
    metadata = data.get("metadata", {})
    if not isinstance(metadata, dict):
        raise GameFileError("'metadata' must be an object")
    has_denominator = "denominator" in data
    has_p = any("p" in d for d in devices)
    has_vulns = any("vulns" in d for d in devices)
    if has_p and (has_vulns or has_denominator):
        raise GameFileError("use either probabilities or vulns+denominator, not both")
    if not has_p and not (has_vulns and has_denominator):
        raise GameFileError("devices need either 'p' for all or 'vulns' plus a 'denominator'")

    ids = [d["id"] for d in devices]
    if has_p:
        probs = []
        for d in devices:
            if "p" not in d:
                raise GameFileError(f"device {d['id']!r} is missing 'p'")
            p = d["p"]
            if isinstance(p, float):
                raise GameFileError(
                    f"device {d['id']!r}: write probabilities as strings, not JSON floats"
                )
            if not isinstance(p, (str, int)):
                raise GameFileError(f"device {d['id']!r}: 'p' must be a string")
            try:
                probs.append(parse_probability(p))
            except (ValueError, TypeError) as exc:
                raise GameFileError(f"device {d['id']!r}: {exc}") from exc
        game = BernoulliGame.from_probs(probs, ids=ids)
        return GameFileResult(game, None, metadata)

    denominator = data["denominator"]
    if not isinstance(denominator, int) or isinstance(denominator, bool) or denominator < 1:
        raise GameFileError("'denominator' must be a positive integer")
    counts = []
    for d in devices:
        if "vulns" not in d:
            raise GameFileError(f"device {d['id']!r} is missing 'vulns'")
        v = d["vulns"]
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise GameFileError(f"device {d['id']!r}: 'vulns' must be a nonnegative integer")
        if v > denominator:
            raise GameFileError(
                f"device {d['id']!r}: vulns ({v}) cannot exceed the denominator ({denominator})"
            )
        counts.append(v)
    probs = [Fraction(v, denominator) for v in counts]
    game = BernoulliGame.from_probs(probs, ids=ids)
    rationalized = RationalizedGame(tuple(counts), denominator, source=game)
    return GameFileResult(game, rationalized, metadata)


def parse_game_file(path: str) -> GameFileResult:
    """Read, decode, and validate a game file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise GameFileError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise GameFileError(f"{path} is not valid JSON: {exc}") from exc
    return parse_game_data(data)
