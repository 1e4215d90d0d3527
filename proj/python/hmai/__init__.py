"""Heterogeneous accelerator scheduling simulator."""

import json

from ._core import (
    ConfigError,
    DomainError,
    IoError,
    config_keys,
    kmh_to_ms,
    matching_score_det,
    matching_score_tra,
    platform_presets,
    platform_size,
    rss_min_distance,
    safety_time,
    scheduler_names,
)
from . import _core

__all__ = [
    "ConfigError", "DomainError", "IoError", "brake", "compare", "config_keys",
    "gen", "generate", "kmh_to_ms", "matching_score_det", "matching_score_tra",
    "platform_presets", "platform_size", "rss_min_distance", "run",
    "safety_time", "scheduler_names", "train",
]


def _settings(settings):
    return {k: str(v) for k, v in (settings or {}).items()}


def generate(settings=None, seed=None):
    """Task queue as a list of dicts."""
    text = _core.generate_jsonl(_settings(settings), seed)
    return [json.loads(line) for line in text.splitlines() if line]


def gen(out, settings=None, seed=None):
    return _core.gen(str(out), _settings(settings), seed)


def train(out, settings=None, episodes=None):
    return _core.train(str(out), _settings(settings), episodes)


def run(scheduler="minmin", settings=None, seed=None, platform=None, queue=None,
        weights=None):
    return json.loads(_core.run_json(scheduler, _settings(settings), seed, platform,
                                     _opt(queue), _opt(weights)))


def compare(schedulers=(), platforms=(), settings=None, seed=None, queue=None,
            weights=None):
    return json.loads(_core.compare_json(list(schedulers), list(platforms),
                                         _settings(settings), seed, _opt(queue),
                                         _opt(weights)))


def brake(schedulers=(), settings=None, seed=None, queue=None, weights=None):
    return json.loads(_core.brake_json(list(schedulers), _settings(settings), seed,
                                       _opt(queue), _opt(weights)))


def _opt(p):
    return None if p is None else str(p)
