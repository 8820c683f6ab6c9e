"""Excavator around-view monitoring: rig planning, kinematics, stitching and the live pipeline."""

import json as _json

from . import _core
from ._core import ConfigError, DomainError, RangeError, UnknownCommandError, ValidationError

__all__ = [
    "ConfigError",
    "DomainError",
    "Pipeline",
    "RangeError",
    "UnknownCommandError",
    "ValidationError",
    "checkerboard_scene",
    "compose_topview",
    "default_profile",
    "default_scene",
    "distortion",
    "forward_kinematics",
    "ground_truth",
    "plan",
    "reference_rig",
    "render",
]


def _text(value):
    return "" if value is None else _json.dumps(value)


def reference_rig():
    return _json.loads(_core.reference_rig())


def default_scene():
    return _json.loads(_core.default_scene())


def checkerboard_scene():
    return _json.loads(_core.checkerboard_scene())


def default_profile():
    return _json.loads(_core.default_profile())


def plan(rig=None):
    """Per-camera image range, required FOV and K/f check."""
    return _json.loads(_core.plan(_text(rig)))


def forward_kinematics(boom_deg, arm_deg, bucket_deg, rig=None):
    return _json.loads(_core.forward_kinematics(boom_deg, arm_deg, bucket_deg, _text(rig)))


def render(rig=None, scene=None, roll=0.0, pitch=0.0, yaw=0.0, supersample=1):
    """One (H, W, 3) uint8 frame per camera."""
    return _core.render(_text(rig), _text(scene), roll, pitch, yaw, supersample)


def compose_topview(frames, rig=None, roll=0.0, pitch=0.0, yaw=0.0):
    """Stitches camera frames with maps calibrated for the given attitude."""
    return _core.compose_topview(list(frames), _text(rig), roll, pitch, yaw)


def ground_truth(scene=None, rig=None, supersample=4):
    return _core.ground_truth(_text(scene), _text(rig), supersample)


def distortion(test, reference, scene=None, rig=None):
    return _json.loads(_core.distortion(test, reference, _text(scene), _text(rig)))


class Pipeline:
    def __init__(self, rig=None, scene=None, profile=None, target_fps=30.0, supersample=1):
        self._p = _core.Pipeline(_text(rig), _text(scene), _text(profile), target_fps, supersample)

    def run_virtual(self):
        return _json.loads(self._p.run_virtual())

    def run_realtime(self, seconds):
        return _json.loads(self._p.run_realtime(seconds))

    def command(self, name, **args):
        return _json.loads(self._p.command(name, _json.dumps(args) if args else ""))

    def state(self):
        return _json.loads(self._p.state())

    def stats(self):
        return _json.loads(self._p.stats())

    def snapshot(self):
        return self._p.snapshot()
