"""Objective plug-ins for the search loop.

Built-in synthetic functions for desk-scale benchmarking, plus an
external-command bridge: the point goes to the command's stdin as one CSV
line, the command prints y; a nonzero exit marks the evaluation failed.
"""

from __future__ import annotations

import math
import subprocess

from .seeding import generator


class ObjectiveError(RuntimeError):
    """External objective command failed or produced no parseable value."""


def quadratic_bowl(center=0.3):
    """Sum of squared distances to `center` (scalar broadcasts to all dims)."""
    def objective(x):
        if isinstance(center, (int, float)):
            return sum((v - center) ** 2 for v in x)
        return sum((v - c) ** 2 for v, c in zip(x, center))
    return objective


def branin():
    """Branin function rescaled to the unit box; global minimum ~0.397887."""
    a = 1.0
    b = 5.1 / (4.0 * math.pi ** 2)
    c = 5.0 / math.pi
    r = 6.0
    s = 10.0
    t = 1.0 / (8.0 * math.pi)

    def objective(x):
        x1 = 15.0 * x[0] - 5.0
        x2 = 15.0 * x[1]
        return a * (x2 - b * x1 ** 2 + c * x1 - r) ** 2 + s * (1.0 - t) * math.cos(x1) + s
    return objective


def with_noise(objective, sigma: float, seed: int):
    """Additive Gaussian noise; the noise stream is its own seeded generator."""
    rng = generator(seed, 0x401E)

    def noisy(x):
        return objective(x) + sigma * float(rng.standard_normal())
    return noisy


def command_objective(argv: list[str]):
    """Wrap an external command as an objective.

    Each call writes `x` as one comma-separated line to the command's stdin
    and parses the first token of stdout as y.
    """
    def objective(x):
        line = ",".join(repr(float(v)) for v in x) + "\n"
        proc = subprocess.run(argv, input=line, capture_output=True, text=True)
        if proc.returncode != 0:
            raise ObjectiveError(f"objective command exited {proc.returncode}: "
                                 f"{proc.stderr.strip()}")
        tokens = proc.stdout.split()
        if not tokens:
            raise ObjectiveError("objective command printed no value")
        return float(tokens[0])
    return objective


BUILTIN_OBJECTIVES = ("quadratic", "branin")


def build_objective(name: str, center=0.3, noise: float = 0.0, seed: int = 0,
                    command: list[str] | None = None):
    """CLI-facing factory for the objective selector."""
    if name == "quadratic":
        fn = quadratic_bowl(center)
    elif name == "branin":
        fn = branin()
    elif name == "command":
        if not command:
            raise ValueError("command objective needs a command line")
        fn = command_objective(command)
    else:
        raise ValueError(f"unknown objective {name!r}")
    if noise > 0.0:
        fn = with_noise(fn, noise, seed)
    return fn
