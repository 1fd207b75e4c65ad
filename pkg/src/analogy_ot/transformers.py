"""State transformers: the programs whose triples are checked.

A transformer maps a batch of states ``(n, d)`` either to a batch of images
(deterministic) or to one non-empty successor array per state
(nondeterministic).  Built-ins cover the usual synthetic programs; any
external program can be plugged in through :func:`subprocess_transformer`.
"""

from __future__ import annotations

import csv
import io
import subprocess
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import streams
from .metric import as_point, as_sample

__all__ = [
    "StateTransformer",
    "TransformerProtocolError",
    "identity",
    "translation",
    "scaling",
    "jitter",
    "jump",
    "subprocess_transformer",
    "from_spec",
]

DETERMINISTIC = "deterministic"
NONDETERMINISTIC = "nondeterministic"


class TransformerProtocolError(RuntimeError):
    """The transformer returned something other than valid successor states."""


@dataclass(frozen=True)
class StateTransformer:
    fn: Callable[[np.ndarray], object]
    kind: str = DETERMINISTIC
    name: str = "S"
    # Set when fn must not be called from several threads at once.
    serial: bool = False

    def __post_init__(self):
        if self.kind not in (DETERMINISTIC, NONDETERMINISTIC):
            raise ValueError(f"kind must be {DETERMINISTIC!r} or {NONDETERMINISTIC!r}")

    @property
    def deterministic(self) -> bool:
        return self.kind == DETERMINISTIC

    @classmethod
    def pointwise(cls, fn, kind: str = DETERMINISTIC, name: str = "S") -> "StateTransformer":
        """Wrap a function of a single state (returning a state, or a list of states)."""
        if kind == DETERMINISTIC:
            return cls(lambda X: np.array([np.asarray(fn(x), dtype=float) for x in X]), kind, name)
        return cls(lambda X: [np.atleast_2d(np.asarray(fn(x), dtype=float)) for x in X], kind, name)

    def successors(self, X) -> list[np.ndarray]:
        """One ``(k_i, d)`` array per input state, validated."""
        X = as_sample(X)
        n, d = X.shape
        out = self.fn(X)
        if self.deterministic:
            Y = np.asarray(out, dtype=float)
            if Y.shape != (n, d):
                raise TransformerProtocolError(f"{self.name}: expected images of shape {(n, d)}, got {Y.shape}")
            if not np.all(np.isfinite(Y)):
                raise TransformerProtocolError(f"{self.name}: non-finite image")
            return [Y[i : i + 1] for i in range(n)]
        if len(out) != n:
            raise TransformerProtocolError(f"{self.name}: {len(out)} successor sets for {n} states")
        succ = []
        for i, s in enumerate(out):
            s = np.atleast_2d(np.asarray(s, dtype=float))
            if s.shape[0] == 0:
                raise TransformerProtocolError(f"{self.name}: empty successor set for state {i}")
            if s.shape[1] != d:
                raise TransformerProtocolError(f"{self.name}: successor of state {i} has dimension {s.shape[1]}")
            if not np.all(np.isfinite(s)):
                raise TransformerProtocolError(f"{self.name}: non-finite successor of state {i}")
            succ.append(s)
        return succ

    def image(self, X) -> np.ndarray:
        if not self.deterministic:
            raise ValueError("image() is defined for deterministic transformers only")
        return np.vstack(self.successors(X))


def identity() -> StateTransformer:
    return StateTransformer(lambda X: X.copy(), name="identity")


def translation(vector) -> StateTransformer:
    v = as_point(vector, "vector")
    return StateTransformer(lambda X: X + v, name="translation")


def scaling(factor: float) -> StateTransformer:
    return StateTransformer(lambda X: X * float(factor), name="scaling")


def jitter(bound: float, seed: int, scale: float | None = None) -> StateTransformer:
    """Seeded Gaussian jitter with every displacement clipped to norm ``bound``.

    The noise for a batch of ``n`` states is drawn from stream
    ``(seed, JITTER)``, so repeated calls on the same batch agree.
    """
    if bound < 0:
        raise ValueError("bound must be >= 0")
    sd = bound if scale is None else float(scale)

    def apply(X):
        noise = streams.rng(seed, streams.JITTER).standard_normal(X.shape) * sd
        norms = np.sqrt(np.einsum("ij,ij->i", noise, noise))
        factor = np.ones_like(norms)
        big = norms > bound
        factor[big] = bound / norms[big]
        return X + noise * factor[:, None]

    return StateTransformer(apply, name="jitter")


def jump(vector, states: Sequence[int] | None = None) -> StateTransformer:
    """Two-branch program: stay put, or jump by ``vector``.

    With ``states`` given, only those input indices get the jump branch; the
    rest have the single successor ``{s}``.
    """
    v = as_point(vector, "vector")
    allowed = None if states is None else set(int(i) for i in states)

    def apply(X):
        out = []
        for i, x in enumerate(X):
            if allowed is None or i in allowed:
                out.append(np.vstack([x, x + v]))
            else:
                out.append(x[None, :])
        return out

    return StateTransformer(apply, NONDETERMINISTIC, name="jump")


def _format_rows(X: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in X:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def _parse_block(lines: list[str], d: int, where: str) -> np.ndarray:
    try:
        rows = [[float(v) for v in line.split(",")] for line in lines]
    except ValueError as exc:
        raise TransformerProtocolError(f"{where}: unparsable output ({exc})") from None
    arr = np.array(rows) if rows else np.empty((0, d))
    if arr.ndim != 2 or arr.shape[1] != d:
        raise TransformerProtocolError(f"{where}: expected {d} columns per line")
    return arr


def subprocess_transformer(command: Sequence[str], kind: str = DETERMINISTIC, timeout: float = 300.0) -> StateTransformer:
    """Run an external program as the transformer.

    States go to the program's stdin as CSV lines.  A deterministic program
    prints one CSV line per input line; a nondeterministic one prints one
    block of lines per input state, blocks separated by a blank line.
    """
    command = list(command)

    def apply(X):
        n, d = X.shape
        try:
            proc = subprocess.run(
                command, input=_format_rows(X), capture_output=True, text=True, timeout=timeout, check=False
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise TransformerProtocolError(f"transformer command failed: {exc}") from None
        if proc.returncode != 0:
            raise TransformerProtocolError(f"transformer exited with {proc.returncode}: {proc.stderr.strip()}")
        text = proc.stdout
        if kind == DETERMINISTIC:
            lines = [ln for ln in text.splitlines() if ln.strip()]
            if len(lines) != n:
                raise TransformerProtocolError(f"expected {n} output lines, got {len(lines)}")
            return _parse_block(lines, d, "transformer output")
        blocks, current = [], []
        for ln in text.splitlines():
            if ln.strip():
                current.append(ln)
            elif current:
                blocks.append(current)
                current = []
        if current:
            blocks.append(current)
        if len(blocks) != n:
            raise TransformerProtocolError(f"expected {n} successor blocks, got {len(blocks)}")
        return [_parse_block(b, d, f"block {i}") for i, b in enumerate(blocks)]

    return StateTransformer(apply, kind, name="subprocess", serial=True)


def from_spec(spec: dict, seed: int | None = None) -> StateTransformer:
    """Build a transformer from a config mapping such as ``{"kind": "translation", "vector": [0.3, 0]}``."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    builders = {
        "identity": lambda: identity(),
        "translation": lambda vector: translation(vector),
        "scaling": lambda factor: scaling(factor),
        "jitter": lambda bound, scale=None, seed=seed: jitter(bound, _need_seed(seed), scale),
        "jump": lambda vector, states=None: jump(vector, states),
        "subprocess": lambda command, nondeterministic=False, timeout=300.0: subprocess_transformer(
            command, NONDETERMINISTIC if nondeterministic else DETERMINISTIC, timeout
        ),
    }
    if kind not in builders:
        raise ValueError(f"unknown transformer kind {kind!r}; expected one of {sorted(builders)}")
    try:
        return builders[kind](**spec)
    except TypeError as exc:
        raise ValueError(f"bad parameters for transformer {kind!r}: {exc}") from None


def _need_seed(seed):
    if seed is None:
        raise ValueError("the jitter transformer needs a seed")
    return seed
