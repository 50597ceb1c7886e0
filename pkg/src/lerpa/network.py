"""Sigmoid-hidden, linear-output perceptron with per-output gradients.

The network maps an 81-bit observation through one hidden layer of
sigmoid units onto four linear outputs, read as the chances of winning
3, 2 or 1 tricks or of staying in and winning none. Outputs are raw
linear values; they are not squashed or normalised. The summary
prediction of a hand's worth in chips is

    P = 3*A + 2*B + C - 3*D

where (A, B, C, D) are the four outputs. Learning happens outside this
module; here live the forward pass, exact per-output weight gradients,
and a text checkpoint format.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cards import InputError

INPUT_DIM = 81
HIDDEN_DIM = 50
N_OUTPUTS = 4
INIT_SCALE = 0.1  # weights drawn uniform on [-INIT_SCALE, INIT_SCALE], biases zero

_MAGIC = "lerpa-mlp v1"

# Chip value of each output slot under the summary prediction.
OUTPUT_CHIPS = np.array([3.0, 2.0, 1.0, -3.0])


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


@dataclass
class ForwardTrace:
    """Inputs and activations of one forward pass."""

    x: np.ndarray
    h: np.ndarray
    y: np.ndarray


@dataclass
class GradientSet:
    """d(output_k)/d(weight) for every output k and every weight.

    Output k only touches row k of the output weights, so those
    gradients are stored as the nonzero row (w2_row[k] = dy_k/dW2[k,:],
    with dy_k/db2[k] = 1). full_w2()/full_b2() expand the implied zeros.
    """

    w1: np.ndarray      # (K, H, I)
    b1: np.ndarray      # (K, H)
    w2_row: np.ndarray  # (K, H)

    def full_w2(self) -> np.ndarray:
        k, h = self.w2_row.shape
        out = np.zeros((k, k, h))
        for i in range(k):
            out[i, i, :] = self.w2_row[i]
        return out

    def full_b2(self) -> np.ndarray:
        return np.eye(self.w2_row.shape[0])


class Mlp:
    """One 81 -> 50 -> 4 network; weights owned and mutated by one learner."""

    def __init__(self, w1: np.ndarray, b1: np.ndarray, w2: np.ndarray, b2: np.ndarray):
        self.w1 = w1
        self.b1 = b1
        self.w2 = w2
        self.b2 = b2

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.w2.shape[0]

    @classmethod
    def init(cls, rng: np.random.Generator, input_dim: int = INPUT_DIM,
             hidden_dim: int = HIDDEN_DIM, n_outputs: int = N_OUTPUTS) -> "Mlp":
        if input_dim <= 0 or hidden_dim <= 0 or n_outputs <= 0:
            raise InputError("network dimensions must be positive")
        w1 = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(hidden_dim, input_dim))
        b1 = np.zeros(hidden_dim)
        w2 = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(n_outputs, hidden_dim))
        b2 = np.zeros(n_outputs)
        return cls(w1, b1, w2, b2)

    def copy(self) -> "Mlp":
        return Mlp(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy())

    def forward(self, x: np.ndarray) -> ForwardTrace:
        if x.shape != (self.input_dim,):
            raise ValueError(f"input shape {x.shape}, expected ({self.input_dim},)")
        h = sigmoid(self.w1 @ x + self.b1)
        y = self.w2 @ h + self.b2
        return ForwardTrace(x, h, y)

    def grad_outputs(self, trace: ForwardTrace) -> GradientSet:
        """Exact analytic gradients of every output at this trace's weights."""
        s = trace.h * (1.0 - trace.h)
        back = self.w2 * s  # (K, H): dy_k/dz1_j
        g_w1 = back[:, :, None] * trace.x[None, None, :]
        g_w2 = np.broadcast_to(trace.h, (self.n_outputs, self.hidden_dim)).copy()
        return GradientSet(w1=g_w1, b1=back.copy(), w2_row=g_w2)

    def to_lines(self) -> list[str]:
        """Text form: magic line, dimensions, then row-major float rows.

        repr of a Python float round-trips exactly, so load followed by
        save reproduces the weights bit for bit.
        """
        def fmt(row: np.ndarray) -> str:
            return " ".join(repr(float(v)) for v in row)

        lines = [_MAGIC, f"{self.input_dim} {self.hidden_dim} {self.n_outputs}"]
        lines.extend(fmt(row) for row in self.w1)
        lines.append(fmt(self.b1))
        lines.extend(fmt(row) for row in self.w2)
        lines.append(fmt(self.b2))
        return lines

    def save(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.to_lines()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Mlp":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls._from_lines(lines)

    @classmethod
    def _from_lines(cls, lines: list[str]) -> "Mlp":
        if not lines or lines[0].strip() != _MAGIC:
            raise InputError(f"not a weight file (missing {_MAGIC!r} header)")
        try:
            input_dim, hidden_dim, n_outputs = (int(v) for v in lines[1].split())
        except (IndexError, ValueError) as exc:
            raise InputError("bad dimension line in weight file") from exc
        expected = 2 + hidden_dim + 1 + n_outputs + 1
        if len(lines) < expected:
            raise InputError("truncated weight file")

        def row(i: int, width: int) -> np.ndarray:
            values = np.array([float(v) for v in lines[i].split()])
            if values.shape != (width,):
                raise InputError(f"weight row {i} has {values.size} values, expected {width}")
            return values

        w1 = np.stack([row(2 + j, input_dim) for j in range(hidden_dim)])
        b1 = row(2 + hidden_dim, hidden_dim)
        w2 = np.stack([row(3 + hidden_dim + k, hidden_dim) for k in range(n_outputs)])
        b2 = row(3 + hidden_dim + n_outputs, n_outputs)
        return cls(w1, b1, w2, b2)


def scalar_prediction(y: np.ndarray, clamp: bool = False) -> float:
    """Expected chips implied by the four outputs: 3A + 2B + C - 3D.

    With clamp=True the outputs are first clipped into [0, 1], treating
    them as literal probabilities; by default they are consumed raw.
    """
    if clamp:
        y = np.clip(y, 0.0, 1.0)
    return float(OUTPUT_CHIPS @ y)
