"""Learning and baseline agents.

A TdAgent scores each legal choice by running the candidate afterstate
through its network and acting epsilon-greedily on the summary
prediction. Within a hand its successive predictions are chained by
TD(lambda): every weight carries one eligibility trace per output,
decayed by lambda and bumped by that output's gradient at each evaluated
stage, and each new prediction (or the terminal outcome) corrects all
traced weights at once. Traces and the previous prediction never survive
into the next hand.

Stage 1 (knock or fold) is evaluated on the view the agent would carry
into the played hand; folding itself is worth exactly 0 chips and needs
no network. A fresh agent is forced to knock for its first
`courage_hands` hands so that early losses cannot scare it into never
playing (and therefore never learning).

The RandomAgent baseline always knocks and plays uniformly random legal
cards.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cards import Card, ContractError, InputError
from .network import ForwardTrace, GradientSet, Mlp, scalar_prediction

FOLD = "fold"  # terminal outcome marker; chip outcomes are plain ints

_TARGETS = {
    3: np.array([1.0, 0.0, 0.0, 0.0]),
    2: np.array([0.0, 1.0, 0.0, 0.0]),
    1: np.array([0.0, 0.0, 1.0, 0.0]),
    -3: np.array([0.0, 0.0, 0.0, 1.0]),
}

_AGENT_MAGIC = "lerpa-agent v1"

# Folded hands train toward the all-zero target by default. This keeps
# recalibrating the stay-value against the known worth of folding, and a
# scared agent keeps dipping a toe back in, which is what lets it keep
# learning. Switching it off makes cowardice absorbing: once every
# stay-value sits below zero nothing ever lifts it back.
DEFAULT_FOLD_UPDATE = True


def outcome_target(outcome: int | str) -> np.ndarray:
    """Terminal target vector: one-hot over (+3, +2, +1, -3), zeros for a fold."""
    if outcome == FOLD:
        return np.zeros(4)
    try:
        return _TARGETS[outcome].copy()
    except (KeyError, TypeError):
        raise ContractError(f"impossible hand outcome {outcome!r}") from None


@dataclass
class AgentParams:
    """Learning knobs for one TD agent."""

    alpha: float = 0.1
    lam: float = 0.1
    epsilon: float = 0.01
    courage_hands: int = 200
    fold_update: bool = DEFAULT_FOLD_UPDATE
    epsilon_at_knock: bool = True
    clamp_outputs: bool = False

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise InputError(f"alpha must be positive, got {self.alpha}")
        if not 0.0 <= self.lam <= 1.0:
            raise InputError(f"lambda must lie in [0, 1], got {self.lam}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise InputError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.courage_hands < 0:
            raise InputError(f"courage_hands must be >= 0, got {self.courage_hands}")


@dataclass
class Decision:
    """One resolved choice, with the bookkeeping the table logs."""

    kind: str  # "knock", "fold" or "play"
    card: Card | None = None
    forced: bool = False
    exploratory: bool = False
    prediction: float | None = None
    trace: ForwardTrace | None = None


class EligibilityTraces:
    """Per-output traces mirroring the network's weight arrays.

    Output k never touches output rows other than its own, so the
    output-layer traces store only the live row (w2[k] traces W2[k,:])
    and the live bias scalar.
    """

    def __init__(self, n_outputs: int, hidden_dim: int, input_dim: int):
        self.w1 = np.zeros((n_outputs, hidden_dim, input_dim))
        self.b1 = np.zeros((n_outputs, hidden_dim))
        self.w2 = np.zeros((n_outputs, hidden_dim))
        self.b2 = np.zeros(n_outputs)

    def reset(self) -> None:
        self.w1[:] = 0.0
        self.b1[:] = 0.0
        self.w2[:] = 0.0
        self.b2[:] = 0.0

    def decay_and_add(self, lam: float, grads: GradientSet) -> None:
        """e <- lam * e + gradient, independently per output."""
        self.w1 *= lam
        self.w1 += grads.w1
        self.b1 *= lam
        self.b1 += grads.b1
        self.w2 *= lam
        self.w2 += grads.w2_row
        self.b2 *= lam
        self.b2 += 1.0


class TdAgent:
    """Afterstate-evaluating, TD(lambda)-trained Lerpa player."""

    def __init__(self, mlp: Mlp, params: AgentParams, rng: np.random.Generator,
                 hands_played: int = 0):
        self.mlp = mlp
        self.params = params
        self.rng = rng
        self.hands_played = hands_played
        self.traces = EligibilityTraces(mlp.n_outputs, mlp.hidden_dim, mlp.input_dim)
        self.y_prev: np.ndarray | None = None

    @classmethod
    def fresh(cls, rng: np.random.Generator, params: AgentParams | None = None) -> "TdAgent":
        return cls(Mlp.init(rng), params or AgentParams(), rng)

    # Decision making -------------------------------------------------

    def decide_knock(self, obs_stay: np.ndarray) -> Decision:
        """Stage-1 choice. Also starts this hand's TD chain.

        The stay view is always evaluated, even under forced courage or
        an exploratory draw, because it seeds the traces and the
        previous-prediction register for the rest of the hand.
        """
        if self.y_prev is not None:
            raise ContractError("decide_knock called twice without td_terminal")
        trace = self.mlp.forward(obs_stay)
        self._begin_hand(trace)
        p = scalar_prediction(trace.y, self.params.clamp_outputs)
        if self.hands_played < self.params.courage_hands:
            return Decision("knock", forced=True, prediction=p, trace=trace)
        if self.params.epsilon_at_knock and self.rng.random() < self.params.epsilon:
            kind = "knock" if self.rng.integers(2) == 0 else "fold"
            return Decision(kind, exploratory=True, prediction=p, trace=trace)
        # Folding banks exactly 0 chips; ties go to the safe option.
        kind = "knock" if p > 0.0 else "fold"
        return Decision(kind, prediction=p, trace=trace)

    def choose_card(self, candidates: list[tuple[Card, np.ndarray]]) -> Decision:
        """Pick among legal cards by the value of each card's afterstate."""
        if not candidates:
            raise ContractError("choose_card with no candidates")
        traces = [self.mlp.forward(obs) for _, obs in candidates]
        preds = [scalar_prediction(t.y, self.params.clamp_outputs) for t in traces]
        forced = exploratory = False
        if len(candidates) == 1:
            pick = 0
            forced = True
        elif self.rng.random() < self.params.epsilon:
            pick = int(self.rng.integers(len(candidates)))
            exploratory = True
        else:
            best = max(preds)
            tied = [i for i, p in enumerate(preds) if p == best]
            pick = min(tied, key=lambda i: candidates[i][0].deck_index)
        return Decision("play", card=candidates[pick][0], forced=forced,
                        exploratory=exploratory, prediction=preds[pick],
                        trace=traces[pick])

    # Learning ---------------------------------------------------------

    def _begin_hand(self, trace: ForwardTrace) -> None:
        self.traces.reset()
        self.traces.decay_and_add(self.params.lam, self.mlp.grad_outputs(trace))
        self.y_prev = trace.y.copy()

    def td_step(self, trace: ForwardTrace) -> None:
        """Chain a mid-hand prediction: correct traced weights by the
        prediction difference, then fold this prediction's gradient into
        the traces. The gradient is taken at the weights that produced
        the prediction, before the correction is applied."""
        if self.y_prev is None:
            raise ContractError("td_step before the hand's first evaluated decision")
        grads = self.mlp.grad_outputs(trace)
        self._apply(trace.y - self.y_prev)
        self.traces.decay_and_add(self.params.lam, grads)
        self.y_prev = trace.y.copy()

    def td_terminal(self, outcome: int | str) -> None:
        """Close the hand against its true outcome and reset per-hand state."""
        if self.y_prev is None:
            raise ContractError("td_terminal with no evaluated decision this hand "
                                "(called twice?)")
        if outcome != FOLD or self.params.fold_update:
            self._apply(outcome_target(outcome) - self.y_prev)
        self.traces.reset()
        self.y_prev = None
        self.hands_played += 1

    def _apply(self, delta: np.ndarray) -> None:
        a = self.params.alpha
        m, e = self.mlp, self.traces
        m.w1 += a * np.tensordot(delta, e.w1, axes=1)
        m.b1 += a * (delta @ e.b1)
        m.w2 += a * (delta[:, None] * e.w2)
        m.b2 += a * (delta * e.b2)

    # Checkpointing ----------------------------------------------------

    def save(self, path: str | Path) -> None:
        """Checkpoint: parameter header, hand counter, then the weight block."""
        p = self.params
        lines = [
            _AGENT_MAGIC,
            f"alpha {p.alpha!r}",
            f"lambda {p.lam!r}",
            f"epsilon {p.epsilon!r}",
            f"courage {p.courage_hands}",
            f"fold_update {int(p.fold_update)}",
            f"epsilon_at_knock {int(p.epsilon_at_knock)}",
            f"clamp_outputs {int(p.clamp_outputs)}",
            f"hands_played {self.hands_played}",
        ]
        lines.extend(self.mlp.to_lines())
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path, rng: np.random.Generator) -> "TdAgent":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines or lines[0].strip() != _AGENT_MAGIC:
            raise InputError(f"not an agent checkpoint (missing {_AGENT_MAGIC!r})")
        header: dict[str, str] = {}
        for line in lines[1:9]:
            key, _, value = line.partition(" ")
            header[key] = value
        try:
            params = AgentParams(
                alpha=float(header["alpha"]),
                lam=float(header["lambda"]),
                epsilon=float(header["epsilon"]),
                courage_hands=int(header["courage"]),
                fold_update=bool(int(header["fold_update"])),
                epsilon_at_knock=bool(int(header["epsilon_at_knock"])),
                clamp_outputs=bool(int(header["clamp_outputs"])),
            )
            hands_played = int(header["hands_played"])
        except (KeyError, ValueError) as exc:
            raise InputError("bad agent checkpoint header") from exc
        mlp = Mlp._from_lines(lines[9:])
        return cls(mlp, params, rng, hands_played=hands_played)


class RandomAgent:
    """Baseline player: always knocks, plays uniformly random legal cards."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def decide_knock(self) -> Decision:
        return Decision("knock")

    def choose_card(self, legal: list[Card]) -> Decision:
        if not legal:
            raise ContractError("choose_card with no candidates")
        if len(legal) == 1:
            return Decision("play", card=legal[0], forced=True)
        pick = int(self.rng.integers(len(legal)))
        return Decision("play", card=legal[pick])
