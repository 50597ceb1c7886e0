"""The table: hand orchestration, session logs, and log analytics.

One table seats four agents. A hand runs ante, deal (or a fixed
pre-dealt layout), the clockwise knock/fold round starting left of the
dealer, trick play with legality enforced by construction, settlement,
and one terminal learning update per learning agent. Every hand is
recorded fully enough to be re-simulated.

Pre-dealt sessions replay one fixed deal with a fixed dealer so the
same sub-game repeats exactly; they feed the equilibrium and bluff
detectors.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .agents import FOLD, AgentParams, RandomAgent, TdAgent
from .cards import (
    HAND_SIZE,
    N_SEATS,
    Card,
    ContractError,
    InputError,
    Settlement,
    Suit,
    TrickState,
    deal,
    legal_moves,
    parse_card,
    resolve_trick,
    settle_hand,
)
from .encoding import AgentView, OpponentStatus, encode_observation

# Consecutive all-fold redeals before a free-deal session gives up.
MAX_VOID_STREAK = 1000


@dataclass(frozen=True)
class Stage1Record:
    seat: int
    kind: str  # "K" or "F"
    forced: bool
    exploratory: bool
    prediction: float | None


@dataclass(frozen=True)
class PlayRecord:
    seat: int
    card: Card
    prediction: float | None  # None for random agents and forced last cards
    forced: bool
    exploratory: bool


@dataclass(frozen=True)
class HandRecord:
    """Complete audit of one hand."""

    index: int
    dealer: int
    hands: tuple[tuple[Card, ...], ...]
    trump_card: Card
    stage1: tuple[Stage1Record, ...]  # in decision order, dealer's left first
    plays: tuple[PlayRecord, ...]     # chronological
    trick_winners: tuple[int, ...]
    tricks_won: tuple[int, int, int, int]
    deltas: tuple[int, int, int, int]
    lerpad: frozenset[int]
    void: bool

    @property
    def trump(self) -> Suit:
        return self.trump_card.suit

    def stage1_by_seat(self) -> dict[int, Stage1Record]:
        return {rec.seat: rec for rec in self.stage1}


@dataclass
class SessionLog:
    """Ordered hand records plus seat identities for one session."""

    records: list[HandRecord] = field(default_factory=list)
    agent_ids: tuple[str, ...] = ("seat0", "seat1", "seat2", "seat3")
    predealt: bool = False

    @property
    def void_hands(self) -> int:
        return sum(1 for r in self.records if r.void)

    def non_void_records(self) -> list[HandRecord]:
        return [r for r in self.records if not r.void]

    def cumulative_chips(self) -> list[tuple[int, ...]]:
        """Running per-seat chip totals, one entry per record."""
        totals = [0] * N_SEATS
        out = []
        for rec in self.records:
            totals = [t + d for t, d in zip(totals, rec.deltas)]
            out.append(tuple(totals))
        return out


@dataclass(frozen=True)
class PredealtSpec:
    """A fixed deal: four 3-card hands by seat plus the trump card."""

    hands: tuple[tuple[Card, ...], ...]
    trump_card: Card

    def validate(self) -> None:
        if len(self.hands) != N_SEATS or any(len(h) != HAND_SIZE for h in self.hands):
            raise InputError("a pre-dealt layout needs four hands of three cards")
        everything = [c for hand in self.hands for c in hand] + [self.trump_card]
        if len(set(everything)) != len(everything):
            raise InputError("pre-dealt layout repeats a card")


def load_predealt(path: str | Path, dealer: int = 3) -> PredealtSpec:
    """Read the 5-line pre-dealt file.

    The first four lines are hands in seat order clockwise from the
    dealer's left (so the dealer's own hand comes last); the fifth line
    is the trump card token.
    """
    raw = Path(path).read_text(encoding="utf-8")
    lines = [line for line in raw.splitlines() if line.strip()]
    if len(lines) != 5:
        raise InputError(f"pre-dealt file must have 5 non-empty lines, found {len(lines)}")
    hands_by_seat: list[tuple[Card, ...] | None] = [None] * N_SEATS
    for i, line in enumerate(lines[:4]):
        tokens = line.split()
        if len(tokens) != HAND_SIZE:
            raise InputError(f"pre-dealt line {i + 1} must hold 3 card tokens")
        seat = (dealer + 1 + i) % N_SEATS
        hands_by_seat[seat] = tuple(parse_card(t) for t in tokens)
    spec = PredealtSpec(tuple(hands_by_seat), parse_card(lines[4]))  # type: ignore[arg-type]
    spec.validate()
    return spec


class Table:
    """Four seated agents, a dealing stream, and the current dealer."""

    def __init__(self, seats: list[TdAgent | RandomAgent], deal_rng: np.random.Generator,
                 agent_ids: tuple[str, ...] | None = None, dealer_start: int = 3,
                 predealt: PredealtSpec | None = None):
        if len(seats) != N_SEATS:
            raise InputError(f"a table seats exactly {N_SEATS} players")
        self.seats = seats
        self.deal_rng = deal_rng
        self.agent_ids = agent_ids or tuple(f"seat{i}" for i in range(N_SEATS))
        self.dealer = dealer_start
        self.predealt = predealt


@dataclass(frozen=True)
class TableConfig:
    """Declarative table setup: per-seat agent kind and parameters."""

    kinds: tuple[str, str, str, str]  # "td" or "random"
    seed: int
    agent_ids: tuple[str, str, str, str] | None = None
    params: tuple[AgentParams | None, ...] = (None, None, None, None)
    dealer_start: int = 3
    predealt: PredealtSpec | None = None


def make_table(config: TableConfig) -> Table:
    """Build a table with one independent random stream per component."""
    root = np.random.SeedSequence(config.seed)
    deal_ss, *seat_ss = root.spawn(1 + N_SEATS)
    seats: list[TdAgent | RandomAgent] = []
    for seat in range(N_SEATS):
        rng = np.random.default_rng(seat_ss[seat])
        kind = config.kinds[seat]
        if kind == "td":
            seats.append(TdAgent.fresh(rng, config.params[seat]))
        elif kind == "random":
            seats.append(RandomAgent(rng))
        else:
            raise InputError(f"unknown agent kind {kind!r}")
    ids = config.agent_ids or tuple(
        f"{'AI' if k == 'td' else 'R'}{i}" for i, k in enumerate(config.kinds)
    )
    return Table(seats, np.random.default_rng(deal_ss), agent_ids=ids,
                 dealer_start=config.dealer_start, predealt=config.predealt)


def _relative_statuses(me: int, decided: dict[int, str]) -> tuple[OpponentStatus, ...]:
    out = []
    for step in (1, 2, 3):
        seat = (me + step) % N_SEATS
        kind = decided.get(seat)
        if kind is None:
            out.append(OpponentStatus.UNDECIDED)
        elif kind == "K":
            out.append(OpponentStatus.KNOCKED)
        else:
            out.append(OpponentStatus.FOLDED)
    return tuple(out)


def _relative_winners(me: int, winners: list[int]) -> tuple[int | None, int | None]:
    rel = [(w - me) % N_SEATS for w in winners[:2]]
    return (rel[0] if len(rel) > 0 else None, rel[1] if len(rel) > 1 else None)


def play_hand(table: Table, index: int = 0) -> HandRecord:
    """Run one complete hand, training TD agents in place."""
    dealer = table.dealer
    if table.predealt is not None:
        hands = table.predealt.hands
        trump_card = table.predealt.trump_card
    else:
        hands, trump_card, _ = deal(table.deal_rng)
    trump = trump_card.suit
    order = [(dealer + 1 + i) % N_SEATS for i in range(N_SEATS)]

    # Stage 1: knock or fold, clockwise from the dealer's left.
    decided: dict[int, str] = {}
    stage1: list[Stage1Record] = []
    for seat in order:
        agent = table.seats[seat]
        if isinstance(agent, TdAgent):
            view = AgentView(hand=hands[seat], trump=trump,
                             statuses=_relative_statuses(seat, decided))
            decision = agent.decide_knock(encode_observation(view))
        else:
            decision = agent.decide_knock()
        kind = "K" if decision.kind == "knock" else "F"
        decided[seat] = kind
        stage1.append(Stage1Record(seat, kind, decision.forced,
                                   decision.exploratory, decision.prediction))

    stays = [s for s in order if decided[s] == "K"]
    tricks_won = [0] * N_SEATS
    plays: list[PlayRecord] = []
    winners: list[int] = []

    if not stays:
        # Void hand: ante returned, nothing settles. Folders still close
        # their learning chain on the fold outcome.
        for seat in range(N_SEATS):
            agent = table.seats[seat]
            if isinstance(agent, TdAgent):
                agent.td_terminal(FOLD)
        return HandRecord(index, dealer, hands, trump_card, tuple(stage1), (), (),
                          tuple(tricks_won), (0, 0, 0, 0), frozenset(), void=True)

    if len(stays) == 1:
        # Uncontested: the lone stayer is credited all three tricks.
        tricks_won[stays[0]] = HAND_SIZE
    else:
        remaining = {seat: list(hands[seat]) for seat in stays}
        plays_made = {seat: 0 for seat in stays}
        played_seq: list[Card] = []
        leader = stays[0]
        for _ in range(HAND_SIZE):
            trick = TrickState()
            trick_order = [(leader + i) % N_SEATS for i in range(N_SEATS)]
            trick_order = [s for s in trick_order if s in remaining]
            for seat in trick_order:
                agent = table.seats[seat]
                legal = legal_moves(remaining[seat], trick, trump)
                if plays_made[seat] >= 2:
                    # Third card: no choice remains and no evaluation happens.
                    card = legal[0]
                    record = PlayRecord(seat, card, None, True, False)
                elif isinstance(agent, TdAgent):
                    candidates = []
                    for c in legal:
                        obs = _afterstate(seat, c, remaining[seat], trump, played_seq,
                                          decided, winners, trick, len(stays))
                        candidates.append((c, obs))
                    decision = agent.choose_card(candidates)
                    agent.td_step(decision.trace)
                    card = decision.card
                    record = PlayRecord(seat, card, decision.prediction,
                                        decision.forced, decision.exploratory)
                else:
                    decision = agent.choose_card(legal)
                    card = decision.card
                    record = PlayRecord(seat, card, None, decision.forced,
                                        decision.exploratory)
                remaining[seat].remove(card)
                plays_made[seat] += 1
                trick.plays.append((seat, card))
                played_seq.append(card)
                plays.append(record)
            winner = resolve_trick(trick, trump)
            winners.append(winner)
            tricks_won[winner] += 1
            leader = winner

    stays_flags = tuple(decided[s] == "K" for s in range(N_SEATS))
    settlement: Settlement = settle_hand(stays_flags, tricks_won, dealer)

    for seat in range(N_SEATS):
        agent = table.seats[seat]
        if isinstance(agent, TdAgent):
            if decided[seat] == "F":
                agent.td_terminal(FOLD)
            else:
                outcome = tricks_won[seat] if tricks_won[seat] > 0 else -3
                agent.td_terminal(outcome)

    return HandRecord(index, dealer, hands, trump_card, tuple(stage1), tuple(plays),
                      tuple(winners), tuple(tricks_won), settlement.deltas,
                      settlement.lerpad, void=False)


def _afterstate(seat: int, candidate: Card, hand_now: list[Card], trump: Suit,
                played_seq: list[Card], decided: dict[int, str], winners: list[int],
                trick: TrickState, n_stayers: int) -> np.ndarray:
    """The view reached by playing `candidate`, with the trick resolved
    if that card completes it."""
    hand_after = tuple(c for c in hand_now if c != candidate)
    played_after = tuple(played_seq) + (candidate,)
    winners_after = winners
    if len(trick.plays) + 1 == n_stayers:
        probe = TrickState(plays=trick.plays + [(seat, candidate)])
        winners_after = winners + [resolve_trick(probe, trump)]
    view = AgentView(hand=hand_after, trump=trump, played=played_after,
                     statuses=_relative_statuses(seat, decided),
                     trick_winners=_relative_winners(seat, winners_after))
    return encode_observation(view)


def run_session(table: Table, n_hands: int) -> SessionLog:
    """Play n_hands non-void hands with learning on.

    Void (all-fold) hands are logged and redealt by the same dealer; the
    dealer button advances after every completed hand.
    """
    if n_hands < 1:
        raise InputError("n_hands must be >= 1")
    if table.predealt is not None:
        raise ContractError("run_session is for free deals; use run_predealt")
    log = SessionLog(agent_ids=table.agent_ids)
    completed = 0
    void_streak = 0
    while completed < n_hands:
        rec = play_hand(table, index=len(log.records))
        log.records.append(rec)
        if rec.void:
            void_streak += 1
            if void_streak > MAX_VOID_STREAK:
                raise ContractError(
                    "all four seats folded %d hands in a row; the session "
                    "cannot progress" % MAX_VOID_STREAK)
            continue
        void_streak = 0
        completed += 1
        table.dealer = (table.dealer + 1) % N_SEATS
    return log


def run_predealt(table: Table, spec: PredealtSpec, repeats: int) -> SessionLog:
    """Replay one fixed deal `repeats` times with learning on.

    The dealer never rotates, so every repeat is the identical
    situation. All-fold repeats are logged as void and count as repeats
    (redealing a fixed layout would change nothing).
    """
    if repeats < 0:
        raise InputError("repeats must be >= 0")
    spec.validate()
    table.predealt = spec
    log = SessionLog(agent_ids=table.agent_ids, predealt=True)
    for i in range(repeats):
        log.records.append(play_hand(table, index=i))
    return log


# Log analytics ---------------------------------------------------------


def _hand_profile(rec: HandRecord) -> tuple:
    decisions = tuple(sorted((r.seat, r.kind) for r in rec.stage1))
    played = tuple((p.seat, p.card) for p in rec.plays)
    return (decisions, played, rec.deltas)


def detect_equilibrium(log: SessionLog, window: int) -> int | None:
    """First index from which decisions, plays and payouts stay constant
    for `window` consecutive hands; None if that never happens."""
    if window < 2:
        raise InputError("equilibrium window must be >= 2")
    if window > len(log.records):
        raise InputError(f"window {window} exceeds the log's {len(log.records)} hands")
    profiles = [_hand_profile(r) for r in log.records]
    for start in range(len(profiles) - window + 1):
        head = profiles[start]
        if all(profiles[j] == head for j in range(start + 1, start + window)):
            return start
    return None


@dataclass(frozen=True)
class BluffEvent:
    """A completed chase-out pattern in a pre-dealt session.

    The bluffer knocked while the victim folded (the epoch), the bluffer
    later stopped knocking (the switch), and the victim re-entered
    within the re-entry window of that switch.
    """

    bluffer: int
    victim: int
    epoch_index: int
    switch_index: int
    reentry_index: int


def _chosen_timeline(log: SessionLog, seat: int) -> list[tuple[int, str]]:
    """(hand index, K/F) for hands where this seat's stage-1 choice was its
    own: forced and exploratory decisions say nothing about learned play."""
    out = []
    for i, rec in enumerate(log.records):
        s1 = rec.stage1_by_seat()[seat]
        if not s1.forced and not s1.exploratory:
            out.append((i, s1.kind))
    return out


def detect_bluffs(log: SessionLog, k: int = 5) -> list[BluffEvent]:
    """Find chase-out patterns in a pre-dealt session log.

    For each ordered pair (bluffer, victim): look for a stretch where
    the bluffer deliberately knocked, during which the victim
    deliberately folded; then a switch where the bluffer stops knocking;
    then the victim's first deliberate fold-to-knock flip no later than
    k hands after the switch.
    """
    if not log.predealt:
        raise InputError("bluff detection needs a pre-dealt session log")
    if k < 0:
        raise InputError("re-entry window k must be >= 0")
    timelines = {seat: _chosen_timeline(log, seat) for seat in range(N_SEATS)}
    events: list[BluffEvent] = []
    for bluffer in range(N_SEATS):
        tl = timelines[bluffer]
        for pos in range(1, len(tl)):
            if not (tl[pos - 1][1] == "K" and tl[pos][1] == "F"):
                continue
            switch = tl[pos][0]
            # The knock run that ends at this switch.
            run_start_pos = pos - 1
            while run_start_pos > 0 and tl[run_start_pos - 1][1] == "K":
                run_start_pos -= 1
            epoch_hands = {tl[j][0] for j in range(run_start_pos, pos)}
            for victim in range(N_SEATS):
                if victim == bluffer:
                    continue
                vic = timelines[victim]
                folded_in_epoch = [i for i, kind in vic if i in epoch_hands and kind == "F"]
                if not folded_in_epoch:
                    continue
                reentry = _first_reentry(vic, switch, k)
                if reentry is not None:
                    events.append(BluffEvent(bluffer, victim, folded_in_epoch[-1],
                                             switch, reentry))
    return events


def _first_reentry(timeline: list[tuple[int, str]], switch: int, k: int) -> int | None:
    """First fold-to-knock flip at hand index in [switch, switch + k]."""
    for pos in range(1, len(timeline)):
        idx, kind = timeline[pos]
        if idx > switch + k:
            return None
        if idx >= switch and kind == "K" and timeline[pos - 1][1] == "F":
            return idx
    return None


# Session export ---------------------------------------------------------


SESSION_CSV_COLUMNS = ("hand_index", "seat", "agent_id", "dealer_flag", "stage1",
                       "forced", "explore", "tricks_won", "delta", "cumulative",
                       "void_flag")


def write_session_csv(log: SessionLog, path: str | Path) -> None:
    """One row per (hand, seat); see SESSION_CSV_COLUMNS for the schema."""
    cumulative = log.cumulative_chips()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SESSION_CSV_COLUMNS)
        for rec, totals in zip(log.records, cumulative):
            by_seat = rec.stage1_by_seat()
            for seat in range(N_SEATS):
                s1 = by_seat[seat]
                writer.writerow([
                    rec.index, seat, log.agent_ids[seat],
                    int(seat == rec.dealer), s1.kind, int(s1.forced),
                    int(s1.exploratory), rec.tricks_won[seat], rec.deltas[seat],
                    totals[seat], int(rec.void),
                ])
