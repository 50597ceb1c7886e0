"""Rules engine for the card game Lerpa.

Lerpa is a four-player trick-taking betting game played with a 40-card
deck: a standard deck with all 8s, 9s and 10s removed. Ranks run
2 < 3 < 4 < 5 < 6 < J < Q < K < 7 < A, so the 7 is the second
strongest card of every suit. Each player receives three cards and the
next card is flipped to fix the trump suit. Players then elect, in turn,
to play the hand ("knock") or drop out ("fold"); the stayers play out
three tricks. The dealer antes 3 chips, each trick pays 1 chip, and a
stayer who wins no tricks is "Lerpa'd" and pays 3 chips. Lost penalty
chips are not carried over to later hands.

Everything in this module is a pure function over immutable values,
except that dealing consumes a caller-owned random generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class ContractError(RuntimeError):
    """An engine-internal contract was violated (a bug, not bad input)."""


class InputError(ValueError):
    """User-supplied data (files, CLI values) is malformed."""


class Suit(Enum):
    CLUBS = "C"
    DIAMONDS = "D"
    HEARTS = "H"
    SPADES = "S"

    def __str__(self) -> str:
        return self.value


SUITS: tuple[Suit, ...] = (Suit.CLUBS, Suit.DIAMONDS, Suit.HEARTS, Suit.SPADES)

# Ranks listed from weakest to strongest; the index is the rank ordinal.
RANKS: tuple[str, ...] = ("2", "3", "4", "5", "6", "J", "Q", "K", "7", "A")
RANK_ORDER: dict[str, int] = {rank: i for i, rank in enumerate(RANKS)}

N_SEATS = 4
HAND_SIZE = 3
DECK_SIZE = 40
POT = 3  # dealer ante, trick total, and the Lerpa penalty are all 3 chips


@dataclass(frozen=True)
class Card:
    rank: str
    suit: Suit

    def __post_init__(self) -> None:
        if self.rank not in RANK_ORDER:
            raise InputError(f"unknown rank {self.rank!r}")

    @property
    def ordinal(self) -> int:
        """Strength within a suit, 0 (the 2) through 9 (the ace)."""
        return RANK_ORDER[self.rank]

    @property
    def deck_index(self) -> int:
        """Position in the canonical deck; doubles as the canonical card order."""
        return SUITS.index(self.suit) * 10 + self.ordinal

    def __str__(self) -> str:
        return f"{self.rank}{self.suit.value}"


_SUIT_BY_LETTER = {s.value: s for s in SUITS}


def parse_card(text: str) -> Card:
    """Parse the two-character card token, e.g. "AD" or "7H"."""
    token = text.strip()
    if len(token) != 2:
        raise InputError(f"bad card token {text!r} (want rank then suit, e.g. 'AD')")
    rank, suit_letter = token[0], token[1]
    if rank not in RANK_ORDER:
        raise InputError(f"bad rank in card token {text!r}")
    if suit_letter not in _SUIT_BY_LETTER:
        raise InputError(f"bad suit in card token {text!r}")
    return Card(rank, _SUIT_BY_LETTER[suit_letter])


def build_deck() -> list[Card]:
    """The 40-card deck in canonical order: suits C, D, H, S, ranks ascending."""
    return [Card(rank, suit) for suit in SUITS for rank in RANKS]


_CANONICAL_DECK = tuple(build_deck())


def deal(rng: np.random.Generator) -> tuple[tuple[tuple[Card, ...], ...], Card, tuple[Card, ...]]:
    """Shuffle and deal one hand.

    Returns (hands, trump_card, remaining): four disjoint 3-card hands
    indexed by seat, the flipped card whose suit is trump, and the rest
    of the deck. The trump card is never part of any hand.
    """
    order = rng.permutation(DECK_SIZE)
    shuffled = [_CANONICAL_DECK[i] for i in order]
    hands = tuple(
        tuple(shuffled[seat * HAND_SIZE : (seat + 1) * HAND_SIZE]) for seat in range(N_SEATS)
    )
    trump_card = shuffled[N_SEATS * HAND_SIZE]
    remaining = tuple(shuffled[N_SEATS * HAND_SIZE + 1 :])
    return hands, trump_card, remaining


@dataclass
class TrickState:
    """Cards on the table for the current trick, in play order."""

    plays: list[tuple[int, Card]] = field(default_factory=list)

    @property
    def led_suit(self) -> Suit | None:
        return self.plays[0][1].suit if self.plays else None


def ace_of(trump: Suit) -> Card:
    return Card("A", trump)


def legal_moves(hand: tuple[Card, ...] | list[Card], trick: TrickState, trump: Suit) -> list[Card]:
    """Cards this seat may play, in canonical card order.

    Follow-suit rules: the leader may play anything; a follower holding
    the led suit must play it; a follower void in the led suit may play
    any card (trumping is allowed, never required). On top of that, if
    the ace of trumps is among the otherwise-playable cards it must be
    played, even when leading.
    """
    if not hand:
        raise ContractError("legal_moves called with an empty hand")
    led = trick.led_suit
    if led is None:
        candidates = list(hand)
    else:
        in_suit = [c for c in hand if c.suit == led]
        candidates = in_suit if in_suit else list(hand)
    forced_ace = ace_of(trump)
    if forced_ace in candidates:
        return [forced_ace]
    return sorted(candidates, key=lambda c: c.deck_index)


def resolve_trick(trick: TrickState, trump: Suit) -> int:
    """Seat that wins a completed trick.

    Highest trump wins if any trump was played, otherwise the highest
    card of the led suit. Off-suit non-trump cards never win.
    """
    plays = trick.plays
    if len(plays) < 2 or len(plays) > N_SEATS:
        raise ContractError(f"resolve_trick needs a complete trick, got {len(plays)} plays")
    if len({seat for seat, _ in plays}) != len(plays):
        raise ContractError("duplicate seat in trick")
    led = plays[0][1].suit
    trumps = [(seat, card) for seat, card in plays if card.suit == trump]
    pool = trumps if trumps else [(seat, card) for seat, card in plays if card.suit == led]
    winner, _ = max(pool, key=lambda sc: sc[1].ordinal)
    return winner


@dataclass(frozen=True)
class Settlement:
    """Chip movement for one settled hand.

    deltas holds the per-seat chip change including the dealer's ante;
    lerpad holds the seats that stayed in and won nothing. With at least
    one stayer the deltas sum to -3 per Lerpa'd seat (penalty chips leave
    the table). A hand in which everyone folds is void: the ante is
    returned and every delta is zero.
    """

    deltas: tuple[int, int, int, int]
    lerpad: frozenset[int]


def settle_hand(stays: tuple[bool, ...] | list[bool],
                tricks_won: tuple[int, ...] | list[int],
                dealer: int) -> Settlement:
    """Settle chips after a hand.

    A lone stayer is credited all three tricks by the caller. The all-fold
    case is void: zero deltas, ante returned.
    """
    if len(stays) != N_SEATS or len(tricks_won) != N_SEATS:
        raise ContractError("settle_hand expects per-seat stays and trick counts")
    if not 0 <= dealer < N_SEATS:
        raise ContractError(f"bad dealer seat {dealer}")
    for seat in range(N_SEATS):
        if not stays[seat] and tricks_won[seat] != 0:
            raise ContractError(f"folded seat {seat} cannot win tricks")
    staying_total = sum(tricks_won[s] for s in range(N_SEATS) if stays[s])
    if any(stays):
        if staying_total != HAND_SIZE:
            raise ContractError(f"staying seats won {staying_total} tricks, expected {HAND_SIZE}")
    elif staying_total != 0:
        raise ContractError("void hand cannot have tricks")

    if not any(stays):
        return Settlement((0, 0, 0, 0), frozenset())

    deltas = [0] * N_SEATS
    lerpad = set()
    for seat in range(N_SEATS):
        if stays[seat]:
            if tricks_won[seat] > 0:
                deltas[seat] = tricks_won[seat]
            else:
                deltas[seat] = -POT
                lerpad.add(seat)
    deltas[dealer] -= POT
    return Settlement(tuple(deltas), frozenset(lerpad))
