"""Binary observation encoding for Lerpa agents.

An agent never sees raw suits. Suits are renamed by the role they play
in its own hand (trump, a suit held in multiple, or the highest, second
or third singleton), and cards already on the table are described only
by how they compare with the agent's remaining cards of the same suit.
This keeps the observation identical under any relabeling of the four
physical suits and collapses the six orderings of a hand into one code.

The observation is a fixed vector of 81 bits:

    3 hand cards x 7 bits   (3-bit suit class + 4-bit rank ordinal)   21
    8 played slots x 6 bits (3-bit suit class + 3-bit value class)    48
    3 opponents x 2 bits    (00 undecided, 01 knocked, 10 folded)      6
    2 trick winners x 3 bits (0 none, else 1 + winner's relative seat)  6

Opponents and winner seats are counted clockwise from the agent. Unused
hand and played slots are all-zero. Values are packed most significant
bit first. The `layout_table` function prints the full field map.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .cards import Card, ContractError, Suit, ace_of

OBS_BITS = 81
HAND_SLOTS = 3
HAND_CARD_BITS = 7
PLAYED_SLOTS = 8
PLAYED_SLOT_BITS = 6
HAND_OFFSET = 0
PLAYED_OFFSET = HAND_SLOTS * HAND_CARD_BITS            # 21
STATUS_OFFSET = PLAYED_OFFSET + PLAYED_SLOTS * PLAYED_SLOT_BITS  # 69
WINNER_OFFSET = STATUS_OFFSET + 3 * 2                  # 75


class HandSuitClass(IntEnum):
    """Role of a suit within the agent's own hand."""

    TRUMP = 0
    MULTIPLE_NON_TRUMP = 1
    HIGHEST_SINGLETON = 2
    SECOND_SINGLETON = 3
    THIRD_SINGLETON = 4


class PlayedSuitClass(IntEnum):
    """Role of a played card's suit, including suits the agent is void in."""

    TRUMP = 0
    MULTIPLE_NON_TRUMP = 1
    HIGHEST_SINGLETON = 2
    SECOND_SINGLETON = 3
    THIRD_SINGLETON = 4
    VOID = 5


class PlayedValueClass(IntEnum):
    """A played card's strength relative to the agent's same-suit holdings."""

    HIGHER_THAN_ALL = 0
    HIGHER_THAN_SECOND = 1
    HIGHER_THAN_THIRD = 2
    LOWER_THAN_ANY = 3
    VOID_MEMBER = 4
    ACE_OF_TRUMPS = 5


class OpponentStatus(IntEnum):
    UNDECIDED = 0
    KNOCKED = 1
    FOLDED = 2


# Tie-break for singletons of equal rank: spades > hearts > diamonds > clubs.
_SINGLETON_TIEBREAK = {Suit.SPADES: 3, Suit.HEARTS: 2, Suit.DIAMONDS: 1, Suit.CLUBS: 0}

_SINGLETON_CLASSES = (
    HandSuitClass.HIGHEST_SINGLETON,
    HandSuitClass.SECOND_SINGLETON,
    HandSuitClass.THIRD_SINGLETON,
)


def classify_hand_suits(cards: tuple[Card, ...] | list[Card],
                        trump: Suit) -> dict[Suit, HandSuitClass]:
    """Map each suit the agent holds to its role class.

    The trump suit (if held) is always TRUMP; a non-trump suit held in
    multiple is MULTIPLE_NON_TRUMP; remaining held suits are singletons
    ranked by their card's ordinal, highest first.
    """
    by_suit: dict[Suit, list[Card]] = {}
    for card in cards:
        by_suit.setdefault(card.suit, []).append(card)
    classes: dict[Suit, HandSuitClass] = {}
    singletons: list[tuple[int, int, Suit]] = []
    for suit, held in by_suit.items():
        if suit == trump:
            classes[suit] = HandSuitClass.TRUMP
        elif len(held) >= 2:
            classes[suit] = HandSuitClass.MULTIPLE_NON_TRUMP
        else:
            singletons.append((held[0].ordinal, _SINGLETON_TIEBREAK[suit], suit))
    singletons.sort(reverse=True)
    for position, (_, _, suit) in enumerate(singletons):
        classes[suit] = _SINGLETON_CLASSES[position]
    return classes


def _put_bits(bits: np.ndarray, offset: int, width: int, value: int) -> None:
    for i in range(width):
        if (value >> (width - 1 - i)) & 1:
            bits[offset + i] = 1.0


def encode_hand(cards: tuple[Card, ...] | list[Card], trump: Suit) -> np.ndarray:
    """21 bits describing the agent's (remaining) hand.

    Cards are sorted by suit class then by ordinal descending, which
    makes the code order-free; slots beyond the held cards stay zero.
    """
    bits = np.zeros(HAND_SLOTS * HAND_CARD_BITS)
    classes = classify_hand_suits(cards, trump)
    ordered = sorted(cards, key=lambda c: (classes[c.suit], -c.ordinal))
    for slot, card in enumerate(ordered):
        base = slot * HAND_CARD_BITS
        _put_bits(bits, base, 3, int(classes[card.suit]))
        _put_bits(bits, base + 3, 4, card.ordinal)
    return bits


def _played_classes(card: Card,
                    classes: dict[Suit, HandSuitClass],
                    suit_ordinals: dict[Suit, list[int]],
                    trump: Suit) -> tuple[PlayedSuitClass, PlayedValueClass]:
    held = suit_ordinals.get(card.suit)
    if held is None:
        suit_class = PlayedSuitClass.VOID
    else:
        suit_class = PlayedSuitClass(int(classes[card.suit]))
    if card == ace_of(trump):
        # Overrides every other grouping, including membership of a void suit.
        return suit_class, PlayedValueClass.ACE_OF_TRUMPS
    if held is None:
        return suit_class, PlayedValueClass.VOID_MEMBER
    beaten = sum(1 for o in held if card.ordinal > o)
    if beaten == 0:
        value = PlayedValueClass.LOWER_THAN_ANY
    elif beaten == len(held):
        value = PlayedValueClass.HIGHER_THAN_ALL
    elif beaten == len(held) - 1:
        value = PlayedValueClass.HIGHER_THAN_SECOND
    else:
        value = PlayedValueClass.HIGHER_THAN_THIRD
    return suit_class, value


def encode_played_card(card: Card,
                       my_cards: tuple[Card, ...] | list[Card],
                       trump: Suit) -> np.ndarray:
    """6 bits for one card on the table, relative to the agent's current hand."""
    classes = classify_hand_suits(my_cards, trump)
    suit_ordinals: dict[Suit, list[int]] = {}
    for c in my_cards:
        suit_ordinals.setdefault(c.suit, []).append(c.ordinal)
    suit_class, value_class = _played_classes(card, classes, suit_ordinals, trump)
    bits = np.zeros(PLAYED_SLOT_BITS)
    _put_bits(bits, 0, 3, int(suit_class))
    _put_bits(bits, 3, 3, int(value_class))
    return bits


@dataclass(frozen=True)
class AgentView:
    """One seat's view of the table at a decision or evaluation point.

    hand is the agent's remaining cards, played is every card on the
    table so far in play order, statuses covers the three opponents
    clockwise from the agent, and trick_winners gives the relative seat
    (0 = self) of each completed trick's winner, None while incomplete.
    """

    hand: tuple[Card, ...]
    trump: Suit
    played: tuple[Card, ...] = ()
    statuses: tuple[OpponentStatus, OpponentStatus, OpponentStatus] = (
        OpponentStatus.UNDECIDED,
        OpponentStatus.UNDECIDED,
        OpponentStatus.UNDECIDED,
    )
    trick_winners: tuple[int | None, int | None] = (None, None)


def encode_observation(view: AgentView) -> np.ndarray:
    """The full 81-bit observation vector for one view."""
    if len(view.played) > PLAYED_SLOTS:
        raise ContractError(f"{len(view.played)} played cards exceed {PLAYED_SLOTS} slots")
    if len(view.trick_winners) > 2:
        raise ContractError("more than two completed tricks in a view")
    bits = np.zeros(OBS_BITS)

    classes = classify_hand_suits(view.hand, view.trump)
    ordered = sorted(view.hand, key=lambda c: (classes[c.suit], -c.ordinal))
    for slot, card in enumerate(ordered):
        base = HAND_OFFSET + slot * HAND_CARD_BITS
        _put_bits(bits, base, 3, int(classes[card.suit]))
        _put_bits(bits, base + 3, 4, card.ordinal)

    suit_ordinals: dict[Suit, list[int]] = {}
    for c in view.hand:
        suit_ordinals.setdefault(c.suit, []).append(c.ordinal)
    for slot, card in enumerate(view.played):
        suit_class, value_class = _played_classes(card, classes, suit_ordinals, view.trump)
        base = PLAYED_OFFSET + slot * PLAYED_SLOT_BITS
        _put_bits(bits, base, 3, int(suit_class))
        _put_bits(bits, base + 3, 3, int(value_class))

    for i, status in enumerate(view.statuses):
        _put_bits(bits, STATUS_OFFSET + 2 * i, 2, int(status))

    for i, winner in enumerate(view.trick_winners):
        if winner is not None:
            _put_bits(bits, WINNER_OFFSET + 3 * i, 3, 1 + winner)
    return bits


LAYOUT: tuple[tuple[str, int, int], ...] = tuple(
    [(f"hand{i}.suit_class", HAND_OFFSET + i * 7, 3) for i in range(HAND_SLOTS)]
    + [(f"hand{i}.rank_ordinal", HAND_OFFSET + i * 7 + 3, 4) for i in range(HAND_SLOTS)]
    + [(f"played{i}.suit_class", PLAYED_OFFSET + i * 6, 3) for i in range(PLAYED_SLOTS)]
    + [(f"played{i}.value_class", PLAYED_OFFSET + i * 6 + 3, 3) for i in range(PLAYED_SLOTS)]
    + [(f"opponent{i}.status", STATUS_OFFSET + 2 * (i - 1), 2) for i in (1, 2, 3)]
    + [(f"trick{i}.winner", WINNER_OFFSET + 3 * (i - 1), 3) for i in (1, 2)]
)
LAYOUT = tuple(sorted(LAYOUT, key=lambda f: f[1]))


def layout_table() -> str:
    """Plain-text table of every observation field, its offset and width."""
    lines = [f"{'field':<24}{'offset':>8}{'width':>8}"]
    for name, offset, width in LAYOUT:
        lines.append(f"{name:<24}{offset:>8}{width:>8}")
    lines.append(f"{'total':<24}{'':>8}{OBS_BITS:>8}")
    return "\n".join(lines)
