"""Rules engine tests: deck, dealing, legality, tricks, settlement."""

import numpy as np
import pytest

from lerpa.cards import (
    RANK_ORDER,
    Card,
    ContractError,
    InputError,
    Suit,
    TrickState,
    build_deck,
    deal,
    legal_moves,
    parse_card,
    resolve_trick,
    settle_hand,
)

from oracle_helpers import legal_by_rule_table, random_position, replay_winner


def C(text: str) -> Card:
    return parse_card(text)


class TestDeck:
    def test_forty_unique_cards(self):
        deck = build_deck()
        assert len(deck) == 40
        assert len(set(deck)) == 40

    def test_ten_per_suit(self):
        deck = build_deck()
        for suit in Suit:
            assert sum(1 for c in deck if c.suit == suit) == 10

    def test_membership(self):
        deck = build_deck()
        assert C("AD") in deck
        assert C("7C") in deck

    def test_no_eights_nines_tens(self):
        for card in build_deck():
            assert card.rank not in ("8", "9", "10")
        with pytest.raises(InputError):
            Card("9", Suit.HEARTS)

    def test_canonical_order(self):
        deck = build_deck()
        assert [c.deck_index for c in deck] == list(range(40))
        assert str(deck[0]) == "2C"
        assert str(deck[39]) == "AS"


class TestRankOrder:
    def test_total_order(self):
        ordinals = [RANK_ORDER[r] for r in ("2", "3", "4", "5", "6", "J", "Q", "K", "7", "A")]
        assert ordinals == sorted(ordinals)
        assert len(set(ordinals)) == 10

    def test_pinned_ordinals(self):
        assert RANK_ORDER["2"] == 0
        assert RANK_ORDER["7"] == 8
        assert RANK_ORDER["A"] == 9

    def test_seven_beats_king(self):
        assert C("7H").ordinal > C("KH").ordinal
        assert C("7H").ordinal < C("AH").ordinal


class TestCardText:
    def test_round_trip(self):
        for card in build_deck():
            assert parse_card(str(card)) == card

    @pytest.mark.parametrize("bad", ["", "A", "ADX", "8D", "AX", "1H"])
    def test_bad_tokens(self, bad):
        with pytest.raises(InputError):
            parse_card(bad)


class TestDeal:
    def test_deterministic_for_seed(self):
        a = deal(np.random.default_rng(77))
        b = deal(np.random.default_rng(77))
        assert a == b

    def test_thirteen_distinct_cards(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            hands, trump_card, remaining = deal(rng)
            dealt = [c for h in hands for c in h] + [trump_card]
            assert len(set(dealt)) == 13
            assert len(remaining) == 27
            assert trump_card not in {c for h in hands for c in h}

    def test_uniform_card_frequency(self):
        # Binomial oracle: each card lands in a hand w.p. 12/40 per deal.
        n = 10_000
        rng = np.random.default_rng(4)
        counts = {card: 0 for card in build_deck()}
        for _ in range(n):
            hands, _, _ = deal(rng)
            for hand in hands:
                for card in hand:
                    counts[card] += 1
        p = 12 / 40
        sigma = (n * p * (1 - p)) ** 0.5
        for card, count in counts.items():
            assert abs(count - n * p) <= 3 * sigma, f"{card}: {count}"


class TestLegalMoves:
    def test_forced_ace_of_trumps_when_leading(self):
        hand = [C("AD"), C("KH"), C("2C")]
        assert legal_moves(hand, TrickState(), Suit.DIAMONDS) == [C("AD")]

    def test_must_follow_suit(self):
        hand = [C("KH"), C("2H"), C("3C")]
        trick = TrickState(plays=[(1, C("5H"))])
        assert set(legal_moves(hand, trick, Suit.DIAMONDS)) == {C("KH"), C("2H")}

    def test_void_in_led_suit_plays_anything(self):
        hand = [C("3C"), C("4S"), C("2D")]
        trick = TrickState(plays=[(1, C("5H"))])
        assert set(legal_moves(hand, trick, Suit.DIAMONDS)) == set(hand)

    def test_ace_not_forced_when_unplayable(self):
        # Holding the led suit blocks the ace of trumps entirely.
        hand = [C("AD"), C("2H")]
        trick = TrickState(plays=[(1, C("5H"))])
        assert legal_moves(hand, trick, Suit.DIAMONDS) == [C("2H")]

    def test_empty_hand_is_contract_error(self):
        with pytest.raises(ContractError):
            legal_moves([], TrickState(), Suit.CLUBS)

    def test_agrees_with_rule_table(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            hand, trick, trump = random_position(rng)
            assert set(legal_moves(hand, trick, trump)) == \
                legal_by_rule_table(hand, trick, trump)


class TestResolveTrick:
    def test_highest_in_led_suit(self):
        trick = TrickState(plays=[(0, C("KH")), (1, C("AH")), (2, C("2H"))])
        assert resolve_trick(trick, Suit.DIAMONDS) == 1

    def test_any_trump_beats_led_suit(self):
        trick = TrickState(plays=[(0, C("AH")), (1, C("2D")), (2, C("3H"))])
        assert resolve_trick(trick, Suit.DIAMONDS) == 1

    def test_highest_trump_wins_trump_led(self):
        trick = TrickState(plays=[(0, C("2D")), (1, C("7D")), (2, C("AD"))])
        assert resolve_trick(trick, Suit.DIAMONDS) == 2

    def test_incomplete_trick_rejected(self):
        with pytest.raises(ContractError):
            resolve_trick(TrickState(plays=[(0, C("2H"))]), Suit.CLUBS)

    def test_agrees_with_replay_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(500):
            hands, trump_card, _ = deal(rng)
            n = int(rng.integers(2, 5))
            plays = [(seat, hands[seat][0]) for seat in range(n)]
            trick = TrickState(plays=list(plays))
            assert resolve_trick(trick, trump_card.suit) == \
                replay_winner(plays, trump_card.suit)

    def test_winner_monotone_under_stronger_card(self):
        # Swapping the winning card for any stronger same-suit card that is
        # not already on the table must keep the same winner.
        rng = np.random.default_rng(7)
        checked = 0
        while checked < 300:
            hands, trump_card, _ = deal(rng)
            plays = [(seat, hands[seat][0]) for seat in range(4)]
            trick = TrickState(plays=list(plays))
            winner = resolve_trick(trick, trump_card.suit)
            winning_card = dict(plays)[winner]
            on_table = {card for _, card in plays}
            for rank, ordinal in RANK_ORDER.items():
                if ordinal <= winning_card.ordinal:
                    continue
                stronger = Card(rank, winning_card.suit)
                if stronger in on_table:
                    continue
                swapped = [(s, stronger if s == winner else c) for s, c in plays]
                assert resolve_trick(TrickState(plays=swapped), trump_card.suit) == winner
                checked += 1


class TestSettlement:
    def test_dealer_lerpad_among_stayers(self):
        s = settle_hand([True, True, True, False], [0, 2, 1, 0], dealer=0)
        assert s.deltas == (-6, 2, 1, 0)
        assert s.lerpad == {0}
        assert sum(s.deltas) == -3

    def test_single_nondealer_stayer(self):
        s = settle_hand([False, True, False, False], [0, 3, 0, 0], dealer=0)
        assert s.deltas == (-3, 3, 0, 0)
        assert s.lerpad == frozenset()
        assert sum(s.deltas) == 0

    def test_dealer_stays_alone(self):
        s = settle_hand([True, False, False, False], [3, 0, 0, 0], dealer=0)
        assert s.deltas == (0, 0, 0, 0)

    def test_all_fold_is_void(self):
        s = settle_hand([False] * 4, [0] * 4, dealer=2)
        assert s.deltas == (0, 0, 0, 0)
        assert s.lerpad == frozenset()

    def test_zero_sum_ledger(self):
        rng = np.random.default_rng(8)
        for _ in range(2000):
            stays = [bool(rng.integers(2)) for _ in range(4)]
            tricks = [0] * 4
            stayers = [s for s in range(4) if stays[s]]
            if stayers:
                for _ in range(3):
                    tricks[stayers[int(rng.integers(len(stayers)))]] += 1
            s = settle_hand(stays, tricks, dealer=int(rng.integers(4)))
            if stayers:
                assert sum(s.deltas) == -3 * len(s.lerpad)
            else:
                assert sum(s.deltas) == 0

    def test_folded_seat_with_tricks_rejected(self):
        with pytest.raises(ContractError):
            settle_hand([False, True, True, False], [1, 1, 1, 0], dealer=0)

    def test_wrong_trick_total_rejected(self):
        with pytest.raises(ContractError):
            settle_hand([True, True, False, False], [1, 1, 0, 0], dealer=0)
