import pytest

from bernshap import BernoulliGame
from bernshap.refvalues import (
    ALL_TABLES,
    THREE_PLAYER_EXAMPLE,
    match_reference_table,
    reference_discrepancies,
)


class TestReferenceTables:
    def test_every_table_builds_a_game(self):
        for table in ALL_TABLES:
            game = table.game()
            assert game.n == len(table.probs)
            if table.exact is not None:
                assert len(table.exact) == game.n

    def test_match_by_probabilities(self):
        g = BernoulliGame.from_probs(["1/2", "1/3", "1/6"])
        assert match_reference_table(g) is THREE_PLAYER_EXAMPLE
        assert match_reference_table(BernoulliGame.from_probs(["1/7"])) is None


class TestDiscrepancies:
    def test_known_inconsistencies_are_listed(self):
        found = reference_discrepancies(threshold=1e-3)
        assert found, "the bundled tables carry known-inconsistent entries"
        # the detailed seven-player table's fifth entry is the canonical one
        entry = next(
            d
            for d in found
            if d.table == "seven-player-detailed" and d.player == 5
        )
        assert entry.reference == pytest.approx(0.030815)
        assert entry.oracle == pytest.approx(0.027318, abs=5e-7)

    def test_three_player_example_flagged(self):
        found = reference_discrepancies(threshold=1e-3)
        players = {d.player for d in found if d.table == "three-player-example"}
        assert players == {1, 2, 3}  # none of the printed entries is the oracle

    def test_threshold_filters(self):
        assert reference_discrepancies(threshold=10.0) == []
