import numpy as np
import pytest
from scipy.stats import binomtest, chisquare

from src.environment.world import LandClass, build_world
from src.exceptions import ConfigurationError, TableParseError, ValidationError
from src.population.census import (
    AGE_BINS,
    CensusTable,
    ODMatrix,
    bin_bounds,
    load_census_csv,
    load_od_csv,
    parse_age_bin,
)
from src.population.locations import assign_locations
from src.population.synthesis import AgentGroup, agents_frame, group_counts, group_of, synthesize

from .helpers import residential_world


class TestCensus:
    @pytest.mark.parametrize("label,expected", [
        ("05-09", "5-9"),
        ("20-24", "20-24"),
        ("85+", "85+"),
        ("85 over", "85+"),
    ])
    def test_parse_age_bin(self, label, expected):
        assert parse_age_bin(label) == expected

    @pytest.mark.parametrize("label", ["3-7", "0-4", "adult", "90+"])
    def test_unknown_age_bin(self, label):
        with pytest.raises(ValidationError):
            parse_age_bin(label)

    def test_bins_cover_five_to_eighty_five_plus(self):
        assert AGE_BINS[0] == "5-9"
        assert AGE_BINS[-1] == "85+"
        assert len(AGE_BINS) == 17
        assert bin_bounds("85+", oldest_age=99) == (85, 99)

    def test_load_census_merges_labels(self, tmp_path):
        path = tmp_path / "census.csv"
        path.write_text("district,age_bin,count\na,05-09,10\na,5-9,5\nb,85 over,3\n", encoding="utf-8")

        census = load_census_csv(path)

        assert census.counts == {"a": {"5-9": 15}, "b": {"85+": 3}}
        assert census.total() == 18

    def test_load_od(self, tmp_path):
        path = tmp_path / "od.csv"
        path.write_text("origin,destination,trips\na,a,3\na,b,1\n", encoding="utf-8")

        names, probs = load_od_csv(path).destinations("a")

        assert names == ["a", "b"]
        np.testing.assert_allclose(probs, [0.75, 0.25])

    def test_od_row_without_trips(self):
        od = ODMatrix({"a": {"a": 0.0}})
        with pytest.raises(ConfigurationError):
            od.destinations("a")
        with pytest.raises(ConfigurationError):
            od.destinations("b")

    def test_negative_count(self):
        with pytest.raises(ValidationError):
            CensusTable({"a": {"5-9": -1}})

    @pytest.mark.parametrize("count", ["abc", "2.5", ""])
    def test_bad_census_count_names_the_line(self, tmp_path, count):
        path = tmp_path / "census.csv"
        path.write_text(f"district,age_bin,count\na,5-9,10\na,10-14,{count}\n", encoding="utf-8")

        with pytest.raises(TableParseError) as info:
            load_census_csv(path)

        assert info.value.line == 3
        assert "census.csv" in str(info.value)

    def test_bad_census_age_bin_names_the_line(self, tmp_path):
        path = tmp_path / "census.csv"
        path.write_text("district,age_bin,count\na,adult,10\n", encoding="utf-8")

        with pytest.raises(TableParseError) as info:
            load_census_csv(path)

        assert info.value.line == 2

    def test_census_missing_column(self, tmp_path):
        path = tmp_path / "census.csv"
        path.write_text("district,count\na,10\n", encoding="utf-8")

        with pytest.raises(TableParseError, match="age_bin"):
            load_census_csv(path)

    def test_bad_od_trips(self, tmp_path):
        path = tmp_path / "od.csv"
        path.write_text("origin,destination,trips\na,a,3\na,b,many\n", encoding="utf-8")

        with pytest.raises(TableParseError) as info:
            load_od_csv(path)

        assert info.value.line == 3
        assert isinstance(info.value, ValidationError)

    def test_empty_od_file(self, tmp_path):
        path = tmp_path / "od.csv"
        path.write_text("", encoding="utf-8")

        with pytest.raises(TableParseError):
            load_od_csv(path)


class TestSynthesis:
    @pytest.mark.parametrize("age,group", [
        (5, AgentGroup.YOUNG),
        (14, AgentGroup.YOUNG),
        (15, AgentGroup.ACTIVE),
        (64, AgentGroup.ACTIVE),
        (65, AgentGroup.OLD),
        (99, AgentGroup.OLD),
    ])
    def test_group_boundaries(self, age, group):
        assert group_of(age) is group

    def test_sample_size_is_exact_for_whole_expectations(self):
        census = CensusTable({"a": {"20-24": 1000, "70-74": 400}})

        agents = synthesize(census, rate=0.05, seed=1)

        assert len(agents) == 70
        assert group_counts(agents) == {"young": 0, "active": 50, "old": 20}
        assert [a.id for a in agents] == list(range(70))

    def test_fractional_expectation_rounds_either_way(self):
        census = CensusTable({"a": {"20-24": 10}})
        sizes = {len(synthesize(census, rate=0.05, seed=s)) for s in range(40)}
        assert sizes == {0, 1}

    def test_ages_fall_inside_their_bin(self):
        census = CensusTable({"a": {label: 200 for label in AGE_BINS}})

        agents = synthesize(census, rate=0.5, seed=3, oldest_age=99)

        for agent in agents:
            lo, hi = bin_bounds(agent.age_bin, 99)
            assert lo <= agent.age <= hi
            assert agent.group is group_of(agent.age)

    def test_same_seed_same_population(self):
        census = CensusTable({"a": {"30-34": 300}, "b": {"5-9": 300}})
        assert synthesize(census, 0.1, seed=9) == synthesize(census, 0.1, seed=9)

    @pytest.mark.parametrize("rate", [0.0, -0.1, 1.5])
    def test_rate_out_of_range(self, rate):
        with pytest.raises(ValidationError):
            synthesize(CensusTable({"a": {"5-9": 10}}), rate=rate)

    def test_empty_census(self):
        with pytest.raises(ValidationError):
            synthesize(CensusTable({"a": {"5-9": 0}}))


class TestLocations:
    def census(self):
        return CensusTable({"a": {"5-9": 20, "30-34": 40, "70-74": 20}})

    def mixed_world(self, district="a"):
        cover = np.array([
            [110, 110, 120, 150],
            [0, 110, 120, 0],
        ])
        price = np.where(cover == LandClass.RESIDENTIAL, 2, 0)
        return build_world(cover, price, district)

    def test_homes_are_residential_and_work_is_walkable(self):
        world = self.mixed_world()
        agents = synthesize(self.census(), rate=1.0, seed=0)

        placed = assign_locations(agents, world, ODMatrix({"a": {"a": 1.0}}), seed=4)

        residential = set(world.residential_index.tolist())
        walkable = set(world.walkable_index.tolist())
        for agent in placed:
            assert agent.home_cell in residential
            if agent.group is AgentGroup.ACTIVE:
                assert agent.work_cell in walkable
                assert agent.work_district == "a"
            else:
                assert agent.work_cell is None
            assert not agent.cross_district

    def test_commuters_to_other_districts_are_flagged(self):
        worlds = {"a": self.mixed_world("a"), "b": residential_world("b")}
        agents = synthesize(self.census(), rate=1.0, seed=0)

        placed = assign_locations(agents, worlds, ODMatrix({"a": {"b": 1.0}}), seed=4)

        active = [a for a in placed if a.group is AgentGroup.ACTIVE]
        assert active and all(a.cross_district and a.work_district == "b" for a in active)
        assert not any(a.cross_district for a in placed if a.group is not AgentGroup.ACTIVE)

    def test_destination_outside_the_region(self):
        agents = synthesize(self.census(), rate=1.0, seed=0)

        placed = assign_locations(agents, self.mixed_world(), ODMatrix({"a": {"elsewhere": 1.0}}))

        active = [a for a in placed if a.group is AgentGroup.ACTIVE]
        assert all(a.work_cell is None and a.work_district == "elsewhere" and a.cross_district for a in active)

    def test_district_without_residential_cells(self):
        world = build_world(np.array([[120, 150]]), np.zeros((1, 2), dtype=int), "a")
        agents = synthesize(self.census(), rate=1.0, seed=0)

        with pytest.raises(ValidationError):
            assign_locations(agents, world, ODMatrix({"a": {"a": 1.0}}))

    def test_od_row_is_checked_without_active_agents(self):
        census = CensusTable({"a": {"5-9": 20, "70-74": 20}, "b": {"30-34": 10}})
        worlds = {"a": self.mixed_world("a"), "b": residential_world("b")}
        agents = synthesize(census, rate=1.0, seed=0)

        with pytest.raises(ConfigurationError, match="'a'"):
            assign_locations(agents, worlds, ODMatrix({"a": {"a": 0.0}, "b": {"b": 1.0}}))

    def test_even_od_split_is_binomial(self):
        census = CensusTable({"a": {"30-34": 1000}})
        worlds = {"a": self.mixed_world("a"), "b": residential_world("b")}
        agents = synthesize(census, rate=1.0, seed=0)

        placed = assign_locations(agents, worlds, ODMatrix({"a": {"a": 1.0, "b": 1.0}}), seed=11)

        to_b = sum(a.work_district == "b" for a in placed)
        assert binomtest(to_b, len(placed), 0.5).pvalue > 1e-3

    def test_work_cells_cover_the_destination_uniformly(self):
        census = CensusTable({"a": {"30-34": 1200}})
        world = self.mixed_world()
        agents = synthesize(census, rate=1.0, seed=0)

        placed = assign_locations(agents, world, ODMatrix({"a": {"a": 1.0}}), seed=3)

        cells, counts = np.unique([a.work_cell for a in placed], return_counts=True)
        assert cells.tolist() == sorted(world.walkable_index.tolist())
        assert chisquare(counts).pvalue > 1e-3

    def test_same_seed_same_placement(self):
        agents = synthesize(self.census(), rate=1.0, seed=0)
        od = ODMatrix({"a": {"a": 1.0}})
        world = self.mixed_world()

        assert assign_locations(agents, world, od, seed=2) == assign_locations(agents, world, od, seed=2)

    def test_agents_frame_coordinates(self):
        world = self.mixed_world()
        agents = assign_locations(synthesize(self.census(), rate=1.0, seed=0), world,
                                  ODMatrix({"a": {"a": 1.0}}), seed=1)

        frame = agents_frame(agents, {"a": world})

        assert len(frame) == 80
        first = agents[0]
        assert (frame.loc[0, "home_col"], frame.loc[0, "home_row"]) == world.coords(first.home_cell)
