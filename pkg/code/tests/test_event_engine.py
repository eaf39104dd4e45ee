import pytest

from tools.event_engine import EventEngine, Schedule, Task, TaskGraph
from utils.errors import SimulationInvariantError


def test_same_resource_serializes_in_emission_order():
    g = TaskGraph()
    a = g.add("dram", "load", 2.0)
    b = g.add("dram", "load", 1.0)
    s = EventEngine().run(g)
    assert (s.start[a], s.end[a]) == (0.0, 2.0)
    assert (s.start[b], s.end[b]) == (2.0, 3.0)
    assert s.makespan == 3.0


def test_independent_resources_overlap():
    g = TaskGraph()
    g.add("dram", "load", 2.0)
    g.add("chiplet", "compute", 3.0)
    assert EventEngine().run(g).makespan == 3.0


def test_dependencies_and_barrier():
    g = TaskGraph()
    a = g.add("dram", "load", 2.0)
    b = g.add("nop", "xfer", 1.0)
    join = g.barrier([a, b])
    c = g.add("chiplet", "compute", 4.0, [join])
    s = EventEngine().run(g)
    assert s.start[c] == 2.0
    assert s.makespan == 6.0
    assert [t.tid for t in s.real_tasks()] == [a, b, c]
    assert s.busy_by_resource() == {"dram": 2.0, "nop": 1.0, "chiplet": 4.0}


def test_union_length_merges_overlaps():
    g = TaskGraph()
    a = g.add("x", "k", 2.0)
    b = g.add("y", "k", 3.0)
    c = g.add("z", "k", 1.0, [b])
    s = EventEngine().run(g)
    assert s.union_length([a, b]) == 3.0
    assert s.union_length([a, c]) == 3.0


def test_bad_emissions_rejected():
    g = TaskGraph()
    with pytest.raises(SimulationInvariantError):
        g.add("x", "k", 1.0, [0])
    with pytest.raises(SimulationInvariantError):
        g.add("x", "k", -1.0)


def test_check_catches_resource_overlap():
    tasks = [Task(0, "x", "a", 2.0, ()), Task(1, "x", "b", 2.0, ())]
    with pytest.raises(SimulationInvariantError):
        EventEngine.check(Schedule(tasks=tasks, start=[0.0, 1.0], end=[2.0, 3.0]))


def test_check_catches_dependency_violation():
    tasks = [Task(0, "x", "a", 2.0, ()), Task(1, "y", "b", 1.0, (0,))]
    with pytest.raises(SimulationInvariantError):
        EventEngine.check(Schedule(tasks=tasks, start=[0.0, 1.0], end=[2.0, 2.0]))


def test_empty_graph():
    s = EventEngine().run(TaskGraph())
    assert s.makespan == 0.0
