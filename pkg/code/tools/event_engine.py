"""
Task-graph executor on a simpy environment.

Every task runs on one serialized resource. A resource serves its tasks in
emission order, so a task starts once its dependencies and the previous task
on the same resource have finished. Barriers are zero-length joins on a
virtual resource and never appear in timelines.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import simpy

from config.settings import SETTINGS
from utils.errors import SimulationInvariantError

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".tools.event_engine")

BARRIER_RESOURCE = "barrier"
REL_TOL = 1e-9


@dataclass(frozen=True)
class Task:
    tid: int
    resource: str
    kind: str
    duration: float
    deps: tuple
    category: str = ""
    layer: int = -1
    micro_batch: int = -1
    pass_: str = "forward"
    nbytes: int = 0
    flops: int = 0

    @property
    def is_barrier(self) -> bool:
        return self.resource == BARRIER_RESOURCE


@dataclass
class TaskGraph:
    tasks: List[Task] = field(default_factory=list)

    def add(self, resource: str, kind: str, duration: float, deps: Sequence[int] = (), **meta) -> int:
        tid = len(self.tasks)
        deps = tuple(sorted(set(int(d) for d in deps)))
        if deps and deps[-1] >= tid:
            raise SimulationInvariantError(f"task {kind} depends on a task that is not emitted yet")
        if duration < 0:
            raise SimulationInvariantError(f"task {kind} on {resource} has negative duration")
        self.tasks.append(Task(tid=tid, resource=resource, kind=kind, duration=float(duration), deps=deps, **meta))
        return tid

    def barrier(self, deps: Sequence[int], **meta) -> int:
        return self.add(BARRIER_RESOURCE, "barrier", 0.0, deps, **meta)

    def __len__(self) -> int:
        return len(self.tasks)


@dataclass(frozen=True)
class Schedule:
    tasks: List[Task]
    start: List[float]
    end: List[float]

    @property
    def makespan(self) -> float:
        return max(self.end, default=0.0)

    def real_tasks(self) -> List[Task]:
        return [t for t in self.tasks if not t.is_barrier]

    def busy_by_resource(self) -> Dict[str, float]:
        busy: Dict[str, float] = {}
        for t in self.real_tasks():
            busy[t.resource] = busy.get(t.resource, 0.0) + t.duration
        return busy

    def union_length(self, tids: Sequence[int]) -> float:
        spans = sorted((self.start[i], self.end[i]) for i in tids if self.end[i] > self.start[i])
        total, cur_lo, cur_hi = 0.0, None, None
        for lo, hi in spans:
            if cur_hi is None or lo > cur_hi:
                if cur_hi is not None:
                    total += cur_hi - cur_lo
                cur_lo, cur_hi = lo, hi
            else:
                cur_hi = max(cur_hi, hi)
        if cur_hi is not None:
            total += cur_hi - cur_lo
        return total


class EventEngine:
    def run(self, graph: TaskGraph) -> Schedule:
        env = simpy.Environment()
        tasks = graph.tasks
        done = [env.event() for _ in tasks]
        start = [0.0] * len(tasks)
        end = [0.0] * len(tasks)
        last_on_resource: Dict[str, int] = {}

        for t in tasks:
            waits = [done[d] for d in t.deps]
            if not t.is_barrier:
                prev = last_on_resource.get(t.resource)
                if prev is not None:
                    waits.append(done[prev])
                last_on_resource[t.resource] = t.tid
            env.process(self._execute(env, t, waits, done[t.tid], start, end))

        env.run()
        unfinished = [t.tid for t in tasks if not done[t.tid].triggered]
        if unfinished:
            raise SimulationInvariantError(f"{len(unfinished)} tasks never ran (first: {tasks[unfinished[0]].kind})")
        schedule = Schedule(tasks=tasks, start=start, end=end)
        self.check(schedule)
        log.debug({"event": "graph_executed", "tasks": len(tasks), "makespan_s": schedule.makespan})
        return schedule

    @staticmethod
    def _execute(env: simpy.Environment, task: Task, waits, finished: simpy.Event, start, end):
        if waits:
            yield env.all_of(waits)
        start[task.tid] = env.now
        if task.duration > 0:
            yield env.timeout(task.duration)
        end[task.tid] = env.now
        finished.succeed()

    @staticmethod
    def check(schedule: Schedule) -> None:
        """Resource exclusivity, dependency order and the latency bound chain."""
        tasks, start, end = schedule.tasks, schedule.start, schedule.end
        for t in tasks:
            for d in t.deps:
                if start[t.tid] < end[d]:
                    raise SimulationInvariantError(f"{t.kind}#{t.tid} started before dependency {tasks[d].kind}#{d} finished")

        by_resource: Dict[str, List[int]] = {}
        for t in schedule.real_tasks():
            by_resource.setdefault(t.resource, []).append(t.tid)
        for resource, tids in by_resource.items():
            for a, b in zip(tids, tids[1:]):
                if start[b] < end[a]:
                    raise SimulationInvariantError(
                        f"overlap on {resource}: {tasks[a].kind}#{a} ends {end[a]} after {tasks[b].kind}#{b} starts {start[b]}"
                    )

        makespan = schedule.makespan
        lower = max(schedule.busy_by_resource().values(), default=0.0)
        upper = sum(t.duration for t in schedule.real_tasks())
        slack = REL_TOL * max(upper, 1e-30)
        if not (lower - slack <= makespan <= upper + slack):
            raise SimulationInvariantError(f"latency {makespan} outside [{lower}, {upper}]")
