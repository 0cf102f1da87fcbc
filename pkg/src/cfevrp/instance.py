"""Problem instance model: jobs, tasks, vehicles, fleet parameters.

An Instance bundles the plant graph with the transport requests and the
fleet description.  Each depot contributes a synthetic start task and end
task (service 0, window [0, T]) so the routing model can anchor routes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvariantViolation
from .graph import NodeId, PlantGraph


@dataclass(frozen=True)
class TimeWindow:
    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not (0 <= self.lower <= self.upper):
            raise InvariantViolation(
                f"bad time window [{self.lower}, {self.upper}]"
            )


@dataclass(frozen=True)
class Task:
    id: str
    job: str
    location: NodeId
    window: TimeWindow
    service_time: float
    predecessors: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Job:
    id: str
    tasks: tuple[str, ...]
    eligible_vehicles: frozenset[str]


@dataclass(frozen=True)
class Vehicle:
    id: str
    depot: NodeId


@dataclass(frozen=True)
class FleetParams:
    operating_range: float   # max distance on a full charge
    charge_coeff: float      # charging time per unit of route length
    discharge_coeff: float   # charge consumed per unit distance
    charge_to_range: float   # converts stored charge to achievable distance
    speed: float
    horizon: float

    def __post_init__(self) -> None:
        for name in (
            "operating_range", "charge_coeff", "discharge_coeff",
            "charge_to_range", "speed", "horizon",
        ):
            if getattr(self, name) <= 0:
                raise InvariantViolation(f"fleet parameter {name} must be > 0")

    @property
    def full_charge(self) -> float:
        return self.operating_range / self.charge_to_range


def _start_id(depot: NodeId) -> str:
    return f"__start_{depot}"


def _end_id(depot: NodeId) -> str:
    return f"__end_{depot}"


@dataclass(frozen=True)
class Instance:
    graph: PlantGraph
    depots: tuple[NodeId, ...]
    fleet: FleetParams
    vehicles: dict[str, Vehicle] = field(hash=False)
    jobs: dict[str, Job] = field(hash=False)
    tasks: dict[str, Task] = field(hash=False)        # real tasks only
    start_tasks: dict[NodeId, Task] = field(hash=False)
    end_tasks: dict[NodeId, Task] = field(hash=False)

    def real_task_ids(self) -> list[str]:
        return sorted(self.tasks)

    def job_of(self, task_id: str) -> Job:
        return self.jobs[self.tasks[task_id].job]

    def vehicles_at(self, depot: NodeId) -> list[str]:
        return sorted(v.id for v in self.vehicles.values() if v.depot == depot)

    def task_locations(self) -> set[NodeId]:
        locs = {t.location for t in self.tasks.values()}
        locs.update(self.depots)
        return locs


def build_instance(
    graph: PlantGraph,
    depots: list[NodeId],
    fleet: FleetParams,
    vehicles: list[Vehicle],
    jobs: list[Job],
    tasks: list[Task],
) -> Instance:
    """Assemble and validate an Instance, synthesizing depot dummy tasks."""
    if not depots:
        raise InvariantViolation("depot set must be nonempty")
    depot_set = set(depots)
    if len(depot_set) != len(depots):
        raise InvariantViolation("duplicate depots")
    if not depot_set <= graph.hubs:
        raise InvariantViolation(
            f"depots {sorted(depot_set - graph.hubs)} are not hub nodes"
        )
    vmap = {v.id: v for v in vehicles}
    if len(vmap) != len(vehicles):
        raise InvariantViolation("duplicate vehicle ids")
    for v in vehicles:
        if v.depot not in depot_set:
            raise InvariantViolation(f"vehicle {v.id} starts at non-depot {v.depot}")

    tmap = {t.id: t for t in tasks}
    if len(tmap) != len(tasks):
        raise InvariantViolation("duplicate task ids")
    jmap = {j.id: j for j in jobs}
    if len(jmap) != len(jobs):
        raise InvariantViolation("duplicate job ids")

    seen_tasks: set[str] = set()
    for j in jobs:
        if not j.tasks:
            raise InvariantViolation(f"job {j.id} has no tasks")
        if not j.eligible_vehicles:
            raise InvariantViolation(f"job {j.id} has empty eligible vehicle set")
        unknown_v = set(j.eligible_vehicles) - set(vmap)
        if unknown_v:
            raise InvariantViolation(f"job {j.id} references unknown vehicles {sorted(unknown_v)}")
        for tid in j.tasks:
            if tid not in tmap:
                raise InvariantViolation(f"job {j.id} references unknown task {tid}")
            if tid in seen_tasks:
                raise InvariantViolation(f"task {tid} appears in more than one job")
            seen_tasks.add(tid)
            if tmap[tid].job != j.id:
                raise InvariantViolation(f"task {tid} does not point back to job {j.id}")
    orphans = set(tmap) - seen_tasks
    if orphans:
        raise InvariantViolation(f"tasks {sorted(orphans)} belong to no job")

    T = fleet.horizon
    for t in tasks:
        if t.location not in graph.nodes:
            raise InvariantViolation(f"task {t.id} at unknown node {t.location}")
        if t.window.upper > T:
            raise InvariantViolation(f"task {t.id} window exceeds horizon {T}")
        if t.service_time < 0:
            raise InvariantViolation(f"task {t.id} has negative service time")
        # predecessors must be tasks of the same job
        same_job = set(jmap[t.job].tasks)
        if not set(t.predecessors) <= same_job - {t.id}:
            raise InvariantViolation(f"task {t.id} has predecessors outside its job")

    start_tasks = {
        o: Task(_start_id(o), "__depot", o, TimeWindow(0.0, T), 0.0)
        for o in depots
    }
    end_tasks = {
        o: Task(_end_id(o), "__depot", o, TimeWindow(0.0, T), 0.0)
        for o in depots
    }
    return Instance(
        graph=graph,
        depots=tuple(sorted(depots)),
        fleet=fleet,
        vehicles=vmap,
        jobs=jmap,
        tasks=tmap,
        start_tasks=start_tasks,
        end_tasks=end_tasks,
    )


def mutually_exclusive_jobs(inst: Instance) -> dict[str, set[str]]:
    """Jobs whose eligible vehicle sets are disjoint can never share a route."""
    out: dict[str, set[str]] = {j: set() for j in inst.jobs}
    ids = sorted(inst.jobs)
    for i, j1 in enumerate(ids):
        for j2 in ids[i + 1:]:
            if not (inst.jobs[j1].eligible_vehicles & inst.jobs[j2].eligible_vehicles):
                out[j1].add(j2)
                out[j2].add(j1)
    return out
