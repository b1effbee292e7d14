"""Parameterized benchmark families and synthetic test systems.

Three families are CEFSM models built around replicated components whose
error predicates encode classic redundancy thresholds:

* ``avionics``  - processors execute the main workload under majority
  checking while memory modules hold replicated state; free processors can be
  assigned to restore detected-faulty memories.  Dead once failed processors
  reach the running count or no correct memory copy is left.
* ``voting`` / ``simple_voting`` - replicas answering a client; correct while
  faulty replicas stay below half the pool.
* ``pbft`` / ``clock_sync`` - quorum protocols; correct while faulty (or
  drifted) replicas stay below a third of the pool.

The design resilience level of each family follows the redundancy: one less
than half the processors or replicas for majority schemes, one less than a
third for the quorum schemes.  Those levels are recorded in the generated
model headers and checked against the exhaustive solver in the test suite;
each model file documents its own abstraction choices.

``chain`` generates plain transition systems: a line of states where every
failure pushes one step toward the cliff and every recovery move steps back,
so a chain of length ``ell`` survives exactly ``ell + 1`` dense failures.
``chain(1)`` is the four-state introductory example shipped as
``data/fig1.tsf.json``.  ``random_system`` produces seeded valid systems for
differential testing.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .cefsm import CefsmModel, parse
from .tsf import TransitionSystem

FAMILIES = ("avionics", "voting", "simple_voting", "pbft", "clock_sync", "chain")


def expected_resilience(family: str, **sizes: int) -> int:
    """Design resilience level of a benchmark instance."""
    if family == "avionics":
        return math.ceil(sizes["n"] / 2) - 1
    if family in ("voting", "simple_voting"):
        return math.ceil(sizes["r"] / 2) - 1
    if family in ("pbft", "clock_sync"):
        return math.ceil(sizes["r"] / 3) - 1
    if family == "chain":
        return sizes["ell"] + 1
    raise ValueError(f"unknown family {family!r}")


@dataclass(frozen=True)
class BenchmarkSpec:
    """One benchmark instance: family plus its size parameters."""

    family: str
    n: int | None = None  # processors (avionics)
    m: int | None = None  # memory modules (avionics)
    r: int | None = None  # replicas / servers
    c: int = 1  # clients
    ell: int | None = None  # chain length

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        for name in ("n", "m", "r", "c", "ell"):
            value = getattr(self, name)
            if value is not None and value < (0 if name == "ell" else 1):
                raise ValueError(f"{name} must be at least 1 (ell: at least 0)")
        if self.family == "avionics" and (self.n is None or self.m is None):
            raise ValueError("avionics needs n (processors) and m (memories)")
        if self.family in ("voting", "simple_voting", "pbft", "clock_sync") and self.r is None:
            raise ValueError(f"{self.family} needs r (replicas)")
        if self.family == "chain" and self.ell is None:
            raise ValueError("chain needs ell (length)")

    @property
    def expected_k(self) -> int:
        sizes = {"n": self.n, "m": self.m, "r": self.r, "c": self.c, "ell": self.ell}
        return expected_resilience(self.family, **{k: v for k, v in sizes.items() if v is not None})


def generate(spec: BenchmarkSpec) -> CefsmModel | TransitionSystem:
    """Build the model (CEFSM families) or system (chain) for a spec."""
    if spec.family == "avionics":
        return avionics(spec.n, spec.m)
    if spec.family == "voting":
        return voting(spec.r, spec.c)
    if spec.family == "simple_voting":
        return simple_voting(spec.r, spec.c)
    if spec.family == "pbft":
        return pbft(spec.r, spec.c)
    if spec.family == "clock_sync":
        return clock_sync(spec.r, spec.c)
    return chain(spec.ell)


def generate_text(spec: BenchmarkSpec) -> str:
    """Model source text for the CEFSM families (what ``gen`` writes)."""
    if spec.family == "avionics":
        return avionics_text(spec.n, spec.m)
    if spec.family == "voting":
        return voting_text(spec.r, spec.c)
    if spec.family == "simple_voting":
        return simple_voting_text(spec.r, spec.c)
    if spec.family == "pbft":
        return pbft_text(spec.r, spec.c)
    if spec.family == "clock_sync":
        return clock_sync_text(spec.r, spec.c)
    raise ValueError(f"family {spec.family} compiles straight to a transition system")


# -- avionics ------------------------------------------------------------------


def avionics_text(n: int, m: int) -> str:
    """Avionics redundancy model, counter-abstracted.

    The expected resilience ceil(n/2)-1 is calibrated for the usual n = m
    deployments; with very few memories (m < ceil(n/2)) the memory pool
    becomes the bottleneck instead.
    """
    if n < 1 or m < 1:
        raise ValueError("need at least one processor and one memory module")
    k = expected_resilience("avionics", n=n, m=m)
    return f"""\
# avionics fault-tolerance control model (counter abstraction)
#
# {n} processors execute the main workload under majority checking; {m} memory
# modules hold replicated state.  A processor can be pulled off the workload,
# re-join it, or be assigned to restore a memory module whose fault has been
# detected (reliable detection is assumed).  Component restorations complete
# on their own (repair moves): a down processor comes back via maintenance and
# an assigned memory restoration finishes with both parties released.
#
# counters: crp/cfp = running/failed processors, crm/cfm = correct/faulty
# memories (faulty = fault not yet being serviced).
#
# unrecoverable when the failed processors catch up with the running ones
# (majority checking breaks down) or when no correct memory copy is left to
# restore from.
#
# design resilience level: k = {k}  (one less than half the processors, n = m)

vars
  crp 0..{n} = {n}
  cfp 0..{n} = 0
  crm 0..{m} = {m}
  cfm 0..{m} = 0

channels
  fd rs

template Processor {n}
  locations Run Free Repairing Down
  init Run
  C Run -> Run
  U Run -> Down : crp--, cfp++
  C Run -> Free : crp--
  C Free -> Run : crp++
  C Free -> Repairing !fd
  R Repairing -> Free !rs
  R Down -> Free : cfp--

template Memory {m}
  locations Ok FaultyUndetected FaultyDetected Repairing
  init Ok
  U Ok -> FaultyUndetected : crm--, cfm++
  C FaultyUndetected -> FaultyDetected
  C FaultyDetected -> Repairing ?fd : cfm--
  R Repairing -> Ok ?rs : crm++

errors
  cfp >= crp
  crm == 0
"""


def avionics(n: int, m: int) -> CefsmModel:
    return parse(avionics_text(n, m))


# -- voting families -----------------------------------------------------------


def voting_text(r: int, c: int = 1) -> str:
    if r < 1 or c < 1:
        raise ValueError("need at least one replica and one client")
    k = expected_resilience("voting", r=r)
    return f"""\
# majority-voting redundancy model (counter abstraction)
#
# {r} replicas compute answers, {c} client(s) take the majority.  There is no
# fault detection: a faulty replica is eventually resynchronized from the
# majority answer through a heal handshake with a client (a repair move, so
# the controller cannot schedule it, only wait for it).  The vote is correct
# while faulty replicas stay below half the pool.
#
# design resilience level: k = {k}  (one less than half the replicas)

vars
  cok 0..{r} = {r}
  cfa 0..{r} = 0

channels
  heal

template Replica {r}
  locations Ok Faulty
  init Ok
  U Ok -> Faulty : cok--, cfa++
  R Faulty -> Ok !heal : cok++, cfa--

template Client {c}
  locations Observe
  init Observe
  C Observe -> Observe
  R Observe -> Observe ?heal

errors
  2 * cfa >= {r}
"""


def voting(r: int, c: int = 1) -> CefsmModel:
    return parse(voting_text(r, c))


def simple_voting_text(r: int, c: int = 1) -> str:
    if r < 1 or c < 1:
        raise ValueError("need at least one replica and one client")
    k = expected_resilience("simple_voting", r=r)
    return f"""\
# simplified voting model (counter abstraction)
#
# Like the voting model, but results sit on a blackboard the {c} client(s)
# poll, so a faulty replica resynchronizes from the board on its own; no
# handshake is involved.  Correct while faulty replicas stay below half of
# the {r}-strong pool.
#
# design resilience level: k = {k}  (one less than half the replicas)

vars
  cok 0..{r} = {r}
  cfa 0..{r} = 0

template Replica {r}
  locations Ok Faulty
  init Ok
  U Ok -> Faulty : cok--, cfa++
  R Faulty -> Ok : cok++, cfa--

template Client {c}
  locations Poll
  init Poll
  C Poll -> Poll

errors
  2 * cfa >= {r}
"""


def simple_voting(r: int, c: int = 1) -> CefsmModel:
    return parse(simple_voting_text(r, c))


def pbft_text(r: int, c: int = 1) -> str:
    if r < 1 or c < 1:
        raise ValueError("need at least one replica and one client")
    k = expected_resilience("pbft", r=r)
    return f"""\
# byzantine quorum abstraction (counter abstraction)
#
# {r} replicas run three-phase agreement for {c} client(s).  Replica faults are
# arbitrary and undetectable; a faulty replica is eventually brought back by
# proactive view change plus state transfer (a repair move).  Agreement stays
# correct while faulty replicas are fewer than a third of the pool, so the
# error threshold is 3 * faulty >= {r}.  Only the fault threshold is modeled,
# not the message protocol.
#
# design resilience level: k = {k}  (one less than a third of the replicas)

vars
  cby 0..{r} = 0

template Replica {r}
  locations Correct Byzantine
  init Correct
  U Correct -> Byzantine : cby++
  R Byzantine -> Correct : cby--

template Client {c}
  locations Wait
  init Wait
  C Wait -> Wait

errors
  3 * cby >= {r}
"""


def pbft(r: int, c: int = 1) -> CefsmModel:
    return parse(pbft_text(r, c))


def clock_sync_text(r: int, c: int = 1) -> str:
    if r < 1 or c < 1:
        raise ValueError("need at least one server and one client")
    k = expected_resilience("clock_sync", r=r)
    return f"""\
# fault-tolerant clock synchronization abstraction (counter abstraction)
#
# {r} time servers run convergence averaging for {c} client(s).  A drifted
# clock is pulled back toward the median by the next averaging round (a
# repair move).  The median stays correct while drifted clocks are fewer than
# a third of the pool (same quorum shape as byzantine agreement), so the
# error threshold is 3 * drifted >= {r}.  Drift magnitude is abstracted away.
#
# design resilience level: k = {k}  (one less than a third of the servers)

vars
  cdr 0..{r} = 0

template Server {r}
  locations InSync Drifted
  init InSync
  U InSync -> Drifted : cdr++
  R Drifted -> InSync : cdr--

template Client {c}
  locations Read
  init Read
  C Read -> Read

errors
  3 * cdr >= {r}
"""


def clock_sync(r: int, c: int = 1) -> CefsmModel:
    return parse(clock_sync_text(r, c))


# -- direct transition-system families ------------------------------------------


def chain(ell: int, with_labels: bool = True) -> TransitionSystem:
    """Escalation chain with ``ell + 2`` non-error states and one error sink.

    Every state keeps a controlled self-loop, every state past the first has a
    controlled step back, and every failure pushes one step toward the sink,
    so each extra chain state buys exactly one more tolerable dense failure:
    the initial state survives blocks of ``ell + 1`` failures.  ``chain(1)``
    is the four-state introductory example.
    """
    if ell < 0:
        raise ValueError("chain length must be non-negative")
    non_error = ell + 2
    n = non_error + 1
    controlled = [(s, s) for s in range(non_error)]
    controlled += [(s, s - 1) for s in range(1, non_error)]
    uncontrolled = [(s, s + 1) for s in range(non_error)]
    labels = {s: str(s + 1) for s in range(n)} if with_labels else None
    return TransitionSystem(
        num_states=n,
        initial=0,
        errors=[n - 1],
        controlled=controlled,
        uncontrolled=uncontrolled,
        labels=labels,
    )


def random_system(
    rng: random.Random,
    num_states: int | None = None,
    density: float = 0.3,
    repair_density: float | None = None,
    num_errors: int | None = None,
) -> TransitionSystem:
    """Seeded random valid system for differential testing.

    Each ordered state pair gets at most one edge kind, keeping the kinds
    disjoint; states left without a controlled successor get a controlled
    self-loop so the result always validates.
    """
    n = num_states if num_states is not None else rng.randint(3, 8)
    if n < 2:
        raise ValueError("need at least 2 states")
    if num_errors is None:
        num_errors = rng.choice((0, 1, 1, 2))
    num_errors = min(num_errors, n - 1)
    errors = set(range(n - num_errors, n))
    non_error = [s for s in range(n) if s not in errors]
    if repair_density is None:
        repair_density = density / 2

    controlled: set[tuple[int, int]] = set()
    uncontrolled: set[tuple[int, int]] = set()
    repair: set[tuple[int, int]] = set()
    for s in non_error:
        for t in range(n):
            roll = rng.random()
            if roll < density:
                if t not in errors:
                    controlled.add((s, t))
            elif roll < 2 * density:
                uncontrolled.add((s, t))
            elif roll < 2 * density + repair_density:
                if t not in errors:
                    repair.add((s, t))

    for s in non_error:
        if not any(edge[0] == s for edge in controlled):
            uncontrolled.discard((s, s))
            repair.discard((s, s))
            controlled.add((s, s))

    return TransitionSystem(
        num_states=n,
        initial=0,
        errors=errors,
        controlled=sorted(controlled),
        uncontrolled=sorted(uncontrolled),
        repair=sorted(repair),
    )
