"""Synchronous message-passing simulator with a preprocessing/online split.

A NodeProgram runs in two stages. `preprocess` sees the whole support graph
and returns the bits a vertex keeps. The online stage then runs in lock-step
rounds for every recurrent instance; nodes see only their own context and the
messages delivered to them.
"""

import csv
import gc
import io
import json
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional

from .errors import CapExceeded, InvalidInput, PreprocessFailed, WorkbenchError
from .graph import Graph

INSTANCE_KINDS = ("client-set", "precoloring", "edge-subset", "input-labels")


@dataclass(frozen=True)
class Bits:
    """A fixed-width bit string stored at a node."""

    value: int = 0
    width: int = 0

    def __post_init__(self):
        if self.value < 0 or self.value >> self.width:
            raise ValueError(f"value {self.value} does not fit in {self.width} bits")

    def to_bytes(self) -> bytes:
        return self.value.to_bytes((self.width + 7) // 8, "big")


def pack(fields: Iterable[tuple[int, int]]) -> Bits:
    """Concatenate (value, width) fields, first field in the high bits."""
    value, width = 0, 0
    for v, w in fields:
        if v < 0 or v >> w:
            raise ValueError(f"field value {v} does not fit in {w} bits")
        value = (value << w) | v
        width += w
    return Bits(value, width)


def unpack(bits: Bits, widths: Iterable[int]) -> list:
    widths = list(widths)
    if sum(widths) != bits.width:
        raise ValueError("field widths do not match payload width")
    out = []
    shift = bits.width
    for w in widths:
        shift -= w
        out.append((bits.value >> shift) & ((1 << w) - 1))
    return out


EMPTY = Bits()


@dataclass(frozen=True)
class RecurrentInstance:
    kind: str
    payload: Any

    def __post_init__(self):
        if self.kind not in INSTANCE_KINDS:
            raise InvalidInput(f"unknown instance kind {self.kind!r}")

    def check(self, g: Graph) -> None:
        if self.kind in ("client-set", "edge-subset"):
            size = g.n if self.kind == "client-set" else g.m
            if len(self.payload) != size:
                raise InvalidInput(f"{self.kind} mask has length {len(self.payload)}, expected {size}")
        elif self.kind == "precoloring":
            for u, v in g.edges:
                cu, cv = self.payload.get(u, 0), self.payload.get(v, 0)
                if cu and cu == cv:
                    raise InvalidInput(f"precoloring not proper on edge ({u},{v})")

    def local_input(self, g: Graph, v: int):
        if self.kind == "client-set":
            return bool(self.payload[v])
        if self.kind == "precoloring":
            return self.payload.get(v, 0)
        if self.kind == "edge-subset":
            return tuple(w for w in g.adj[v] if self.payload[g.edge_index(v, w)])
        return self.payload.get(v) if isinstance(self.payload, dict) else self.payload[v]

    def to_json(self) -> dict:
        if self.kind == "precoloring":
            return {"kind": self.kind, "payload": {str(k): v for k, v in sorted(self.payload.items())}}
        if self.kind in ("client-set", "edge-subset"):
            return {"kind": self.kind, "payload": [int(bool(b)) for b in self.payload]}
        if isinstance(self.payload, dict):
            return {"kind": self.kind, "payload": {str(k): v for k, v in sorted(self.payload.items())}}
        return {"kind": self.kind, "payload": list(self.payload)}

    @classmethod
    def from_json(cls, obj: dict) -> "RecurrentInstance":
        kind, payload = obj["kind"], obj["payload"]
        if kind in ("client-set", "edge-subset"):
            payload = tuple(bool(b) for b in payload)
        elif kind == "precoloring":
            payload = {int(k): int(c) for k, c in payload.items() if int(c)}
        elif isinstance(payload, dict):
            payload = {int(k): v for k, v in payload.items()}
        else:
            payload = tuple(payload)
        return cls(kind, payload)


def client_set(n: int, clients: Iterable[int]) -> RecurrentInstance:
    mask = [False] * n
    for c in clients:
        mask[c] = True
    return RecurrentInstance("client-set", tuple(mask))


def edge_subset(g: Graph, edges: Iterable[tuple[int, int]]) -> RecurrentInstance:
    mask = [False] * g.m
    for u, v in edges:
        mask[g.edge_index(u, v)] = True
    return RecurrentInstance("edge-subset", tuple(mask))


def precoloring(pc: dict) -> RecurrentInstance:
    return RecurrentInstance("precoloring", {int(v): int(c) for v, c in pc.items() if c})


def load_instances(path) -> list:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(RecurrentInstance.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError, WorkbenchError) as exc:
                raise InvalidInput(f"{path}: line {lineno}: {exc}") from exc
    return out


def dump_instances(instances: Iterable[RecurrentInstance], path) -> None:
    with open(path, "w") as fh:
        for inst in instances:
            fh.write(json.dumps(inst.to_json(), sort_keys=True) + "\n")


@dataclass
class NodeContext:
    """What a node knows when the online stage starts."""

    id: int
    n: int
    neighbors: tuple
    payload: Bits
    local: Any
    _meter: list = field(default_factory=lambda: [0], repr=False)

    @property
    def degree(self) -> int:
        return len(self.neighbors)

    def count(self, steps: int = 1) -> None:
        """Record local computation steps (observed, not limited)."""
        self._meter[0] += steps


class NodeProgram:
    """Base class for two-stage distributed programs.

    Subclasses override `preprocess`, `init` and `on_round`. `init` and
    `on_round` return (state, outbox, output); outbox maps neighbor id to a
    message, and a non-None output halts the node with that value.
    """

    name = "program"
    uses_n = False
    payload_bits: Optional[int] = None  # declared per-node budget, if any

    def preprocess(self, g: Graph, v: int) -> Bits:
        return EMPTY

    def init(self, ctx: NodeContext):
        raise NotImplementedError

    def on_round(self, state, inbox: dict):
        raise NotImplementedError


@dataclass(frozen=True)
class PreprocessedState:
    payloads: tuple

    @property
    def bits(self) -> int:
        return max((p.width for p in self.payloads), default=0)

    def fingerprint(self) -> tuple:
        return tuple((p.value, p.width) for p in self.payloads)


@dataclass
class RunReport:
    index: int = 0
    rounds: int = 0
    outputs: list = field(default_factory=list)
    messages_sent: int = 0
    valid: Optional[bool] = None
    quality: Optional[float] = None
    error: Optional[str] = None
    local_steps: int = 0
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "rounds": self.rounds,
            "outputs": [_jsonable(o) for o in self.outputs],
            "messages_sent": self.messages_sent,
            "valid": self.valid,
            "quality": self.quality,
            "error": self.error,
            "local_steps": self.local_steps,
            "extra": {k: _jsonable(v) for k, v in sorted(self.extra.items())},
        }

    def csv_row(self) -> list:
        q = "" if self.quality is None else f"{self.quality:.6f}"
        return [self.index, self.rounds, int(bool(self.valid)), q, self.messages_sent]


CSV_HEADER = ["index", "rounds", "valid", "quality", "messages"]


def reports_to_csv(reports: Iterable[RunReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, (set, frozenset)):
        return sorted(_jsonable(i) for i in x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(i) for i in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    return x


def run_preprocess(g: Graph, p: NodeProgram) -> PreprocessedState:
    payloads = []
    for v in range(g.n):
        try:
            b = p.preprocess(g, v)
        except WorkbenchError:
            raise
        except Exception as exc:
            raise PreprocessFailed(f"vertex {v}: {exc}", vertex=v) from exc
        if isinstance(b, (bytes, bytearray)):
            b = Bits(int.from_bytes(b, "big"), 8 * len(b))
        payloads.append(b)
    return PreprocessedState(tuple(payloads))


def run_instance(g: Graph, pre: PreprocessedState, p: NodeProgram, inst: RecurrentInstance,
                 round_cap: int = 10_000, index: int = 0) -> RunReport:
    """Run one online instance; raises CapExceeded carrying the partial report."""
    # per-node states are many small objects; cyclic GC passes dominate large runs
    paused = gc.isenabled()
    gc.disable()
    try:
        return _run_instance(g, pre, p, inst, round_cap, index)
    finally:
        if paused:
            gc.enable()


def _run_instance(g, pre, p, inst, round_cap, index):
    inst.check(g)
    meter = [0]
    states = [None] * g.n
    outputs = [None] * g.n
    halted = [False] * g.n
    pending = {}  # (sender, receiver) -> message for the next round
    sent = 0

    def post(v, outbox):
        nonlocal sent
        if not outbox:
            return
        for w, msg in outbox.items():
            if not g.has_edge(v, w):
                raise InvalidInput(f"node {v} sent to non-neighbor {w}")
            pending[(v, w)] = msg
            sent += 1

    for v in range(g.n):
        ctx = NodeContext(v, g.n, g.adj[v], pre.payloads[v], inst.local_input(g, v), meter)
        state, outbox, out = p.init(ctx)
        states[v] = state
        post(v, outbox)
        if out is not None:
            outputs[v] = out
            halted[v] = True
    rounds = 0
    live = [v for v in range(g.n) if not halted[v]]
    while live:
        if rounds >= round_cap:
            rep = RunReport(index, rounds, outputs, sent, False, None, "cap-exceeded", meter[0])
            raise CapExceeded(f"{len(live)} nodes still running after {round_cap} rounds", report=rep)
        rounds += 1
        inboxes = {}
        for (u, w), msg in pending.items():
            inboxes.setdefault(w, {})[u] = msg
        pending = {}
        for v in live:
            state, outbox, out = p.on_round(states[v], inboxes.get(v, {}))
            states[v] = state
            post(v, outbox)
            if out is not None:
                outputs[v] = out
                halted[v] = True
        live = [v for v in live if not halted[v]]
    return RunReport(index, rounds, outputs, sent, None, None, None, meter[0])


def run_stream(g: Graph, pre: PreprocessedState, p: NodeProgram, instances: Iterable[RecurrentInstance],
               validator: Optional[Callable] = None, round_cap: int = 10_000) -> list:
    """Run instances in order against one preprocessed state.

    validator(inst, report) returns either a bool or (bool, quality).
    """
    reports = []
    for i, inst in enumerate(instances):
        try:
            rep = run_instance(g, pre, p, inst, round_cap, index=i)
        except CapExceeded as exc:
            rep = exc.details["report"]
        except WorkbenchError as exc:
            rep = RunReport(index=i, valid=False, error=exc.code)
        if rep.error is None and validator is not None:
            res = validator(inst, rep)
            if isinstance(res, tuple):
                rep.valid, rep.quality = bool(res[0]), res[1]
            else:
                rep.valid = bool(res)
        reports.append(rep)
    return reports
