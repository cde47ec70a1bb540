"""Fixed-length traces over AP-sets and the deduplicating trace store.

Text format, one trace per line: steps separated by ``;``, APs within a
step separated by ``,``, so ``s;s,d;`` is a length-3 trace whose last step
is the empty AP-set.  ``#`` starts a comment, blank lines are skipped, and
the first data line may read ``aps: a,b,c`` to declare the AP universe.

All traces in one store share the length m of the first accepted trace.
Later arrivals of a different length are normalized by the store's length
policy: CROP keeps the first m steps (shorter input is an error), PAD
extends with empty AP-sets (longer input is an error).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

Trace = tuple  # tuple[frozenset[str], ...]

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class TraceError(Exception):
    pass


class LengthPolicy(Enum):
    CROP = "crop"
    PAD = "pad"


def parse_trace(text: str) -> Trace:
    steps = []
    for part in text.split(";"):
        aps = set()
        for name in part.split(","):
            name = name.strip()
            if not name:
                continue
            if not _NAME_RE.match(name):
                raise TraceError(f"bad AP name {name!r} in trace {text!r}")
            aps.add(name)
        steps.append(frozenset(aps))
    return tuple(steps)


def format_trace(trace: Trace) -> str:
    return ";".join(",".join(sorted(step)) for step in trace)


def parse_trace_text(text: str) -> tuple[tuple | None, list]:
    """Parse a whole trace file body; returns (declared aps or None, traces)."""
    aps = None
    traces = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if aps is None and not traces and line.startswith("aps:"):
            names = [n.strip() for n in line[4:].split(",") if n.strip()]
            for n in names:
                if not _NAME_RE.match(n):
                    raise TraceError(f"bad AP name {n!r} in aps header (line {lineno})")
            aps = tuple(dict.fromkeys(names))
            continue
        try:
            traces.append(parse_trace(line))
        except TraceError as e:
            raise TraceError(f"{e} (line {lineno})") from None
    return aps, traces


class _TrieNode:
    __slots__ = ("children", "ids")

    def __init__(self):
        self.children = {}
        self.ids = []


class _Trie:
    """Step-labeled trie; every node records the ids routed through it."""

    def __init__(self, reverse: bool):
        self.root = _TrieNode()
        self.reverse = reverse

    def insert(self, trace: Trace, tid: int) -> None:
        node = self.root
        node.ids.append(tid)
        steps = reversed(trace) if self.reverse else trace
        for step in steps:
            nxt = node.children.get(step)
            if nxt is None:
                nxt = node.children[step] = _TrieNode()
            nxt.ids.append(tid)
            node = nxt

    def ids_for(self, part: Trace) -> tuple:
        node = self.root
        steps = reversed(part) if self.reverse else part
        for step in steps:
            node = node.children.get(frozenset(step))
            if node is None:
                return ()
        return tuple(node.ids)

    def groups_at_depth(self, depth: int) -> list:
        """Id groups of the nodes exactly ``depth`` edges below the root."""
        level = [self.root]
        for _ in range(depth):
            level = [c for n in level for c in n.children.values()]
        return [tuple(n.ids) for n in level]


@dataclass
class InsertResult:
    trace_id: int
    added: bool
    trace: Trace


@dataclass
class TraceStore:
    policy: LengthPolicy = LengthPolicy.CROP
    aps: tuple | None = None
    m: int | None = None
    version: int = 0
    traces: list = field(default_factory=list)
    _index: dict = field(default_factory=dict)
    _prefix: _Trie = field(default_factory=lambda: _Trie(reverse=False))
    _postfix: _Trie = field(default_factory=lambda: _Trie(reverse=True))
    _suffix_cache: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)

    def get(self, tid: int) -> Trace:
        return self.traces[tid]

    def ids(self) -> range:
        return range(len(self.traces))

    def _normalize(self, raw) -> Trace:
        if isinstance(raw, str):
            raw = parse_trace(raw)
        trace = tuple(frozenset(step) for step in raw)
        if not trace:
            raise TraceError("empty trace")
        if self.aps is not None:
            for step in trace:
                extra = step - set(self.aps)
                if extra:
                    raise TraceError(
                        f"AP(s) {sorted(extra)} outside declared universe {list(self.aps)}"
                    )
        if self.m is None:
            return trace
        if len(trace) == self.m:
            return trace
        if self.policy is LengthPolicy.CROP:
            if len(trace) < self.m:
                raise TraceError(
                    f"trace of length {len(trace)} cannot be cropped to {self.m}"
                )
            return trace[: self.m]
        if len(trace) > self.m:
            raise TraceError(
                f"trace of length {len(trace)} cannot be padded to {self.m}"
            )
        return trace + (frozenset(),) * (self.m - len(trace))

    def add(self, raw) -> InsertResult:
        trace = self._normalize(raw)
        tid = self._index.get(trace)
        if tid is not None:
            return InsertResult(tid, False, trace)
        if self.m is None:
            self.m = len(trace)
        tid = len(self.traces)
        self.traces.append(trace)
        self._index[trace] = tid
        self._prefix.insert(trace, tid)
        self._postfix.insert(trace, tid)
        self.version += 1
        self._suffix_cache.clear()
        return InsertResult(tid, True, trace)

    def add_all(self, raws) -> list:
        return [self.add(raw) for raw in raws]

    def prefix_ids(self, part) -> tuple:
        return self._prefix.ids_for(tuple(part))

    def suffix_ids(self, part) -> tuple:
        return self._postfix.ids_for(tuple(part))

    def suffix_classes(self, i: int) -> list:
        """Groups of trace ids agreeing from position i on (ids ascending)."""
        got = self._suffix_cache.get(i)
        if got is None:
            depth = 0 if self.m is None else max(self.m - i, 0)
            got = self._postfix.groups_at_depth(depth)
            self._suffix_cache[i] = got
        return got
