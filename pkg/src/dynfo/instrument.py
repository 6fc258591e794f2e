"""Elementary-operation counter used for the size-independence benchmarks.

Wall-clock timing is too noisy to compare per-update cost across database
sizes, so the dynamic structures call ``OPS.tick()`` at each unit of work
(a BFS visit, a table lookup, a list step) and the benchmark reads the
counter before and after the operation it measures.
"""


class OpCounter:
    __slots__ = ("count",)

    def __init__(self) -> None:
        self.count = 0

    def tick(self, n: int = 1) -> None:
        self.count += n

    def reset(self) -> None:
        self.count = 0


OPS = OpCounter()


class measure:
    """Context manager reporting the ops spent inside the block."""

    def __init__(self) -> None:
        self.ops = 0

    def __enter__(self) -> "measure":
        self._start = OPS.count
        return self

    def __exit__(self, *exc) -> None:
        self.ops = OPS.count - self._start
