"""Run metrics: wall time, transferred bytes, and memory accounting."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class RunMetrics:
    algo: str = ""
    wall_time: float = 0.0
    bytes_read: int = 0
    bytes_written: int = 0
    peak_in_memory_edges: int = 0
    edge_budget: int = 0
    outer_iterations: int = 0
    work_iterations: int = 0
    imp_invocations: int = 0
    n: int = 0
    m: int = 0
    n_active: int = 0
    memory: dict = field(default_factory=dict)

    @property
    def data_transferred(self):
        return self.bytes_read + self.bytes_written

    def lines(self):
        """Line-oriented key=value rendering, memory arrays itemized."""
        out = [
            f"algo={self.algo}",
            f"n={self.n}",
            f"m={self.m}",
            f"n_active={self.n_active}",
            f"wall_time_s={self.wall_time:.6f}",
            f"bytes_read={self.bytes_read}",
            f"bytes_written={self.bytes_written}",
            f"data_transferred={self.data_transferred}",
            f"peak_in_memory_edges={self.peak_in_memory_edges}",
            f"edge_budget={self.edge_budget}",
            f"outer_iterations={self.outer_iterations}",
            f"work_iterations={self.work_iterations}",
            f"imp_invocations={self.imp_invocations}",
        ]
        for name in sorted(self.memory):
            out.append(f"memory.{name}={self.memory[name]}")
        out.append(f"memory.total={sum(self.memory.values())}")
        return out

    def render(self):
        return "\n".join(self.lines()) + "\n"
