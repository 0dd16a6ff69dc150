"""Append-only CSV training log."""

from __future__ import annotations

import csv
from pathlib import Path

LOG_COLUMNS = ("iteration", "loss", "wall_time", "rays")


class TrainLog:
    def __init__(self, path: Path) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if not self.path.exists() or self.path.stat().st_size == 0:
            with self.path.open("w", newline="") as f:
                csv.writer(f).writerow(LOG_COLUMNS)

    def write(self, iteration: int, loss: float, wall_time: float, rays: int) -> None:
        with self.path.open("a", newline="") as f:
            csv.writer(f).writerow([iteration, f"{loss:.8g}", f"{wall_time:.4f}", rays])


def read_log(path: Path) -> list[dict[str, float]]:
    with Path(path).open(newline="") as f:
        return [
            {"iteration": int(r["iteration"]), "loss": float(r["loss"]),
             "wall_time": float(r["wall_time"]), "rays": int(r["rays"])}
            for r in csv.DictReader(f)
        ]
