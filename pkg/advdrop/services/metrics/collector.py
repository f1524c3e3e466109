# advdrop/services/metrics/collector.py
"""
Metrics collection service.

Turns telemetry events of one run into its on-disk artifacts:
metrics.jsonl (one epoch per line), rates.csv (epoch, site, rate) and,
for pruning runs, prune.csv. Events of other runs on the same bus are
ignored.
"""
import csv
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from advdrop.services.event_bus.bus import EventBus, get_event_bus
from advdrop.services.event_bus.events import EventType
from advdrop.utils.ids import canonical_json

logger = logging.getLogger("advdrop.metrics")

RATES_HEADER = ["config_hash", "seed", "epoch", "site", "kind", "rate", "mu_mean", "sigma_mean"]
PRUNE_HEADER = ["config_hash", "seed", "round", "kept_fraction", "granularity", "method", "accuracy"]


class MetricsCollector:
    """Event-bus subscriber writing the artifacts of one (config hash, seed) run."""

    def __init__(
        self,
        run_dir: Union[str, Path],
        config_hash: str,
        seed: int,
        epochs: bool = True,
        prune: bool = False,
    ):
        self.run_dir = Path(run_dir)
        self.config_hash = config_hash
        self.seed = seed
        self.epochs = epochs
        self.prune = prune
        self.metrics_path = self.run_dir / "metrics.jsonl"
        self.rates_path = self.run_dir / "rates.csv"
        self.prune_path = self.run_dir / "prune.csv"
        self.subscriber_id = f"metrics.{config_hash}.{seed}"
        self._bus: Optional[EventBus] = None

    def _owns(self, data: Dict[str, Any]) -> bool:
        return data.get("config_hash") == self.config_hash and data.get("seed") == self.seed

    def attach(self, bus: Optional[EventBus] = None) -> "MetricsCollector":
        """Truncate the artifact files and start listening."""
        self._bus = bus or get_event_bus()
        self.run_dir.mkdir(parents=True, exist_ok=True)
        if self.epochs:
            self.metrics_path.write_text("", encoding="utf-8")
            self._write_rows(self.rates_path, [RATES_HEADER], mode="w")
            self._bus.subscribe(EventType.EPOCH_COMPLETED, self._handle_epoch_completed, self.subscriber_id)
        if self.prune:
            self._write_rows(self.prune_path, [PRUNE_HEADER], mode="w")
            self._bus.subscribe(EventType.PRUNE_ROUND_COMPLETED, self._handle_prune_round, self.subscriber_id)
        logger.debug(f"Metrics collector attached for {self.config_hash}/{self.seed}")
        return self

    def detach(self) -> None:
        if self._bus is not None:
            self._bus.unsubscribe_all(self.subscriber_id)
            self._bus = None

    def __enter__(self) -> "MetricsCollector":
        return self.attach() if self._bus is None else self

    def __exit__(self, *exc) -> None:
        self.detach()

    @staticmethod
    def _write_rows(path: Path, rows: List[List[Any]], mode: str = "a") -> None:
        with open(path, mode, newline="", encoding="utf-8") as f:
            csv.writer(f, lineterminator="\n").writerows(rows)

    # Event handlers
    def _handle_epoch_completed(self, data: Dict[str, Any]) -> None:
        if not self._owns(data):
            return
        row = data["row"]
        line = canonical_json({"config_hash": self.config_hash, "seed": self.seed, **row})
        with open(self.metrics_path, "a", encoding="utf-8") as f:
            f.write(line + "\n")
        self._write_rows(self.rates_path, [
            [self.config_hash, self.seed, row["epoch"], site["site"], site["kind"], site["rate"],
             "" if site.get("mu_mean") is None else site["mu_mean"],
             "" if site.get("sigma_mean") is None else site["sigma_mean"]]
            for site in row["sites"]
        ])

    def _handle_prune_round(self, data: Dict[str, Any]) -> None:
        if not self._owns(data):
            return
        self._write_rows(self.prune_path, [[
            self.config_hash, self.seed, data["round"], data["kept_fraction"],
            data["granularity"], data["method"], data["accuracy"],
        ]])
