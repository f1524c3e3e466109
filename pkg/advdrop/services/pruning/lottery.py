"""
Prune, reset, retrain.
"""
import logging
from typing import List, Optional

from pydantic import BaseModel

from advdrop.schemas.experiment import Granularity, PruneMethod
from advdrop.schemas.model import FcSpec, Task
from advdrop.schemas.training import TrainConfig
from advdrop.services.data.dataset import Dataset
from advdrop.services.event_bus.bus import EventBus, get_event_bus
from advdrop.services.event_bus.events import EventType
from advdrop.services.network import build
from advdrop.services.pruning.pruner import node_rates, prune_round, reset_to_initial, snapshot
from advdrop.services.training import fit
from advdrop.utils.ids import Stream, make_rng

logger = logging.getLogger("advdrop.pruning")


class PruneResult(BaseModel):
    """Accuracy at one preservation level."""
    round: int
    kept_fraction: float
    granularity: Granularity
    method: PruneMethod
    accuracy: float


def lottery_cycle(
    spec: FcSpec,
    train: Dataset,
    test: Dataset,
    cfg: TrainConfig,
    rounds: int,
    q: float,
    granularity: Granularity = Granularity.NODE,
    method: PruneMethod = PruneMethod.RATE,
    config_hash: str = "",
    bus: Optional[EventBus] = None,
) -> List[PruneResult]:
    """
    Run rounds+1 trainings: the unpruned baseline, then one per pruning round.

    The network is initialized once from the INIT stream of cfg.seed, so
    round 0 matches a plain training run with that seed. Before each
    pruning round the per-node rates are re-evaluated on the training data.
    After pruning, kept weights return to their initial values, the prior
    parameters are reset completely and training restarts with a fresh optimizer.

    Returns:
        List[PruneResult]: One entry per round, round 0 first
    """
    bus = bus or get_event_bus()
    model = build(spec, make_rng(cfg.seed, Stream.INIT))
    state = snapshot(model, granularity)
    prune_rng = make_rng(cfg.seed, Stream.PRUNE)
    metric = "rmse" if spec.task is Task.REGRESSION else "accuracy"
    results: List[PruneResult] = []

    for round_index in range(rounds + 1):
        if round_index > 0:
            rates = node_rates(model, train.features, cfg.eval_batch_size) if method is PruneMethod.RATE else None
            state = prune_round(model, state, q, granularity, method, prune_rng, rates)
            reset_to_initial(model, state)
        record = fit(model, train, test, cfg, config_hash=config_hash, bus=bus)
        result = PruneResult(
            round=round_index,
            kept_fraction=state.kept_fraction,
            granularity=granularity,
            method=method,
            accuracy=record.final[f"test_{metric}"],
        )
        results.append(result)
        bus.publish(EventType.PRUNE_ROUND_COMPLETED, {
            "config_hash": config_hash, "seed": cfg.seed, **result.model_dump(mode="json"),
        })
        logger.info(
            f"Round {round_index}: kept {result.kept_fraction:.4f} {method.value} "
            f"test_{metric} {result.accuracy:.4f}"
        )
    return results
