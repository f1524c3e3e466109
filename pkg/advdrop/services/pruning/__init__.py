from advdrop.services.pruning.lottery import PruneResult, lottery_cycle
from advdrop.services.pruning.pruner import (
    PruneState,
    apply_masks,
    node_rates,
    parameter_masks,
    prune_round,
    pruned_entries_zero,
    reset_to_initial,
    snapshot,
)
