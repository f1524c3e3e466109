"""
Rate-guided pruning of hidden nodes or hidden-layer weights.

Node pruning removes a hidden node by zeroing its incoming weight row, its
bias and its outgoing weight column. Parameter pruning scores each
hidden-layer weight by the dropout rate of its output node and breaks
ties by pruning the smaller magnitude first. Output-layer weights and
the prior encoders are never pruned.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from advdrop.core.exceptions import ArgumentError, PruneExhaustedError
from advdrop.schemas.experiment import Granularity, PruneMethod

logger = logging.getLogger("advdrop.pruning")


@dataclass(frozen=True)
class PruneState:
    """
    Keep-masks and the initial-value snapshot of one pruning cycle.

    node_masks maps a hidden layer index to a boolean keep vector over its
    nodes; weight_masks maps a hidden weight name to a boolean keep matrix.
    Only the masks of the chosen granularity ever shrink.
    """
    granularity: Granularity
    node_masks: Dict[int, np.ndarray]
    weight_masks: Dict[str, np.ndarray]
    theta0: Dict[str, np.ndarray]
    lambda0: Dict[str, np.ndarray]
    round: int = 0
    history: List[float] = field(default_factory=lambda: [1.0])

    @property
    def kept_fraction(self) -> float:
        masks = self.node_masks.values() if self.granularity is Granularity.NODE else self.weight_masks.values()
        total = sum(m.size for m in masks)
        return float(sum(int(m.sum()) for m in masks) / total) if total else 1.0


def snapshot(model, granularity: Granularity = Granularity.NODE) -> PruneState:
    """Round-0 state: everything kept, current parameters recorded as the reset target."""
    hidden = model.linears[:-1]
    return PruneState(
        granularity=Granularity(granularity),
        node_masks={i: np.ones(linear.weight.shape[0], dtype=bool) for i, linear in enumerate(hidden)},
        weight_masks={linear.weight.name: np.ones(linear.weight.shape, dtype=bool) for linear in hidden},
        theta0={p.name: p.numpy() for p in model.theta_parameters()},
        lambda0={p.name: p.numpy() for p in model.lambda_parameters()},
    )


def node_rates(model, x: Optional[np.ndarray] = None, batch_size: int = 1000) -> Dict[int, np.ndarray]:
    """
    Per-node dropout rates of every hidden site.

    With x, the priors are re-evaluated in eval mode batch by batch and the
    per-batch rates averaged; otherwise the sites' latest telemetry is used.
    """
    sites = model.hidden_sites
    if x is None:
        return {i: site.dropout_rate()[0] for i, site in enumerate(sites)}
    totals = {i: np.zeros(site.in_dim) for i, site in enumerate(sites)}
    batches = 0
    for start in range(0, len(x), batch_size):
        model.refresh_telemetry(x[start:start + batch_size])
        for i, site in enumerate(sites):
            totals[i] += site.dropout_rate()[0]
        batches += 1
    return {i: total / max(batches, 1) for i, total in totals.items()}


def _choose(
    kept: np.ndarray,
    n_prune: int,
    method: PruneMethod,
    rng: Optional[np.random.Generator],
    primary: np.ndarray,
    secondary: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Indices (into the flattened kept set) to prune."""
    if method is PruneMethod.RANDOM:
        if rng is None:
            raise ArgumentError("Random pruning needs a generator")
        return np.sort(rng.choice(kept, size=n_prune, replace=False))
    secondary = np.zeros_like(primary) if secondary is None else secondary
    # Largest rate first, then smallest secondary key, then lowest index.
    order = np.lexsort((kept, secondary[kept], -primary[kept]))
    return kept[order[:n_prune]]


def prune_round(
    model,
    state: PruneState,
    q: float,
    granularity: Optional[Granularity] = None,
    method: PruneMethod = PruneMethod.RATE,
    rng: Optional[np.random.Generator] = None,
    rates: Optional[Dict[int, np.ndarray]] = None,
) -> PruneState:
    """
    Prune q% of the still-kept entries of every hidden layer.

    Args:
        model: Trained network; masks are applied to it before returning
        state: Current masks and snapshot
        q: Percent of the kept entries pruned per layer, 0 < q < 100
        granularity: node or parameter; defaults to the state's
        method: rate (largest dropout rates first) or random
        rng: Generator for the random method
        rates: Per-node rates per hidden layer; the sites' telemetry when omitted

    Returns:
        PruneState: Next-round state with monotonically shrunk masks

    Raises:
        ArgumentError: if q is out of range or the granularity changes mid-cycle
        PruneExhaustedError: if nothing is left to prune
        TelemetryStateError: if rates are needed and a site has none
    """
    if not 0 < q < 100:
        raise ArgumentError(f"Prune percentage must lie in (0, 100), got {q}")
    granularity = Granularity(granularity or state.granularity)
    if granularity is not state.granularity:
        raise ArgumentError("Granularity cannot change within a pruning cycle")
    method = PruneMethod(method)
    if method is PruneMethod.RATE and rates is None:
        rates = node_rates(model)

    node_masks = {i: m.copy() for i, m in state.node_masks.items()}
    weight_masks = {name: m.copy() for name, m in state.weight_masks.items()}
    pruned_total = 0
    kept_total = 0

    for layer, linear in enumerate(model.linears[:-1]):
        if granularity is Granularity.NODE:
            keep = node_masks[layer]
            kept = np.flatnonzero(keep)
            n_prune = int(round(q / 100.0 * len(kept)))
            layer_rates = rates[layer] if rates is not None else np.zeros(len(keep))
            chosen = _choose(kept, n_prune, method, rng, layer_rates) if n_prune else kept[:0]
            keep[chosen] = False
        else:
            name = linear.weight.name
            keep = weight_masks[name].reshape(-1)
            kept = np.flatnonzero(keep)
            n_prune = int(round(q / 100.0 * len(kept)))
            out_nodes = linear.weight.shape[0]
            layer_rates = rates[layer] if rates is not None else np.zeros(out_nodes)
            primary = np.repeat(layer_rates, linear.weight.shape[1])
            magnitude = np.abs(linear.weight.data).reshape(-1)
            chosen = _choose(kept, n_prune, method, rng, primary, magnitude) if n_prune else kept[:0]
            keep[chosen] = False
            weight_masks[name] = keep.reshape(linear.weight.shape)
        kept_total += len(kept)
        pruned_total += len(chosen)

    if kept_total == 0:
        raise PruneExhaustedError("Every prunable entry is already pruned")

    next_state = replace(state, node_masks=node_masks, weight_masks=weight_masks, round=state.round + 1)
    next_state = replace(next_state, history=[*state.history, next_state.kept_fraction])
    apply_masks(model, next_state)
    logger.info(
        f"Prune round {next_state.round} ({granularity.value}, {method.value}): "
        f"pruned {pruned_total}, kept fraction {next_state.kept_fraction:.4f}"
    )
    return next_state


def parameter_masks(model, state: PruneState) -> Dict[str, np.ndarray]:
    """Per-parameter keep masks implied by the state's node or weight masks."""
    masks: Dict[str, np.ndarray] = {}
    linears = model.linears
    for layer, linear in enumerate(linears[:-1]):
        w = masks.get(linear.weight.name, np.ones(linear.weight.shape, dtype=bool))
        if state.granularity is Granularity.NODE:
            keep = state.node_masks[layer]
            masks[linear.weight.name] = w & keep[:, None]
            masks[linear.bias.name] = keep.copy()
            following = linears[layer + 1].weight
            masks[following.name] = masks.get(following.name, np.ones(following.shape, dtype=bool)) & keep[None, :]
        else:
            masks[linear.weight.name] = w & state.weight_masks[linear.weight.name]
    return masks


def apply_masks(model, state: PruneState) -> None:
    """Install keep-masks so pruned entries are zero and receive no updates."""
    params = model.named_parameters()
    for name, mask in parameter_masks(model, state).items():
        params[name].set_keep_mask(mask)


def reset_to_initial(model, state: PruneState) -> None:
    """Kept weights back to their initial values, prior parameters fully reset, site statistics cleared."""
    params = model.named_parameters()
    for name, value in state.theta0.items():
        params[name].assign(value)
    for name, value in state.lambda0.items():
        params[name].assign(value)
    for site in model.advanced_sites:
        site.last_mu = site.last_sigma = None
        site.running_mu = site.running_sigma = None


def pruned_entries_zero(model, state: PruneState) -> bool:
    """True when every entry outside the keep-masks is exactly zero."""
    params = model.named_parameters()
    return all(
        not np.any(params[name].data[~mask]) for name, mask in parameter_masks(model, state).items()
    )
