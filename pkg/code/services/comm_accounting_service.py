import logging
from typing import Literal, Optional, Tuple, Union

import numpy as np

from config.settings import SETTINGS
from models.comm_model import A2AAccount, BoundCertificate, RoutingCounts
from models.layout_model import ExpertLayout
from models.trace_model import RoutingTrace
from utils.errors import LayoutError

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".services.comm_accounting_service")

TokenSource = Union[Literal["attention"], np.ndarray]


def _check_coverage(selections: np.ndarray, layout: ExpertLayout, layer: int) -> None:
    if selections.size and int(selections.max()) >= layout.n_experts:
        bad = int(selections.max())
        raise LayoutError(f"expert {bad} of layer {layer} is not covered by the layout "
                          f"({layout.n_experts} experts placed)", expert=bad, layer=layer)


def route_tokens(selections: np.ndarray, layout: ExpertLayout, dedup: bool = True) -> RoutingCounts:
    """
    Route (n, k) expert selections through a layout.

    dedup=True sends one replica per distinct chiplet a token touches;
    dedup=False is plain expert parallelism with one replica per selected expert.
    Combine traffic leaving a switch is aggregated per group in both cases.
    """
    sel = np.asarray(selections, dtype=np.intp)
    n, k = sel.shape
    n_c, n_g = layout.n_clusters, layout.n_groups
    _check_coverage(sel, layout, layout.layer)
    chiplet = layout.expert_to_chiplet()[sel]
    group_of_chiplet = np.asarray(layout.group_of_chiplet, dtype=np.intp)
    rows = np.arange(n)[:, None]

    pairs_per_chiplet = np.bincount(chiplet.ravel(), minlength=n_c)
    if dedup:
        touched = np.zeros((n, n_c), dtype=bool)
        touched[rows, chiplet] = True
        replicas_per_token = touched.sum(axis=1)
        replicas_per_chiplet = touched.sum(axis=0)
    else:
        replicas_per_token = np.full(n, k, dtype=np.int64)
        replicas_per_chiplet = pairs_per_chiplet
    group_touched = np.zeros((n, n_g), dtype=bool)
    group_touched[rows, group_of_chiplet[chiplet]] = True

    return RoutingCounts(
        dedup=dedup,
        replicas_per_token=replicas_per_token.astype(np.int64),
        replicas_per_chiplet=replicas_per_chiplet.astype(np.int64),
        replicas_per_group=np.bincount(group_of_chiplet, weights=replicas_per_chiplet, minlength=n_g).astype(np.int64),
        touches_per_group=group_touched.sum(axis=0).astype(np.int64),
        tokens_per_expert=np.bincount(sel.ravel(), minlength=layout.n_experts).astype(np.int64),
        pairs_per_chiplet=pairs_per_chiplet.astype(np.int64),
    )


def account_all_to_all(
    trace: RoutingTrace,
    layout: ExpertLayout,
    layer: int,
    token_source: TokenSource = "attention",
    hidden_size: Optional[int] = None,
    dedup: bool = True,
    token_index: Optional[np.ndarray] = None,
) -> A2AAccount:
    """
    Dispatch/combine volume of one layer under a layout.

    token_source "attention" means every token starts on the attention chiplet,
    so every replica crosses the package network. An (n,) array instead gives
    each token's originating MoE chiplet, and replicas landing there stay local.
    """
    sel = trace.layer(layer, token_index)
    counts = route_tokens(sel, layout, dedup)
    n = counts.n_tokens
    total = counts.total_replicas

    if isinstance(token_source, str):
        if token_source != "attention":
            raise LayoutError(f"unknown token source '{token_source}'")
        intra = 0
    else:
        src = np.asarray(token_source, dtype=np.intp)
        if src.shape != (n,):
            raise LayoutError(f"token source must give one chiplet per token ({n}), got {src.shape}")
        chiplet = layout.expert_to_chiplet()[sel]
        on_source = chiplet == src[:, None]
        intra = int(on_source.any(axis=1).sum()) if dedup else int(on_source.sum())

    hidden = hidden_size if hidden_size is not None else (trace.model.hidden_size if trace.model else 0)
    bpe = SETTINGS.BYTES_PER_ELEMENT
    inter = total - intra
    account = A2AAccount(
        layer=layer,
        n_tokens=n,
        top_k=trace.top_k,
        dedup=dedup,
        c_t=float(total / n) if n else 0.0,
        min_replicas=int(counts.replicas_per_token.min()) if n else 0,
        max_replicas=int(counts.replicas_per_token.max()) if n else 0,
        total_replicas=total,
        inter_chiplet_tokens=inter,
        intra_chiplet_tokens=intra,
        group_touches=int(counts.touches_per_group.sum()),
        hidden_size=hidden,
        bytes_per_element=bpe,
        bytes_dispatched=inter * hidden * bpe * 2,
        bytes_combined=int(counts.touches_per_group.sum()) * hidden * bpe,
    )
    log.debug({"event": "a2a_accounted", "layer": layer, "c_t": account.c_t, "dedup": dedup})
    return account


def verify_bound(account: A2AAccount, k: int) -> Tuple[bool, BoundCertificate]:
    """inter-chiplet replicas <= C_T * n <= k * n, checked on exact integers."""
    replica_volume = account.total_replicas
    upper = k * account.n_tokens
    holds = account.inter_chiplet_tokens <= replica_volume <= upper
    cert = BoundCertificate(
        inter_chiplet_tokens=account.inter_chiplet_tokens,
        replica_volume=replica_volume,
        upper_bound=upper,
        holds=holds,
    )
    if not holds:
        log.error({"event": "a2a_bound_violated", "layer": account.layer, **cert.model_dump()})
    return holds, cert
