import logging
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config.settings import SETTINGS
from models.comm_model import RoutingCounts
from models.hardware_model import HardwareSpec
from models.layout_model import ExpertLayout
from models.model_spec import ModelSpec
from models.run_model import (
    Breakdown, EventTimeline, LayerRow, MethodFlags, RunConfig, StepReport, TimelineEvent,
)
from models.trace_model import RoutingTrace
from services import cost_model_service as cost
from services.comm_accounting_service import route_tokens
from tools.event_engine import EventEngine, Schedule, TaskGraph
from utils.errors import LayoutError, SimulationError, SimulationInvariantError, SramCapacityError

log = logging.getLogger(SETTINGS.LOGGING_APP_NAME + ".services.simulation_service")

FORWARD_CATEGORIES = {
    "attn_weights": "weight_stream",
    "expert_weights": "weight_stream",
    "save_attn_act": "weight_stream",
    "save_expert_act": "weight_stream",
    "attention": "attention_compute",
    "expert": "expert_compute",
    "dispatch_root": "a2a",
    "dispatch_leaf": "a2a",
    "combine_leaf": "aggregate_combine",
    "aggregate": "aggregate_combine",
    "combine_root": "aggregate_combine",
}


def _root(g: int) -> str:
    return f"nop_edge[root{g}]"


def _leaf(c: int) -> str:
    return f"nop_edge[leaf{c}]"


class _StepGraphBuilder:
    """
    Emits the task graph of one training step.

    Micro-batches run serially; each runs forward through every layer and then
    backward in reverse. Without overlap every phase is fenced by a barrier;
    with overlap only data and buffer dependencies remain. Emission order, and
    therefore every resource's service order, is identical in both cases.
    """

    def __init__(self, model: ModelSpec, hw: HardwareSpec, flags: MethodFlags, layouts: Sequence[ExpertLayout], seq_len: int):
        self.model = model
        self.hw = hw
        self.flags = flags
        self.layouts = layouts
        self.seq_len = seq_len
        self.g = TaskGraph()
        self.gate: Optional[int] = None
        self.prev_exit: Optional[int] = None
        self.last_attention: Optional[int] = None
        self.last_on_chiplet: Dict[int, int] = {}

        self.hb = cost.token_bytes(model, 1)
        self.attn_w_bytes = cost.attention_weight_bytes(model)
        self.expert_w_bytes = cost.expert_weight_bytes(model)
        self.mult = hw.calibration.backward_multiplier

    # ---------- helpers ----------

    def _deps(self, *deps: Optional[int]) -> List[int]:
        out = [d for d in deps if d is not None]
        if not self.flags.overlap and self.gate is not None:
            out.append(self.gate)
        return out

    def _close(self, tids: Sequence[int], **meta) -> None:
        if not self.flags.overlap and tids:
            self.gate = self.g.barrier(tids, **meta)

    def _xfer(self, nbytes: int, channel: str) -> float:
        return cost.transfer_latency(nbytes, channel, self.hw).latency_s

    def _weights(self, nbytes: int) -> float:
        # DRAM stack to chiplet through the hybrid bond; the slower leg bounds it
        return max(self._xfer(nbytes, "dram_group"), self._xfer(nbytes, "hybrid_bond"))

    def _compute(self, flops: float, chiplet_class: str) -> float:
        return cost.compute_latency(flops, chiplet_class, self.hw).latency_s

    def _cluster_order(self, layout: ExpertLayout, g: int) -> List[int]:
        if self.flags.specialized_layout:
            return list(layout.load_priority[g])
        return sorted(c for c in range(layout.n_clusters) if layout.group_of_cluster(c) == g)

    def _expert_order(self, layout: ExpertLayout, cluster: int, counts: RoutingCounts) -> List[int]:
        # heaviest expert first
        return sorted(layout.clusters[cluster], key=lambda e: (-int(counts.tokens_per_expert[e]), e))

    # ---------- stages ----------

    def forward(self, mb: int, layer: int, counts: RoutingCounts, selections: Optional[np.ndarray] = None) -> None:
        lay, model, hw = self.layouts[layer], self.model, self.hw
        meta = dict(layer=layer, micro_batch=mb, pass_="forward")
        n_tok = counts.n_tokens
        if selections is not None:
            check_switch_conservation(selections, lay, counts)

        # weights: DRAM stack, then the switch -> chiplet edge ahead of the tokens
        phase: List[int] = []
        aw = self.g.add("dram_channel_attn", "attn_weights", self._xfer(self.attn_w_bytes, "dram_attention"),
                        self._deps(self.last_attention), category="weight_stream", nbytes=self.attn_w_bytes, **meta)
        phase.append(aw)
        ew: Dict[int, int] = {}
        cluster_bytes = self.expert_w_bytes * len(lay.clusters[0])
        for g in range(hw.n_groups):
            for c in self._cluster_order(lay, g):
                chip = lay.chiplet_of_cluster[c]
                d = self.g.add(f"dram_channel[{g}]", "expert_weights", self._weights(cluster_bytes),
                               self._deps(self.last_on_chiplet.get(chip)), category="weight_stream",
                               nbytes=cluster_bytes, **meta)
                ew[c] = self.g.add(_leaf(chip), "expert_weights", self._xfer(cluster_bytes, "nop_edge"),
                                   self._deps(d), category="weight_stream", nbytes=cluster_bytes, **meta)
                phase.extend((d, ew[c]))
        self._close(phase)

        # attention, router and shared experts
        flops = (cost.attention_flops(model, n_tok, self.seq_len) + cost.router_flops(model, n_tok)
                 + cost.shared_expert_flops(model, n_tok))
        ac = self.g.add("attention_chiplet", "attention", self._compute(flops, "attention"),
                        self._deps(aw, self.prev_exit), category="attention_compute", flops=flops, **meta)
        self._close([ac])

        # dispatch: attention -> switch -> chiplet
        dr: Dict[int, int] = {}
        for g in range(hw.n_groups):
            nbytes = int(counts.replicas_per_group[g]) * self.hb
            dr[g] = self.g.add(_root(g), "dispatch_root", self._xfer(nbytes, "nop_edge"), self._deps(ac),
                               category="a2a", nbytes=nbytes, **meta)
        dl: Dict[int, int] = {}
        for chip in range(hw.n_moe_chiplets):
            nbytes = int(counts.replicas_per_chiplet[chip]) * self.hb
            dl[chip] = self.g.add(_leaf(chip), "dispatch_leaf", self._xfer(nbytes, "nop_edge"),
                                  self._deps(dr[lay.group_of_chiplet[chip]]), category="a2a", nbytes=nbytes, **meta)
        self._close(list(dr.values()) + list(dl.values()))

        # experts, one after another on each chiplet
        last_ec: Dict[int, int] = {}
        cluster_on = lay.cluster_on_chiplet()
        for chip in range(hw.n_moe_chiplets):
            c = int(cluster_on[chip])
            for e in self._expert_order(lay, c, counts):
                flops = cost.expert_flops(model, int(counts.tokens_per_expert[e]))
                last_ec[chip] = self.g.add(f"moe_chiplet[{chip}]", "expert", self._compute(flops, "moe"),
                                           self._deps(dl[chip], ew[c], last_ec.get(chip)),
                                           category="expert_compute", flops=flops, **meta)
        self._close(list(last_ec.values()))

        # activation saves
        saves: List[int] = []
        nbytes = cost.attention_activation_bytes(model, n_tok)
        saves.append(self.g.add("dram_channel_attn", "save_attn_act", self._xfer(nbytes, "dram_attention"),
                                self._deps(ac), category="weight_stream", nbytes=nbytes, **meta))
        for chip in range(hw.n_moe_chiplets):
            nbytes = cost.expert_activation_bytes(model, int(counts.pairs_per_chiplet[chip]))
            saves.append(self.g.add(f"dram_channel[{lay.group_of_chiplet[chip]}]", "save_expert_act",
                                    self._xfer(nbytes, "dram_group"), self._deps(last_ec[chip]),
                                    category="weight_stream", nbytes=nbytes, **meta))
        self._close(saves)

        # combine: chiplet -> switch (aggregate) -> attention
        cl: Dict[int, int] = {}
        for chip in range(hw.n_moe_chiplets):
            nbytes = int(counts.replicas_per_chiplet[chip]) * self.hb
            cl[chip] = self.g.add(_leaf(chip), "combine_leaf", self._xfer(nbytes, "nop_edge"),
                                  self._deps(last_ec[chip]), category="aggregate_combine", nbytes=nbytes, **meta)
        cr: List[int] = []
        for g in range(hw.n_groups):
            members = [cl[chip] for chip in range(hw.n_moe_chiplets) if lay.group_of_chiplet[chip] == g]
            sw = self.g.add(f"switch[{g}]", "aggregate", 0.0, self._deps(*members), category="aggregate_combine", **meta)
            nbytes = int(counts.touches_per_group[g]) * self.hb
            cr.append(self.g.add(_root(g), "combine_root", self._xfer(nbytes, "nop_edge"), self._deps(sw),
                                 category="aggregate_combine", nbytes=nbytes, **meta))
        self._close(list(cl.values()) + cr)

        self.prev_exit = self.g.barrier(cr, **meta)
        self.last_attention = ac
        self.last_on_chiplet.update(last_ec)

    def backward(self, mb: int, layer: int, counts: RoutingCounts) -> None:
        lay, model, hw = self.layouts[layer], self.model, self.hw
        meta = dict(layer=layer, micro_batch=mb, pass_="backward", category="backward")
        n_tok = counts.n_tokens

        # weights come back for the gradient computation
        phase: List[int] = []
        awb = self.g.add("dram_channel_attn", "attn_weights", self._xfer(self.attn_w_bytes, "dram_attention"),
                         self._deps(self.last_attention), nbytes=self.attn_w_bytes, **meta)
        phase.append(awb)
        ewb: Dict[int, int] = {}
        cluster_bytes = self.expert_w_bytes * len(lay.clusters[0])
        for g in range(hw.n_groups):
            for c in self._cluster_order(lay, g):
                chip = lay.chiplet_of_cluster[c]
                d = self.g.add(f"dram_channel[{g}]", "expert_weights", self._weights(cluster_bytes),
                               self._deps(self.last_on_chiplet.get(chip)), nbytes=cluster_bytes, **meta)
                ewb[c] = self.g.add(_leaf(chip), "expert_weights", self._xfer(cluster_bytes, "nop_edge"),
                                    self._deps(d), nbytes=cluster_bytes, **meta)
                phase.extend((d, ewb[c]))
        self._close(phase)

        # output gradients retrace the combine path
        gdr: Dict[int, int] = {}
        for g in range(hw.n_groups):
            nbytes = int(counts.touches_per_group[g]) * self.hb
            gdr[g] = self.g.add(_root(g), "grad_dispatch_root", self._xfer(nbytes, "nop_edge"),
                                self._deps(self.prev_exit), nbytes=nbytes, **meta)
        gdl: Dict[int, int] = {}
        for chip in range(hw.n_moe_chiplets):
            nbytes = int(counts.replicas_per_chiplet[chip]) * self.hb
            gdl[chip] = self.g.add(_leaf(chip), "grad_dispatch_leaf", self._xfer(nbytes, "nop_edge"),
                                   self._deps(gdr[lay.group_of_chiplet[chip]]), nbytes=nbytes, **meta)
        self._close(list(gdr.values()) + list(gdl.values()))

        last_ebc: Dict[int, int] = {}
        cluster_on = lay.cluster_on_chiplet()
        for chip in range(hw.n_moe_chiplets):
            c = int(cluster_on[chip])
            for e in self._expert_order(lay, c, counts):
                tokens = int(counts.tokens_per_expert[e])
                flops = int(self.mult * cost.expert_flops(model, tokens))
                duration = (self._compute(flops, "moe")
                            + self._xfer(cost.expert_activation_bytes(model, tokens), "sram"))
                last_ebc[chip] = self.g.add(f"moe_chiplet[{chip}]", "expert_backward", duration,
                                            self._deps(gdl[chip], ewb[c], last_ebc.get(chip)), flops=flops, **meta)
        self._close(list(last_ebc.values()))

        # input gradients retrace the dispatch path
        gcl: Dict[int, int] = {}
        for chip in range(hw.n_moe_chiplets):
            nbytes = int(counts.replicas_per_chiplet[chip]) * self.hb
            gcl[chip] = self.g.add(_leaf(chip), "grad_combine_leaf", self._xfer(nbytes, "nop_edge"),
                                   self._deps(last_ebc[chip]), nbytes=nbytes, **meta)
        gcr: List[int] = []
        for g in range(hw.n_groups):
            members = [gcl[chip] for chip in range(hw.n_moe_chiplets) if lay.group_of_chiplet[chip] == g]
            nbytes = int(counts.replicas_per_group[g]) * self.hb
            gcr.append(self.g.add(_root(g), "grad_combine_root", self._xfer(nbytes, "nop_edge"),
                                  self._deps(*members), nbytes=nbytes, **meta))
        self._close(list(gcl.values()) + gcr)

        # weight gradients follow the input gradients out over the leaf edge
        wb: List[int] = []
        for g in range(hw.n_groups):
            for c in self._cluster_order(lay, g):
                chip = lay.chiplet_of_cluster[c]
                up = self.g.add(_leaf(chip), "grad_writeback", self._xfer(cluster_bytes, "nop_edge"),
                                self._deps(last_ebc[chip]), nbytes=cluster_bytes, **meta)
                wb.extend((up, self.g.add(f"dram_channel[{g}]", "grad_writeback", self._weights(cluster_bytes),
                                          self._deps(up), nbytes=cluster_bytes, **meta)))
        self._close(wb)

        fwd = (cost.attention_flops(model, n_tok, self.seq_len) + cost.router_flops(model, n_tok)
               + cost.shared_expert_flops(model, n_tok))
        flops = int(self.mult * fwd)
        duration = (self._compute(flops, "attention")
                    + self._xfer(cost.attention_activation_bytes(model, n_tok), "sram"))
        abc = self.g.add("attention_chiplet", "attention_backward", duration, self._deps(awb, *gcr), flops=flops, **meta)
        self._close([abc])

        awbk = self.g.add("dram_channel_attn", "grad_writeback", self._xfer(self.attn_w_bytes, "dram_attention"),
                          self._deps(abc), nbytes=self.attn_w_bytes, **meta)
        self._close([awbk])

        self.prev_exit = self.g.barrier([abc], layer=layer, micro_batch=mb, pass_="backward")
        self.last_attention = abc
        self.last_on_chiplet.update(last_ebc)


# ---------- validation ----------

def _normalize_layouts(model: ModelSpec, hw: HardwareSpec,
                       layout: Union[ExpertLayout, Sequence[ExpertLayout]]) -> List[ExpertLayout]:
    layouts = [layout] * model.n_layers if isinstance(layout, ExpertLayout) else list(layout)
    if len(layouts) != model.n_layers:
        raise LayoutError(f"{len(layouts)} layouts for a {model.n_layers}-layer model")
    for i, lay in enumerate(layouts):
        if lay.n_experts != model.n_routed_experts:
            raise LayoutError(f"layout of layer {i} places {lay.n_experts} experts, model has {model.n_routed_experts}", layer=i)
        if lay.n_clusters != hw.n_moe_chiplets or lay.group_of_chiplet != hw.group_of_chiplet:
            raise LayoutError(f"layout of layer {i} does not match the {hw.n_moe_chiplets}-chiplet, "
                              f"{hw.n_groups}-group topology", layer=i)
    return layouts


def _check_trace(model: ModelSpec, trace: RoutingTrace) -> None:
    if (trace.n_layers, trace.n_experts, trace.top_k) != (model.n_layers, model.n_routed_experts, model.top_k):
        raise SimulationError(
            f"trace shape (layers={trace.n_layers}, N_e={trace.n_experts}, k={trace.top_k}) does not match "
            f"model {model.name} (layers={model.n_layers}, N_e={model.n_routed_experts}, k={model.top_k})"
        )


def check_switch_conservation(selections: np.ndarray, layout: ExpertLayout, counts: RoutingCounts) -> None:
    """
    Recount from the raw selections what each switch must forward and compare
    it with the counts the task graph is built from. A switch forwards every
    replica it receives and combines at most one result per received replica.
    """
    sel = np.asarray(selections, dtype=np.intp)
    n_c, n_g = layout.n_clusters, layout.n_groups
    group_of_chiplet = np.asarray(layout.group_of_chiplet, dtype=np.intp)
    chiplet = layout.expert_to_chiplet()[sel]
    if counts.dedup:
        pairs = np.unique((np.arange(sel.shape[0])[:, None] * n_c + chiplet).ravel())
        received = np.bincount(group_of_chiplet[pairs % n_c], minlength=n_g)
    else:
        received = np.bincount(group_of_chiplet[chiplet].ravel(), minlength=n_g)
    forwarded = np.bincount(group_of_chiplet, weights=counts.replicas_per_chiplet, minlength=n_g).astype(np.int64)
    for g in range(n_g):
        if int(counts.replicas_per_group[g]) != int(received[g]):
            raise SimulationInvariantError(f"layer {layout.layer}: switch {g} receives {received[g]} replicas, "
                                           f"counts carry {counts.replicas_per_group[g]}")
        if int(forwarded[g]) != int(received[g]):
            raise SimulationInvariantError(f"layer {layout.layer}: switch {g} receives {received[g]} replicas "
                                           f"but forwards {forwarded[g]}")
        if int(counts.touches_per_group[g]) > int(received[g]):
            raise SimulationInvariantError(f"layer {layout.layer}: switch {g} combines more tokens than it received")


def _check_sram(model: ModelSpec, hw: HardwareSpec, layer: int, counts: RoutingCounts) -> None:
    need = cost.attention_activation_bytes(model, counts.n_tokens)
    if need > hw.sram_capacity("attention"):
        raise SramCapacityError("attention activations exceed SRAM", layer, need, int(hw.sram_capacity("attention")), "attention chiplet")
    need = cost.expert_activation_bytes(model, int(counts.pairs_per_chiplet.max(initial=0)))
    if need > hw.sram_capacity("moe"):
        raise SramCapacityError("expert activations exceed SRAM", layer, need, int(hw.sram_capacity("moe")), "MoE chiplet")


def step_token_index(run: RunConfig, trace: RoutingTrace, step: int) -> List[np.ndarray]:
    """Token ids of each micro-batch of a step; the trace is walked cyclically."""
    per_mb = run.tokens_per_micro_batch
    if trace.n_tokens == 0:
        return [np.empty(0, dtype=np.intp) for _ in range(run.micro_batches)]
    base = step * run.tokens_per_step
    return [
        (base + m * per_mb + np.arange(per_mb, dtype=np.intp)) % trace.n_tokens
        for m in range(run.micro_batches)
    ]


# ---------- reporting ----------

def _breakdown(schedule: Schedule) -> Breakdown:
    groups: Dict[str, List[int]] = {k: [] for k in Breakdown.model_fields}
    for t in schedule.real_tasks():
        groups[t.category].append(t.tid)
    return Breakdown(**{k: schedule.union_length(v) for k, v in groups.items()})


def _energy(schedule: Schedule, hw: HardwareSpec) -> float:
    busy = schedule.busy_by_resource()
    domains = {
        "attention": sum(v for r, v in busy.items() if r == "attention_chiplet"),
        "moe": sum(v for r, v in busy.items() if r.startswith("moe_chiplet")),
        "switch": sum(v for r, v in busy.items() if r.startswith("nop_edge[root")),
        "dram": sum(v for r, v in busy.items() if r.startswith("dram_channel")),
    }
    return cost.energy_of(domains, hw, span_s=schedule.makespan)


def _timeline(schedule: Schedule, step: int) -> List[TimelineEvent]:
    return [
        TimelineEvent(step=step, time_s=schedule.start[t.tid], duration_s=t.duration, resource=t.resource,
                      kind=t.kind, layer=t.layer, micro_batch=t.micro_batch, pass_=t.pass_,
                      bytes=t.nbytes, flops=t.flops)
        for t in schedule.real_tasks()
    ]


def simulate_step(
    model: ModelSpec,
    hw: HardwareSpec,
    run: RunConfig,
    layout: Union[ExpertLayout, Sequence[ExpertLayout]],
    trace: RoutingTrace,
    with_timeline: bool = True,
    engine: Optional[EventEngine] = None,
) -> Tuple[StepReport, EventTimeline]:
    layouts = _normalize_layouts(model, hw, layout)
    _check_trace(model, trace)
    engine = engine or EventEngine()
    flags = run.flags
    bpe2 = 2 * SETTINGS.BYTES_PER_ELEMENT * model.hidden_size

    latencies: List[float] = []
    breakdowns: List[Breakdown] = []
    energies: List[float] = []
    events: List[TimelineEvent] = []
    totals = {"flops": 0, "dram": 0, "nop": 0, "tasks": 0}
    layer_acc = [dict(replicas=0, tokens=0, touches=0, flops=0, wbytes=0) for _ in range(model.n_layers)]

    for step in range(run.n_steps):
        builder = _StepGraphBuilder(model, hw, flags, layouts, run.seq_len)
        for mb, idx in enumerate(step_token_index(run, trace, step)):
            selections = [trace.layer(l, idx) for l in range(model.n_layers)]
            counts = [route_tokens(selections[l], layouts[l], dedup=flags.efficient_a2a) for l in range(model.n_layers)]
            for l in range(model.n_layers):
                _check_sram(model, hw, l, counts[l])
                builder.forward(mb, l, counts[l], selections[l])
                acc = layer_acc[l]
                acc["replicas"] += counts[l].total_replicas
                acc["tokens"] += counts[l].n_tokens
                acc["touches"] += int(counts[l].touches_per_group.sum())
                acc["flops"] += cost.expert_flops(model, int(counts[l].tokens_per_expert.sum()))
                acc["wbytes"] += cost.expert_weight_bytes(model) * model.n_routed_experts
            for l in reversed(range(model.n_layers)):
                builder.backward(mb, l, counts[l])

        schedule = engine.run(builder.g)
        latencies.append(schedule.makespan)
        bd = _breakdown(schedule)
        if not (max(bd.model_dump().values(), default=0.0) <= schedule.makespan * (1 + 1e-9) + 1e-15
                and schedule.makespan <= bd.total() * (1 + 1e-9) + 1e-15):
            raise SimulationInvariantError(f"breakdown {bd.model_dump()} inconsistent with latency {schedule.makespan}")
        breakdowns.append(bd)
        energies.append(_energy(schedule, hw))
        for t in schedule.real_tasks():
            totals["flops"] += t.flops
            if t.resource.startswith("dram_channel"):
                totals["dram"] += t.nbytes
            elif t.resource.startswith("nop_edge"):
                totals["nop"] += t.nbytes
        totals["tasks"] += len(schedule.real_tasks())
        if with_timeline:
            events.extend(_timeline(schedule, step))

    per_layer = []
    for l, acc in enumerate(layer_acc):
        c_t = acc["replicas"] / acc["tokens"] if acc["tokens"] else 0.0
        per_layer.append(LayerRow(
            layer=l, c_t=c_t, inter_chiplet_tokens=acc["replicas"],
            bytes_dispatched=acc["replicas"] * bpe2, bytes_combined=acc["touches"] * bpe2 // 2,
            expert_flops=acc["flops"], weight_bytes=acc["wbytes"],
        ))

    n = run.n_steps
    report = StepReport(
        model=model.name,
        hardware=hw.name,
        dram_kind=hw.dram.kind,
        method=run.method,
        seq_len=run.seq_len,
        n_steps=n,
        latency_s=sum(latencies) / n,
        breakdown=Breakdown(**{k: sum(getattr(b, k) for b in breakdowns) / n for k in Breakdown.model_fields}),
        energy_j=sum(energies) / n,
        c_t_mean=float(np.mean([r.c_t for r in per_layer])) if per_layer else 0.0,
        total_flops=totals["flops"],
        total_dram_bytes=totals["dram"],
        total_nop_bytes=totals["nop"],
        n_tasks=totals["tasks"],
        per_layer=per_layer,
    )
    log.info({"event": "step_simulated", "model": model.name, "method": run.method.value, "dram": hw.dram.kind,
              "seq_len": run.seq_len, "latency_s": report.latency_s, "c_t_mean": report.c_t_mean,
              "energy_j": report.energy_j, "tasks": report.n_tasks})
    return report, EventTimeline(events=events)


class SimulationService:
    """Simulates training steps of one model on one hardware configuration."""

    def __init__(self, model: ModelSpec, hw: HardwareSpec, engine: Optional[EventEngine] = None):
        self.model = model
        self.hw = hw
        self.engine = engine or EventEngine()
        log.info({"event": "simulation_service_ready", "model": model.name, "hardware": hw.name,
                  "dram": hw.dram.kind, "chiplets": hw.n_moe_chiplets, "groups": hw.n_groups})

    def simulate(self, run: RunConfig, layouts: Sequence[ExpertLayout], trace: RoutingTrace,
                 with_timeline: bool = True) -> Tuple[StepReport, EventTimeline]:
        return simulate_step(self.model, self.hw, run, layouts, trace, with_timeline, self.engine)
