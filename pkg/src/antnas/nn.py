"""Executable graph RNNs built from genomes, trained by full-sequence BPTT.

Hidden nodes are ``tanh`` units with a bias; input nodes copy their feature
column; output nodes are linear without bias. At every time step a node sums
feed-forward in-edges from the same step and recurrent in-edges from
``t - skip`` (zero before the sequence starts).

Parameter vector layout: feed-forward weights, then recurrent weights, then
one bias per hidden node, each block in edge/node order of the graph.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numba
import numpy as np

from .colony import Genome

INPUT, HIDDEN, OUTPUT = 0, 1, 2


@dataclass(frozen=True)
class RnnGraph:
    n_inputs: int
    n_outputs: int
    node_ids: np.ndarray  # genome node id at each topological position
    kind: np.ndarray
    feature: np.ndarray  # input column for input nodes, output column for outputs, else -1
    bias_param: np.ndarray  # parameter index of the node's bias, or -1
    # incoming edges grouped by destination position (CSR)
    in_ptr: np.ndarray
    in_src: np.ndarray
    in_param: np.ndarray
    in_skip: np.ndarray  # 0 for feed-forward edges
    output_pos: np.ndarray  # topological position of output column j
    n_ff: int
    n_rec: int

    @property
    def n_params(self) -> int:
        return self.n_ff + self.n_rec + int((self.bias_param >= 0).sum())


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    learning_rate: float = 0.01
    gradient_clip: float = 1.0
    weight_init_scale: float = 0.1
    validation_fraction: float = 0.2
    optimizer: str = "sgd"  # "sgd" (plain gradient descent) or "adam"

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if not 0 < self.validation_fraction <= 0.5:
            raise ValueError("validation_fraction must be in (0, 0.5]")
        if self.gradient_clip <= 0 or self.weight_init_scale < 0:
            raise ValueError("gradient_clip must be > 0 and weight_init_scale >= 0")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class TrainResult:
    weights: np.ndarray
    validation_mse: float
    train_mse: list[float]


def compile_genome(genome: Genome) -> RnnGraph:
    """Lay out a genome for execution.

    Nodes are ordered topologically over feed-forward edges, ties broken by
    centroid ``(y, x)`` then node id.
    """
    by_id = {n.id: n for n in genome.nodes}
    indeg = {n.id: 0 for n in genome.nodes}
    succ: dict[int, list[int]] = {n.id: [] for n in genome.nodes}
    for a, b in genome.ff_edges:
        succ[a].append(b)
        indeg[b] += 1

    def key(nid):
        c = by_id[nid].centroid
        return (c.y, c.x, nid)

    heap = [key(n) for n, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        nid = heapq.heappop(heap)[2]
        order.append(nid)
        for m in succ[nid]:
            indeg[m] -= 1
            if indeg[m] == 0:
                heapq.heappush(heap, key(m))
    if len(order) != len(genome.nodes):
        raise RuntimeError("feed-forward edges of the genome contain a cycle")

    pos = {nid: i for i, nid in enumerate(order)}
    n = len(order)
    kinds = {"input": INPUT, "hidden": HIDDEN, "output": OUTPUT}
    kind = np.array([kinds[by_id[i].kind] for i in order], dtype=np.int64)
    feature = np.array([by_id[i].index for i in order], dtype=np.int64)

    n_ff, n_rec = len(genome.ff_edges), len(genome.rec_edges)
    incoming: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
    for p, (a, b) in enumerate(genome.ff_edges):
        incoming[pos[b]].append((pos[a], p, 0))
    for p, (a, b, skip) in enumerate(genome.rec_edges):
        if skip < 1:
            raise ValueError("recurrent time_skip must be >= 1")
        incoming[pos[b]].append((pos[a], n_ff + p, skip))

    bias_param = np.full(n, -1, dtype=np.int64)
    k = n_ff + n_rec
    for i in range(n):
        if kind[i] == HIDDEN:
            bias_param[i] = k
            k += 1

    ptr = np.zeros(n + 1, dtype=np.int64)
    for i, edges in enumerate(incoming):
        ptr[i + 1] = ptr[i] + len(edges)
    flat = [e for edges in incoming for e in edges]
    as_arr = lambda j: np.array([e[j] for e in flat], dtype=np.int64)

    output_pos = np.full(genome.n_outputs, -1, dtype=np.int64)
    for i in range(n):
        if kind[i] == OUTPUT:
            output_pos[feature[i]] = i

    return RnnGraph(
        n_inputs=genome.n_inputs,
        n_outputs=genome.n_outputs,
        node_ids=np.array(order, dtype=np.int64),
        kind=kind,
        feature=feature,
        bias_param=bias_param,
        in_ptr=ptr,
        in_src=as_arr(0),
        in_param=as_arr(1),
        in_skip=as_arr(2),
        output_pos=output_pos,
        n_ff=n_ff,
        n_rec=n_rec,
    )


def init_weights(graph: RnnGraph, rng: np.random.Generator, scale: float = 0.1) -> np.ndarray:
    w = np.zeros(graph.n_params)
    n_edges = graph.n_ff + graph.n_rec
    w[:n_edges] = rng.uniform(-scale, scale, size=n_edges)
    return w


@numba.njit(cache=True, nogil=True)
def _gather(w, in_param, bias_param):
    """Per-edge weights and per-node biases (0 where a node has none)."""
    ew = np.empty(in_param.shape[0])
    for e in range(in_param.shape[0]):
        ew[e] = w[in_param[e]]
    b = np.zeros(bias_param.shape[0])
    for i in range(bias_param.shape[0]):
        if bias_param[i] >= 0:
            b[i] = w[bias_param[i]]
    return ew, b


@numba.njit(cache=True, nogil=True)
def _forward(x, kind, feature, bias_param, in_ptr, in_src, in_param, in_skip, w):
    T = x.shape[0]
    n = kind.shape[0]
    ew, b = _gather(w, in_param, bias_param)
    v = np.zeros((T, n))
    for t in range(T):
        vt = v[t]
        for i in range(n):
            k = kind[i]
            if k == 0:
                vt[i] = x[t, feature[i]]
                continue
            a = b[i]
            for e in range(in_ptr[i], in_ptr[i + 1]):
                sk = in_skip[e]
                if sk == 0:
                    a += ew[e] * vt[in_src[e]]
                elif t >= sk:
                    a += ew[e] * v[t - sk, in_src[e]]
            vt[i] = math.tanh(a) if k == 1 else a
    return v


@numba.njit(cache=True, nogil=True)
def _backward(v, dv_out, kind, bias_param, in_ptr, in_src, in_param, in_skip, w):
    """Gradient of the loss w.r.t. parameters given dL/d(node value) at outputs."""
    T, n = v.shape
    ew, _ = _gather(w, in_param, bias_param)
    dv = dv_out.copy()
    ge = np.zeros(ew.shape[0])
    gb = np.zeros(n)
    for t in range(T - 1, -1, -1):
        vt = v[t]
        dvt = dv[t]
        for i in range(n - 1, -1, -1):
            k = kind[i]
            if k == 0:
                continue
            da = dvt[i]
            if k == 1:
                da *= 1.0 - vt[i] * vt[i]
            if da == 0.0:
                continue
            gb[i] += da
            for e in range(in_ptr[i], in_ptr[i + 1]):
                sk = in_skip[e]
                src = in_src[e]
                if sk == 0:
                    ge[e] += da * vt[src]
                    dvt[src] += da * ew[e]
                elif t >= sk:
                    ge[e] += da * v[t - sk, src]
                    dv[t - sk, src] += da * ew[e]
    g = np.zeros(w.shape[0])
    for e in range(ge.shape[0]):
        g[in_param[e]] += ge[e]
    for i in range(n):
        if bias_param[i] >= 0:
            g[bias_param[i]] += gb[i]
    return g


def _node_values(graph: RnnGraph, weights: np.ndarray, series: np.ndarray) -> np.ndarray:
    return _forward(
        series,
        graph.kind,
        graph.feature,
        graph.bias_param,
        graph.in_ptr,
        graph.in_src,
        graph.in_param,
        graph.in_skip,
        np.asarray(weights, dtype=float),
    )


def _check_series(graph: RnnGraph, series) -> np.ndarray:
    x = np.ascontiguousarray(series, dtype=float)
    if x.ndim != 2 or x.shape[1] != graph.n_inputs:
        raise ValueError(f"series must have shape (T, {graph.n_inputs}), got {x.shape}")
    if x.shape[0] < 1:
        raise ValueError("series must have at least one time step")
    return x


def forward(graph: RnnGraph, weights: np.ndarray, series) -> np.ndarray:
    """Predictions of shape ``(T, n_outputs)``."""
    x = _check_series(graph, series)
    if len(weights) != graph.n_params:
        raise ValueError(f"expected {graph.n_params} weights, got {len(weights)}")
    v = _node_values(graph, weights, x)
    preds = np.zeros((x.shape[0], graph.n_outputs))
    for j, p in enumerate(graph.output_pos):
        if p >= 0:
            preds[:, j] = v[:, p]
    return preds


def mse(predictions, targets) -> float:
    p = np.asarray(predictions, dtype=float)
    y = np.asarray(targets, dtype=float)
    if p.shape != y.shape:
        raise ValueError(f"shape mismatch {p.shape} vs {y.shape}")
    if p.size == 0:
        raise ValueError("mse of empty arrays")
    return float(np.mean((p - y) ** 2))


def loss_and_grad(graph: RnnGraph, weights: np.ndarray, series, targets) -> tuple[float, np.ndarray]:
    """MSE over the whole window and its exact BPTT gradient."""
    x = _check_series(graph, series)
    y = np.asarray(targets, dtype=float)
    w = np.asarray(weights, dtype=float)
    v = _node_values(graph, w, x)
    preds = np.zeros_like(y)
    dv = np.zeros_like(v)
    scale = 2.0 / y.size
    for j, p in enumerate(graph.output_pos):
        if p >= 0:
            preds[:, j] = v[:, p]
            dv[:, p] = scale * (preds[:, j] - y[:, j])
    loss = float(np.mean((preds - y) ** 2))
    g = _backward(
        v, dv, graph.kind, graph.bias_param, graph.in_ptr, graph.in_src,
        graph.in_param, graph.in_skip, w,
    )
    return loss, g


def train_bptt(
    graph: RnnGraph,
    series,
    targets,
    config: TrainConfig,
    rng: np.random.Generator,
    weights: np.ndarray | None = None,
) -> TrainResult:
    """Batch gradient descent on the head of the window, validated on its tail.

    On a non-finite loss the run is abandoned and ``validation_mse`` is
    ``inf`` so the caller can reject the candidate.
    """
    x = _check_series(graph, series)
    y = np.asarray(targets, dtype=float)
    T = x.shape[0]
    if T <= 4 or y.shape != (T, graph.n_outputs):
        raise ValueError(f"need aligned series/targets with T > 4, got {x.shape} / {y.shape}")
    n_val = max(1, int(round(config.validation_fraction * T)))
    n_train = T - n_val

    w = init_weights(graph, rng, config.weight_init_scale) if weights is None else np.array(weights, dtype=float)
    history = []
    m = np.zeros_like(w)
    s = np.zeros_like(w)
    b1, b2 = 0.9, 0.999
    for epoch in range(1, config.epochs + 1):
        loss, g = loss_and_grad(graph, w, x[:n_train], y[:n_train])
        if not (math.isfinite(loss) and np.all(np.isfinite(g))):
            return TrainResult(w, math.inf, history)
        history.append(loss)
        norm = float(np.sqrt(g @ g))
        if norm > config.gradient_clip:
            g = g * (config.gradient_clip / norm)
        if config.optimizer == "adam":
            m = b1 * m + (1 - b1) * g
            s = b2 * s + (1 - b2) * g * g
            step = (m / (1 - b1**epoch)) / (np.sqrt(s / (1 - b2**epoch)) + 1e-8)
            w = w - config.learning_rate * step
        else:
            w = w - config.learning_rate * g
        if not np.all(np.isfinite(w)):
            return TrainResult(w, math.inf, history)

    preds = forward(graph, w, x)
    val = mse(preds[n_train:], y[n_train:])
    if not math.isfinite(val):
        val = math.inf
    return TrainResult(w, val, history)


def grad_check(graph: RnnGraph, weights, series, targets, epsilon: float = 1e-5) -> float:
    """Largest relative gap between the BPTT gradient and central differences."""
    w = np.array(weights, dtype=float)
    if w.size == 0:
        return 0.0
    _, analytic = loss_and_grad(graph, w, series, targets)
    worst = 0.0
    for k in range(w.size):
        old = w[k]
        w[k] = old + epsilon
        up = mse(forward(graph, w, series), targets)
        w[k] = old - epsilon
        down = mse(forward(graph, w, series), targets)
        w[k] = old
        numeric = (up - down) / (2 * epsilon)
        a = analytic[k]
        worst = max(worst, abs(a - numeric) / max(abs(a), abs(numeric), 1e-8))
    return worst


def model_to_dict(genome: Genome, weights) -> dict:
    return {"genome": genome.to_dict(), "weights": [float(v) for v in weights]}


def model_from_dict(d: dict) -> tuple[Genome, RnnGraph, np.ndarray]:
    genome = Genome.from_dict(d["genome"])
    graph = compile_genome(genome)
    weights = np.array(d["weights"], dtype=float)
    if weights.size != graph.n_params:
        raise ValueError(f"model has {weights.size} weights, graph needs {graph.n_params}")
    return genome, graph, weights
