"""Hand-built and random genomes for network tests."""

import math

import numpy as np

from antnas.colony import Genome, Node
from antnas.space import Point3


def chain(n_inputs=1, z=0.3, depth=3, skip=None):
    """in -> h -> out with a self-recurrent hidden node."""
    nodes = (
        Node(0, Point3(0.5, 0.0, 0.0), 0, "input", 0),
        Node(1, Point3(0.5, 0.5, z), 1, "hidden"),
        Node(2, Point3(0.5, 1.0, 0.0), 2, "output", 0),
    )
    k = skip if skip is not None else min(max(1 + math.floor(z * depth), 1), depth)
    return Genome(nodes, ((0, 1), (1, 2)), ((1, 1, k),), n_inputs, 1, depth)


def linear(n_inputs=1):
    """Every input wired straight to a single output."""
    nodes = tuple(Node(i, Point3((i + 0.5) / n_inputs, 0.0, 0.0), 0, "input", i) for i in range(n_inputs))
    out = Node(n_inputs, Point3(0.5, 1.0, 0.0), 1, "output", 0)
    return Genome(nodes + (out,), tuple((i, n_inputs) for i in range(n_inputs)), (), n_inputs, 1, 3)


def random_genome(rng: np.random.Generator, max_hidden=5, max_inputs=3, max_outputs=2, depth=3, cross_rec=True):
    n_in = int(rng.integers(1, max_inputs + 1))
    n_out = int(rng.integers(1, max_outputs + 1))
    n_hid = int(rng.integers(0, max_hidden + 1))
    nodes = [Node(i, Point3((i + 0.5) / n_in, 0.0, 0.0), 0, "input", i) for i in range(n_in)]
    ys = np.sort(rng.uniform(0.05, 0.95, n_hid))
    hid = []
    for y in ys:
        nid = len(nodes)
        nodes.append(Node(nid, Point3(float(rng.random()), float(y), float(rng.random())), 0, "hidden"))
        hid.append(nid)
    outs = []
    for j in range(n_out):
        nid = len(nodes)
        nodes.append(Node(nid, Point3((j + 0.5) / n_out, 1.0, 0.0), 0, "output", j))
        outs.append(nid)
    y_of = {n.id: n.centroid.y for n in nodes}
    srcs = list(range(n_in)) + hid
    edges = set()
    for h in hid:
        earlier = [s for s in srcs if y_of[s] < y_of[h]]
        later = [d for d in hid + outs if y_of[d] > y_of[h]]
        edges.add((int(rng.choice(earlier)), h))
        edges.add((h, int(rng.choice(later))))
    for o in outs:
        edges.add((int(rng.choice(srcs)), o))
    for _ in range(int(rng.integers(0, 4))):
        a, b = (int(v) for v in rng.choice(srcs + outs, 2, replace=False))
        if y_of[a] < y_of[b] and b not in range(n_in):
            edges.add((a, b))
    rec = [(h, h, int(rng.integers(1, depth + 1))) for h in hid]
    if cross_rec and len(hid) >= 2:
        a, b = (int(v) for v in rng.choice(hid, 2, replace=False))
        rec.append((a, b, int(rng.integers(1, depth + 1))))
    return Genome(tuple(nodes), tuple(sorted(edges)), tuple(rec), n_in, n_out, depth)


def reference_forward(genome: Genome, weights, x):
    """Direct transcription of the node update rule; no compilation step."""
    order = sorted(genome.nodes, key=lambda n: (n.centroid.y, n.centroid.x, n.id))
    n_ff = len(genome.ff_edges)
    hidden = [n.id for n in order if n.kind == "hidden"]
    bias = {h: weights[n_ff + len(genome.rec_edges) + k] for k, h in enumerate(hidden)}
    T = x.shape[0]
    val = {}
    for t in range(T):
        for n in order:
            if n.kind == "input":
                val[t, n.id] = x[t, n.index]
                continue
            a = bias.get(n.id, 0.0)
            for p, (s, d) in enumerate(genome.ff_edges):
                if d == n.id:
                    a += weights[p] * val[t, s]
            for p, (s, d, k) in enumerate(genome.rec_edges):
                if d == n.id and t - k >= 0:
                    a += weights[n_ff + p] * val[t - k, s]
            val[t, n.id] = math.tanh(a) if n.kind == "hidden" else a
    outs = sorted((n for n in order if n.kind == "output"), key=lambda n: n.index)
    return np.array([[val[t, o.id] for o in outs] for t in range(T)])
