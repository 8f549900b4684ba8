"""Random instance generators shared by the property tests."""


from soficmat.splitting import EdgePartition, _edges_at
from soficmat.symalg import SymbolicMatrix, recompose

LABELS = ("a", "b", "c")


def random_components(rng, n, labels=LABELS, max_coef=2, density=0.4):
    comps = {}
    for x in labels:
        mask = rng.random((n, n)) < density
        comps[x] = mask * rng.integers(1, max_coef + 1, size=(n, n))
    return comps


def random_matrix(rng, n=None, n_labels=None, max_coef=2, density=0.4, nondegenerate=False):
    """Random degree-1 square symbolic matrix, at least one entry nonempty."""
    n = n or int(rng.integers(1, 5))
    k = n_labels or int(rng.integers(1, 4))
    labels = LABELS[:k]
    while True:
        comps = random_components(rng, n, labels, max_coef, density)
        total = sum(comps.values())
        if not total.any():
            continue
        if nondegenerate and not (total.any(axis=0).all() and total.any(axis=1).all()):
            continue
        return recompose(comps, alphabet=labels, shape=(n, n))


def random_partition(rng, a, direction, vertex=None, max_blocks=3):
    """Random partition of the edge multiset at a vertex; None if no vertex has 2+ edges."""
    candidates = [v for v in range(a.rows) if sum(_edges_at(a, v, direction).values()) >= 2]
    if vertex is None:
        if not candidates:
            return None
        vertex = int(rng.choice(candidates))
    edges = list(_edges_at(a, vertex, direction).elements())
    if not edges:
        return None
    m = int(rng.integers(1, min(max_blocks, len(edges)) + 1))
    order = rng.permutation(len(edges))
    blocks = [[] for _ in range(m)]
    for pos, idx in enumerate(order):
        slot = pos if pos < m else int(rng.integers(0, m))
        blocks[slot].append(edges[idx])
    return EdgePartition(vertex, direction, blocks)


def relabeled(a, rng):
    labels = list(a.alphabet.labels)
    perm = [labels[i] for i in rng.permutation(len(labels))]
    return dict(zip(labels, perm))


def symbolic(rows, labels=None):
    return SymbolicMatrix(rows, labels)
