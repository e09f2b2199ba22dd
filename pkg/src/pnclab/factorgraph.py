"""Sum-product (belief propagation) over finite-alphabet factor graphs.

Exact on trees via a two-pass leaf-to-root schedule; iterative flooding with
optional damping on loopy graphs.  Unary factors are folded into per-variable
local evidence once, since their messages never change; multi-variable
factors are grouped by alphabet signature so each flooding update is a small
number of batched einsum calls rather than a Python loop over factors.

Messages are kept in the linear domain and renormalised after every update.
A graph instance is immutable once built; every :func:`sum_product` call owns
its private message storage, so independent decodes may run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FactorGraphError(Exception):
    """Base class for factor graph construction and inference errors."""


class GraphStructureError(FactorGraphError):
    """Raised when an operation requires a structure the graph lacks."""


class InconsistentEvidenceError(FactorGraphError):
    """All-zero belief: the factors assign zero mass to every state."""

    def __init__(self, variable: str):
        self.variable = variable
        super().__init__(f"all-zero belief at variable {variable!r}")


@dataclass(frozen=True)
class SumProductResult:
    marginals: dict
    converged: bool
    iterations: int

    def __getitem__(self, name: str) -> np.ndarray:
        return self.marginals[name]


class FactorGraph:
    """Finite-alphabet variables plus nonnegative factor tables."""

    def __init__(self):
        self._var_index: dict[str, int] = {}
        self._cards: list[int] = []
        self._factor_names: set[str] = set()
        # (name, tuple of var indices, table)
        self._factors: list[tuple[str, tuple[int, ...], np.ndarray]] = []

    # -- construction -----------------------------------------------------

    def add_variable(self, name: str, cardinality: int) -> None:
        if name in self._var_index:
            raise FactorGraphError(f"duplicate variable {name!r}")
        if cardinality < 1:
            raise FactorGraphError(f"cardinality must be >= 1, got {cardinality}")
        self._var_index[name] = len(self._cards)
        self._cards.append(int(cardinality))

    def add_factor(self, name: str, variables, table) -> None:
        if name in self._factor_names:
            raise FactorGraphError(f"duplicate factor {name!r}")
        idx = []
        for v in variables:
            if v not in self._var_index:
                raise FactorGraphError(f"factor {name!r} references unknown variable {v!r}")
            idx.append(self._var_index[v])
        if len(set(idx)) != len(idx):
            raise FactorGraphError(f"factor {name!r} repeats a neighbor variable")
        tab = np.asarray(table, dtype=float)
        expected = tuple(self._cards[i] for i in idx)
        if tab.shape != expected:
            raise FactorGraphError(
                f"factor {name!r} table shape {tab.shape} does not match "
                f"neighbor cardinalities {expected}"
            )
        if (tab < 0).any():
            raise FactorGraphError(f"factor {name!r} table has negative entries")
        if not (tab > 0).any():
            raise FactorGraphError(f"factor {name!r} table has no positive entry")
        self._factor_names.add(name)
        self._factors.append((name, tuple(idx), tab))

    # -- introspection ----------------------------------------------------

    @property
    def n_variables(self) -> int:
        return len(self._cards)

    @property
    def n_factors(self) -> int:
        return len(self._factors)

    def variables(self) -> list[str]:
        return list(self._var_index)

    def cardinality(self, name: str) -> int:
        return self._cards[self._var_index[name]]

    def is_tree(self) -> bool:
        """True when the bipartite variable-factor graph is acyclic."""
        parent = list(range(len(self._cards) + len(self._factors)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for f_i, (_, neigh, _) in enumerate(self._factors):
            f_node = len(self._cards) + f_i
            for v in neigh:
                rv, rf = find(v), find(f_node)
                if rv == rf:
                    return False
                parent[rv] = rf
        return True


def sum_product(graph: FactorGraph, mode: str = "tree", *, max_iter: int = 50,
                tol: float = 1e-6, damping: float = 0.0) -> SumProductResult:
    """Run belief propagation and return per-variable marginals.

    ``mode="tree"`` requires an acyclic graph and returns exact marginals in
    one sweep.  ``mode="loopy"`` floods messages (initialised uniform) until
    the largest per-message L1 change drops below ``tol`` or ``max_iter`` is
    reached; unconverged results are still returned, flagged.
    """
    if mode not in ("tree", "loopy"):
        raise ValueError(f"unknown mode {mode!r}")
    if not (0.0 <= damping < 1.0):
        raise ValueError(f"damping must lie in [0, 1), got {damping}")
    state = _State(graph)
    if mode == "tree":
        if not graph.is_tree():
            raise GraphStructureError("tree mode requires an acyclic factor graph")
        return state.run_tree()
    return state.run_loopy(max_iter=max_iter, tol=tol, damping=damping)


class _State:
    """Private per-call storage shared by the tree and loopy schedules."""

    def __init__(self, graph: FactorGraph):
        self.g = graph
        self.cards = np.asarray(graph._cards)
        self.names = list(graph._var_index)
        # Unary factors never change their message: fold them into a single
        # local-evidence vector per variable.
        self.local = [np.ones(c) for c in self.cards]
        self.multi = []
        for name, neigh, tab in graph._factors:
            if len(neigh) == 1:
                self.local[neigh[0]] = self.local[neigh[0]] * tab
            else:
                self.multi.append((name, neigh, tab))
        for v, vec in enumerate(self.local):
            s = vec.sum()
            if s <= 0.0:
                raise InconsistentEvidenceError(self.names[v])
            self.local[v] = vec / s

    # -- exact tree pass --------------------------------------------------

    def run_tree(self) -> SumProductResult:
        nbrs_of_var: list[list[int]] = [[] for _ in self.cards]
        for f_i, (_, neigh, _) in enumerate(self.multi):
            for v in neigh:
                nbrs_of_var[v].append(f_i)

        # f2v[f_i][pos] and v2f[f_i][pos] for factor f_i's pos-th neighbor.
        f2v = [[None] * len(neigh) for _, neigh, _ in self.multi]
        v2f = [[None] * len(neigh) for _, neigh, _ in self.multi]

        # Directed edges become ready when the sender has heard from all of
        # its other neighbors; seed with leaves and propagate.
        queue = []
        for v, nbrs in enumerate(nbrs_of_var):
            if len(nbrs) == 1:
                queue.append(("v", v, nbrs[0]))
        for f_i, (_, neigh, _) in enumerate(self.multi):
            if len(neigh) == 1:
                queue.append(("f", f_i, 0))
        done = set()
        qi = 0
        while qi < len(queue):
            kind, a, b = queue[qi]
            qi += 1
            if (kind, a, b) in done:
                continue
            done.add((kind, a, b))
            if kind == "v":
                f_i = b
                pos = self.multi[f_i][1].index(a)
                self._tree_v2f(v2f, f2v, nbrs_of_var, a, f_i, pos)
                self._tree_enqueue_factor(queue, done, v2f, f_i)
            else:
                f_i, pos = a, b
                v = self.multi[f_i][1][pos]
                self._tree_f2v(v2f, f2v, f_i, pos)
                self._tree_enqueue_var(queue, done, nbrs_of_var, f2v, v)
        return SumProductResult(self._tree_marginals(f2v, nbrs_of_var), True, 1)

    def _tree_enqueue_factor(self, queue, done, v2f, f_i):
        _, neigh, _ = self.multi[f_i]
        for pos in range(len(neigh)):
            if ("f", f_i, pos) in done:
                continue
            if all(v2f[f_i][q] is not None for q in range(len(neigh)) if q != pos):
                queue.append(("f", f_i, pos))

    def _tree_enqueue_var(self, queue, done, nbrs_of_var, f2v, v):
        for f_j in nbrs_of_var[v]:
            if ("v", v, f_j) in done:
                continue
            ready = all(
                f2v[g][self.multi[g][1].index(v)] is not None
                for g in nbrs_of_var[v]
                if g != f_j
            )
            if ready:
                queue.append(("v", v, f_j))

    def _tree_v2f(self, v2f, f2v, nbrs_of_var, v, f_i, pos):
        msg = self.local[v].copy()
        for g in nbrs_of_var[v]:
            if g != f_i:
                msg = msg * f2v[g][self.multi[g][1].index(v)]
        s = msg.sum()
        if s <= 0.0:
            raise InconsistentEvidenceError(self.names[v])
        v2f[f_i][pos] = msg / s

    def _tree_f2v(self, v2f, f2v, f_i, pos):
        _, neigh, tab = self.multi[f_i]
        if len(neigh) == 2:
            other = 1 - pos
            m = v2f[f_i][other]
            out = tab.T @ m if pos == 1 else tab @ m
        else:
            letters = "abcdefghijklmnop"[: len(neigh)]
            operands = [tab]
            sub = [letters]
            for q in range(len(neigh)):
                if q != pos:
                    operands.append(v2f[f_i][q])
                    sub.append(letters[q])
            out = np.einsum(",".join(sub) + "->" + letters[pos], *operands)
        s = out.sum()
        if s <= 0.0:
            raise InconsistentEvidenceError(self.names[self.multi[f_i][1][pos]])
        f2v[f_i][pos] = out / s

    def _tree_marginals(self, f2v, nbrs_of_var) -> dict:
        marginals = {}
        for name, v in self.g._var_index.items():
            belief = self.local[v].copy()
            for g in nbrs_of_var[v]:
                belief = belief * f2v[g][self.multi[g][1].index(v)]
            s = belief.sum()
            if s <= 0.0:
                raise InconsistentEvidenceError(name)
            marginals[name] = belief / s
        return marginals

    # -- loopy flooding ---------------------------------------------------

    def run_loopy(self, *, max_iter: int, tol: float, damping: float) -> SumProductResult:
        groups = self._build_groups()
        blocks = self._build_blocks(groups)
        converged = False
        iterations = 0
        for iterations in range(1, max_iter + 1):
            delta_v = self._update_v2f(groups, blocks)
            delta_f = self._update_f2v(groups, damping)
            if max(delta_v, delta_f) < tol:
                converged = True
                break
        marginals = self._loopy_marginals(groups, blocks)
        return SumProductResult(marginals, converged, iterations)

    def _build_groups(self):
        """Group multi-variable factors by alphabet signature for batching."""
        by_sig: dict[tuple, list[int]] = {}
        for f_i, (_, neigh, _) in enumerate(self.multi):
            sig = tuple(self.cards[v] for v in neigh)
            by_sig.setdefault(sig, []).append(f_i)
        groups = []
        for sig, members in by_sig.items():
            tabs = [self.multi[f_i][2] for f_i in members]
            if all(t is tabs[0] for t in tabs):
                tables = np.broadcast_to(tabs[0], (len(members),) + sig)
            else:
                tables = np.stack(tabs)
            var_idx = np.array(
                [[self.multi[f_i][1][p] for p in range(len(sig))] for f_i in members]
            )
            f2v = [np.full((len(members), sig[p]), 1.0 / sig[p]) for p in range(len(sig))]
            v2f = [np.full((len(members), sig[p]), 1.0 / sig[p]) for p in range(len(sig))]
            groups.append(
                {"sig": sig, "members": members, "tables": tables,
                 "var_idx": var_idx, "f2v": f2v, "v2f": v2f}
            )
        return groups

    def _build_blocks(self, groups):
        """Per-cardinality variable blocks with fixed message slots."""
        degree = np.zeros(len(self.cards), dtype=int)
        for grp in groups:
            for p in range(len(grp["sig"])):
                np.add.at(degree, grp["var_idx"][:, p], 1)

        by_card: dict[int, list[int]] = {}
        for v, c in enumerate(self.cards):
            by_card.setdefault(int(c), []).append(v)

        blocks = {}
        for c, vs in by_card.items():
            vs = np.asarray(vs)
            pos_in_block = {int(v): i for i, v in enumerate(vs)}
            maxdeg = int(degree[vs].max()) if len(vs) else 0
            blocks[c] = {
                "vars": vs,
                "pos": pos_in_block,
                "maxdeg": maxdeg,
                "local": np.stack([self.local[v] for v in vs]),
            }
        # Assign each (group, position) edge a slot within its target block.
        # A variable can appear several times in one position array (one per
        # factor), so slots are handed out edge by edge.
        slot_counter = np.zeros(len(self.cards), dtype=int)
        for grp in groups:
            grp["block_row"] = []
            grp["block_slot"] = []
            for p in range(len(grp["sig"])):
                tgt = grp["var_idx"][:, p]
                pos_map = blocks[grp["sig"][p]]["pos"]
                rows = np.fromiter((pos_map[int(v)] for v in tgt), dtype=int,
                                   count=len(tgt))
                slots = np.empty(len(tgt), dtype=int)
                for r, v in enumerate(tgt):
                    slots[r] = slot_counter[v]
                    slot_counter[v] += 1
                grp["block_row"].append(rows)
                grp["block_slot"].append(slots)
        return blocks

    def _gather_products(self, groups, blocks):
        """Scatter f2v messages into slot arrays and form exclusive products."""
        prods = {}
        for c, blk in blocks.items():
            nv, maxdeg = len(blk["vars"]), blk["maxdeg"]
            p_arr = np.ones((nv, maxdeg, c))
            prods[c] = p_arr
        for grp in groups:
            for p in range(len(grp["sig"])):
                c = grp["sig"][p]
                prods[c][grp["block_row"][p], grp["block_slot"][p], :] = grp["f2v"][p]
        out = {}
        for c, blk in blocks.items():
            p_arr = prods[c]
            nv, maxdeg = p_arr.shape[0], p_arr.shape[1]
            fwd = np.ones((nv, maxdeg + 1, c))
            np.cumprod(p_arr, axis=1, out=fwd[:, 1:, :])
            bwd = np.ones((nv, maxdeg + 1, c))
            np.cumprod(p_arr[:, ::-1, :], axis=1, out=bwd[:, 1:, :])
            bwd = bwd[:, ::-1, :]
            # exclusive[:, j] = prod of all slots except j, times local evidence
            excl = fwd[:, :-1, :] * bwd[:, 1:, :] * blk["local"][:, None, :]
            belief = fwd[:, -1, :] * blk["local"]
            out[c] = (excl, belief)
        return out

    def _update_v2f(self, groups, blocks) -> float:
        prods = self._gather_products(groups, blocks)
        delta = 0.0
        for grp in groups:
            for p in range(len(grp["sig"])):
                c = grp["sig"][p]
                excl, _ = prods[c]
                msg = excl[grp["block_row"][p], grp["block_slot"][p], :]
                sums = msg.sum(axis=1, keepdims=True)
                bad = np.flatnonzero(sums[:, 0] <= 0.0)
                if len(bad):
                    v = int(grp["var_idx"][bad[0], p])
                    raise InconsistentEvidenceError(self.names[v])
                msg = msg / sums
                delta = max(delta, float(np.abs(msg - grp["v2f"][p]).sum(axis=1).max()))
                grp["v2f"][p] = msg
        return delta

    def _update_f2v(self, groups, damping: float) -> float:
        delta = 0.0
        letters = "abcdefghijklmnop"
        for grp in groups:
            arity = len(grp["sig"])
            sub_t = "z" + letters[:arity]
            for p in range(arity):
                operands = [grp["tables"]]
                subs = [sub_t]
                for q in range(arity):
                    if q != p:
                        operands.append(grp["v2f"][q])
                        subs.append("z" + letters[q])
                new = np.einsum(",".join(subs) + "->z" + letters[p], *operands)
                sums = new.sum(axis=1, keepdims=True)
                bad = np.flatnonzero(sums[:, 0] <= 0.0)
                if len(bad):
                    v = int(grp["var_idx"][bad[0], p])
                    raise InconsistentEvidenceError(self.names[v])
                new = new / sums
                if damping > 0.0:
                    new = (1.0 - damping) * new + damping * grp["f2v"][p]
                delta = max(delta, float(np.abs(new - grp["f2v"][p]).sum(axis=1).max()))
                grp["f2v"][p] = new
        return delta

    def _loopy_marginals(self, groups, blocks) -> dict:
        prods = self._gather_products(groups, blocks)
        marginals = {}
        for c, blk in blocks.items():
            _, belief = prods[c]
            sums = belief.sum(axis=1)
            for i, v in enumerate(blk["vars"]):
                if sums[i] <= 0.0:
                    raise InconsistentEvidenceError(self.names[v])
                marginals[self.names[v]] = belief[i] / sums[i]
        return marginals
