"""Backtracking over r-colourings (plus an optional "out" label) of m positions.

Constraints are given per colour as bitmasks over positions: colour c may not
contain every position of any of its masks. Placing a colour propagates: a mask
with one position left loses colour c from that position's domain, and a
position with an empty domain is forced out (or the branch dies when out is not
allowed). Identical colours are symmetry-broken by opening them in order.
"""

from __future__ import annotations

from typing import Sequence

from .budget import Budget

OUT = -2
FREE = -1


class ColouringEngine:
    def __init__(self, m: int, masks: Sequence[Sequence[int]], same_as_previous: Sequence[int],
                 allow_out: bool, budget: Budget):
        self.m = m
        self.r = len(masks)
        self.allow_out = allow_out
        self.budget = budget
        self.prev_same = list(same_as_previous)
        self.full_dom = (1 << self.r) - 1
        self.by_pos: list[list[list[int]]] = []
        self.banned = [0] * m  # colours excluded outright by single-position masks
        for c, fam in enumerate(masks):
            lists: list[list[int]] = [[] for _ in range(m)]
            for mask in set(fam):
                if mask & (mask - 1) == 0:
                    self.banned[mask.bit_length() - 1] |= 1 << c
                    continue
                rest = mask
                while rest:
                    low = rest & -rest
                    lists[low.bit_length() - 1].append(mask)
                    rest ^= low
            self.by_pos.append(lists)

    # hooks -------------------------------------------------------------

    def memo_hit(self, assign, pos: int, level: int) -> tuple[bool, int]:
        """Subclasses may reject states isomorphic to explored ones."""
        return False, level

    # core --------------------------------------------------------------

    def place(self, assign, dom, cmask, e, c) -> bool:
        queue = [(e, c)]
        while queue:
            e, c = queue.pop()
            if assign[e] != FREE:
                if assign[e] != c:
                    return False
                continue
            if c == OUT:
                assign[e] = OUT
                continue
            if not dom[e] >> c & 1:
                return False
            assign[e] = c
            cm = cmask[c] | (1 << e)
            cmask[c] = cm
            for mask in self.by_pos[c][e]:
                rest = mask & ~cm
                if rest == 0:
                    return False
                if rest & (rest - 1) == 0:
                    f = rest.bit_length() - 1
                    if assign[f] == FREE and dom[f] >> c & 1:
                        d = dom[f] & ~(1 << c)
                        dom[f] = d
                        if d == 0:
                            if not self.allow_out:
                                return False
                            queue.append((f, OUT))
                        elif not self.allow_out and d & (d - 1) == 0:
                            queue.append((f, d.bit_length() - 1))
        return True

    def initial(self, fixed_out: int = 0):
        """Start state, or None when the single-position bans already make it infeasible."""
        assign = [FREE] * self.m
        dom = [self.full_dom & ~b for b in self.banned]
        cmask = [0] * self.r
        for e in range(self.m):
            if fixed_out >> e & 1 or dom[e] == 0:
                if dom[e] == 0 and not fixed_out >> e & 1 and not self.allow_out:
                    return None
                assign[e] = OUT
        if not self.allow_out:
            for e in range(self.m):
                d = dom[e]
                if assign[e] == FREE and d & (d - 1) == 0:
                    if not self.place(assign, dom, cmask, e, d.bit_length() - 1):
                        return None
        return assign, dom, cmask

    def branch_colours(self, dom_e: int, used: int) -> list[int]:
        out = []
        for c in range(self.r):
            if dom_e >> c & 1:
                p = self.prev_same[c]
                if p >= 0 and not used >> p & 1:
                    continue
                out.append(c)
        return out

    def find_free(self, fixed_out: int = 0):
        """A total assignment with no forbidden monochromatic mask, or None."""
        start = self.initial(fixed_out)
        if start is None:
            return None

        def go(assign, dom, cmask, used, pos, level):
            self.budget.tick()
            while pos < self.m and assign[pos] != FREE:
                pos += 1
            if pos == self.m:
                return list(assign)
            hit, level = self.memo_hit(assign, pos, level)
            if hit:
                return None
            for c in self.branch_colours(dom[pos], used):
                a2, d2, c2 = list(assign), list(dom), list(cmask)
                if self.place(a2, d2, c2, pos, c):
                    res = go(a2, d2, c2, used | (1 << c), pos + 1, level)
                    if res is not None:
                        return res
            return None

        assign, dom, cmask = start
        used = 0
        for c in range(self.r):
            if cmask[c]:
                used |= 1 << c
        return go(assign, dom, cmask, used, 0, 0)

    def max_coloured(self, incumbent: int = -1, incumbent_assign=None):
        """Maximise the number of coloured positions; returns (value, assignment).

        Only assignments strictly better than ``incumbent`` are searched for; the
        incumbent is returned unchanged when none exists.
        """
        best = [incumbent, incumbent_assign]
        m = self.m

        def go(assign, dom, cmask, used, pos, coloured, level):
            self.budget.tick()
            while pos < m and assign[pos] != FREE:
                pos += 1
            extra = 0
            for i in range(pos, m):
                if assign[i] == FREE and dom[i]:
                    extra += 1
            if coloured + extra <= best[0]:
                return
            if pos == m:
                best[0], best[1] = coloured, list(assign)
                return
            hit, level = self.memo_hit(assign, pos, level)
            if hit:
                return
            for c in self.branch_colours(dom[pos], used):
                a2, d2, c2 = list(assign), list(dom), list(cmask)
                if self.place(a2, d2, c2, pos, c):
                    go(a2, d2, c2, used | (1 << c), pos + 1, coloured + 1, level)
            a2 = list(assign)
            a2[pos] = OUT
            go(a2, dom, cmask, used, pos + 1, coloured, level)

        start = self.initial()
        if start is not None:
            assign, dom, cmask = start
            go(assign, dom, cmask, 0, 0, 0, 0)
        return best[0], best[1]

    def greedy(self):
        """Lowest admissible colour for each position in order, else out."""
        start = self.initial()
        if start is None:
            return 0, [OUT] * self.m
        assign, dom, cmask = start
        for e in range(self.m):
            if assign[e] != FREE:
                continue
            placed = False
            for c in range(self.r):
                if not dom[e] >> c & 1:
                    continue
                a2, d2, c2 = list(assign), list(dom), list(cmask)
                if self.place(a2, d2, c2, e, c):
                    assign, dom, cmask = a2, d2, c2
                    placed = True
                    break
            if not placed:
                assign[e] = OUT
        return sum(1 for x in assign if x >= 0), assign
