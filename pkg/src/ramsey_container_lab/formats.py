"""Text formats for hypergraphs and matrices.

Hypergraph: first line "k n", then one edge per line as k vertex ids in [n].
Matrix: first line "l k", then l rows of k integers. In both, '#' starts a
comment and blank lines are ignored.
"""

from __future__ import annotations

import os
from pathlib import Path

from .hypergraph import KHypergraph
from .rado import LinearSystem


class FormatError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}".strip())
        self.line = line


def _read(src) -> tuple[str, str | None]:
    if isinstance(src, (str, os.PathLike)) and not (isinstance(src, str) and "\n" in src) and Path(src).exists():
        return Path(src).read_text(), str(src)
    if isinstance(src, str):
        return src, None
    raise FileNotFoundError(str(src))


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield no, body.split()


def _ints(tokens, no, source) -> list[int]:
    out = []
    for t in tokens:
        try:
            out.append(int(t))
        except ValueError:
            raise FormatError(f"not an integer: {t!r}", no, source) from None
    return out


def parse_hypergraph(src) -> KHypergraph:
    """Parse from a path or from the text itself."""
    text, source = _read(src)
    it = _lines(text)
    try:
        no, head = next(it)
    except StopIteration:
        raise FormatError("empty input: expected header 'k n'", None, source) from None
    if len(head) != 2:
        raise FormatError("header must be 'k n'", no, source)
    k, n = _ints(head, no, source)
    if k < 1 or n < 0:
        raise FormatError("need k >= 1 and n >= 0", no, source)
    edges = []
    seen = set()
    for no, toks in it:
        vs = _ints(toks, no, source)
        if len(vs) != k:
            raise FormatError(f"edge has {len(vs)} vertices, expected k={k}", no, source)
        if len(set(vs)) != k:
            raise FormatError(f"repeated vertex in edge {vs}", no, source)
        if any(not 1 <= v <= n for v in vs):
            raise FormatError(f"vertex out of range [1, {n}] in edge {vs}", no, source)
        key = tuple(sorted(vs))
        if key in seen:
            raise FormatError(f"duplicate edge {key}", no, source)
        seen.add(key)
        edges.append(key)
    return KHypergraph(k, n, tuple(edges))


def write_hypergraph(H: KHypergraph) -> str:
    lines = [f"{H.k} {H.n}"] + [" ".join(map(str, e)) for e in H.edges]
    return "\n".join(lines) + "\n"


def parse_matrix(src) -> LinearSystem:
    text, source = _read(src)
    rows_in = list(_lines(text))
    if not rows_in:
        raise FormatError("empty input: expected header 'l k'", None, source)
    no, head = rows_in[0]
    if len(head) != 2:
        raise FormatError("header must be 'l k'", no, source)
    l, k = _ints(head, no, source)
    if l < 1 or k < 1:
        raise FormatError("need l >= 1 and k >= 1", no, source)
    rows = []
    for no, toks in rows_in[1:]:
        vals = _ints(toks, no, source)
        if len(vals) != k:
            raise FormatError(f"row has {len(vals)} entries, expected k={k}", no, source)
        rows.append(tuple(vals))
    if len(rows) != l:
        raise FormatError(f"expected {l} rows, found {len(rows)}", None, source)
    return LinearSystem(tuple(rows))


def write_matrix(A: LinearSystem) -> str:
    return A.to_text()
