"""Helpers shared by the code-level passes: label bookkeeping and save regions."""

from collections import Counter
from typing import Dict, Iterable, List, Optional, Set

from src.compiler.checks import stack_depths
from src.compiler.instructions import CodeBlock, Label, NO_FALLTHROUGH, Op, Row, from_rows, to_rows


class Rewriter:
    """
    Mutable view of a CodeBlock for one pass.

    Passes edit `rows` in place and call `rebuild()` to get the new block;
    production entry labels are never pruned.
    """

    def __init__(self, code: CodeBlock):
        self.rows: List[Row] = to_rows(code)
        self.entries = dict(code.entries)
        self.start = code.start
        self._entry_labels = set(self.entries.values())

    def rebuild(self) -> CodeBlock:
        self.prune_labels()
        return from_rows(self.rows, self.entries, self.start)

    def block(self) -> CodeBlock:
        return from_rows(self.rows, self.entries, self.start)

    def is_entry(self, label: Label) -> bool:
        return label in self._entry_labels

    def references(self) -> Counter:
        """Label -> number of jump and iffail instructions targeting it."""
        counts: Counter = Counter()
        for row in self.rows:
            if isinstance(row.arg, Label):
                counts[row.arg] += 1
        return counts

    def reference_sites(self) -> Dict[Label, List[int]]:
        sites: Dict[Label, List[int]] = {}
        for index, row in enumerate(self.rows):
            if isinstance(row.arg, Label):
                sites.setdefault(row.arg, []).append(index)
        return sites

    def label_index(self) -> Dict[Label, int]:
        return {label: index for index, row in enumerate(self.rows) for label in row.labels}

    def prune_labels(self):
        refs = self.references()
        for row in self.rows:
            row.labels = [l for l in row.labels if refs[l] or self.is_entry(l)]

    def delete(self, index: int):
        """Remove a row, moving its labels onto the following row."""
        row = self.rows.pop(index)
        if row.labels:
            self.rows[index].labels[:0] = row.labels

    def replace(self, start: int, end: int, new_rows: List[Row]):
        """Replace rows[start:end]; labels of rows[start] move to the first new row."""
        labels = self.rows[start].labels
        if new_rows:
            new_rows[0].labels = labels + new_rows[0].labels
        elif labels:
            self.rows[end].labels[:0] = labels
        self.rows[start:end] = new_rows


def falls_through(row: Row) -> bool:
    return row.op not in NO_FALLTHROUGH


def save_region(rw: Rewriter, push_index: int, depths: Dict[int, int],
                index_of: Dict[Label, int]) -> Optional[Set[int]]:
    """
    Rows executed while the slot saved by rows[push_index] is on the stack,
    including the pops that discard it.

    Returns None when the slot can be reached or discarded from outside the
    region (an interior label referenced from elsewhere, a fall-through into
    the region, or an unreachable row).
    """
    if push_index not in depths:
        return None
    level = depths[push_index] + 1
    region: Set[int] = set()
    work = [push_index + 1]
    rows = rw.rows
    while work:
        index = work.pop()
        if index in region:
            continue
        if index >= len(rows) or index not in depths or depths[index] < level:
            return None
        region.add(index)
        row = rows[index]
        if depths[index] == level and row.op in (Op.POP, Op.PEEKPOP):
            continue
        if row.op is Op.JUMP:
            work.append(index_of[row.arg])
        elif row.op is Op.IFFAIL:
            work.extend((index + 1, index_of[row.arg]))
        elif row.op not in (Op.RET, Op.EXIT):
            work.append(index + 1)

    sites = rw.reference_sites()
    for index in region:
        if index != push_index + 1 and index - 1 not in region and falls_through(rows[index - 1]):
            return None
        for label in rows[index].labels:
            if rw.is_entry(label):
                return None
            if any(site not in region for site in sites.get(label, ())):
                return None
    return region


def region_pops(rw: Rewriter, region: Iterable[int], level: int, depths: Dict[int, int]) -> List[int]:
    """Rows of the region that discard the slot at the given level."""
    return sorted(i for i in region
                  if depths[i] == level and rw.rows[i].op in (Op.POP, Op.PEEKPOP))


def region_calls(rw: Rewriter, region: Iterable[int]) -> bool:
    return any(rw.rows[i].op is Op.CALL for i in region)


def depth_map(rw: Rewriter) -> Dict[int, int]:
    return stack_depths(rw.block())
