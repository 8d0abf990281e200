"""In-memory knowledge graph with head-indexed read interfaces.

A graph is a deduplicated set of (head, relation, tail) triples plus two
indexes: head entity -> relations, and (head, relation) -> sorted tails.
Reads go through the indexes, so lookup cost depends on the out-degree of
the queried entity, not on graph size. Graphs are immutable after
construction and safe for concurrent readers.

Traversal is forward-only (head to tail). Datasets that need to walk an
edge backwards must materialize the inverse relation in the input file.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Iterable, NamedTuple

from .errors import LoadError

EntityId = str
RelationId = str


class Triple(NamedTuple):
    """One directed, labelled edge."""

    head: EntityId
    relation: RelationId
    tail: EntityId


@dataclass(frozen=True)
class KnowledgeGraph:
    triples: frozenset[Triple]
    entities: frozenset[EntityId]
    relations: frozenset[RelationId]
    head_index: dict[EntityId, frozenset[RelationId]]
    pair_index: dict[tuple[EntityId, RelationId], tuple[EntityId, ...]]

    @classmethod
    def from_triples(cls, triples: Iterable[Triple]) -> "KnowledgeGraph":
        """Build a graph (indexes included) from triple records.

        Raises LoadError if any component is empty after trimming.
        """
        clean: set[Triple] = set()
        for t in triples:
            head, relation, tail = t.head.strip(), t.relation.strip(), t.tail.strip()
            if not head or not relation or not tail:
                raise LoadError(f"triple with empty field: {t!r}")
            clean.add(Triple(head, relation, tail))

        entities: set[EntityId] = set()
        relations: set[RelationId] = set()
        head_rels: dict[EntityId, set[RelationId]] = {}
        pair_tails: dict[tuple[EntityId, RelationId], set[EntityId]] = {}
        for head, relation, tail in clean:
            entities.add(head)
            entities.add(tail)
            relations.add(relation)
            head_rels.setdefault(head, set()).add(relation)
            pair_tails.setdefault((head, relation), set()).add(tail)

        return cls(
            triples=frozenset(clean),
            entities=frozenset(entities),
            relations=frozenset(relations),
            head_index={e: frozenset(rels) for e, rels in head_rels.items()},
            pair_index={pair: tuple(sorted(tails)) for pair, tails in pair_tails.items()},
        )

    def dump(self) -> str:
        """Serialize back to the tab-separated triple format, sorted."""
        lines = [f"{h}\t{r}\t{t}" for h, r, t in sorted(self.triples)]
        return "\n".join(lines) + ("\n" if lines else "")


def load_kg(source: IO[bytes] | IO[str]) -> KnowledgeGraph:
    """Load a graph from a stream of tab-separated triple lines.

    Format: UTF-8, one triple per line, exactly three fields separated by a
    single TAB. Blank lines and lines starting with '#' are skipped.
    Duplicate triples collapse to one.
    """
    raw = source.read()
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")

    triples: list[Triple] = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise LoadError(
                f"expected 3 tab-separated fields, got {len(fields)}", line=lineno
            )
        head, relation, tail = (f.strip() for f in fields)
        if not head or not relation or not tail:
            raise LoadError("empty field in triple", line=lineno)
        triples.append(Triple(head, relation, tail))
    return KnowledgeGraph.from_triples(triples)


def extract_neighbor_relations(kg: KnowledgeGraph, e: EntityId) -> list[RelationId]:
    """All relations leaving entity ``e``, sorted, without duplicates.

    An entity absent from the graph yields an empty list.
    """
    return sorted(kg.head_index.get(e, ()))


def extract_triples(
    kg: KnowledgeGraph, e: EntityId, rels: Iterable[RelationId]
) -> list[Triple]:
    """All triples with head ``e`` and relation in ``rels``.

    Output is ordered by (relation, tail). Only the index buckets for the
    requested relations are touched.
    """
    out: list[Triple] = []
    for r in sorted(set(rels)):
        for tail in kg.pair_index.get((e, r), ()):
            out.append(Triple(e, r, tail))
    return out
