import socket

import pytest

from qudeval.corpus import (
    AnnotationRecord,
    Corpus,
    CriteriaLabels,
    Document,
    QudEdge,
    SentenceRecord,
)


def make_document(doc_id: str, sentences: list[str], split_tag: str = "unassigned") -> Document:
    return Document(
        doc_id,
        tuple(SentenceRecord(i, text) for i, text in enumerate(sentences, start=1)),
        split_tag,
    )


def make_corpus(documents, edges, annotations=(), similarity=()) -> Corpus:
    corpus = Corpus()
    for doc in documents:
        corpus.documents[doc.doc_id] = doc
    for edge in edges:
        corpus.edges[edge.edge_id] = edge
    corpus.annotations = list(annotations)
    corpus.similarity = list(similarity)
    return corpus


def gold(edge_id: str, lang="pass", comp="direct", givn="no_new", relv="fully") -> AnnotationRecord:
    return AnnotationRecord(edge_id, "gold", CriteriaLabels(lang, comp, givn, relv))


@pytest.fixture
def no_network(monkeypatch):
    """Any attempt to open a socket fails the test."""

    def guard(*args, **kwargs):
        raise AssertionError("network access attempted during a replay-mode test")

    monkeypatch.setattr(socket, "socket", guard)
    monkeypatch.setattr(socket, "create_connection", guard)
    return guard
