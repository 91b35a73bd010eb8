"""Word-vector to document-vector rules."""

from __future__ import annotations

import numpy as np

from .table import EmbeddingTable

ZERO_NORM_EPS = 1e-12


def _tokens(doc):
    return doc.tokens if hasattr(doc, "tokens") else doc


def _vectors(doc, table: EmbeddingTable) -> list[np.ndarray]:
    # Plain tables return None for unknown words; FastText tables never do.
    out = []
    for w in _tokens(doc):
        v = table.lookup(w)
        if v is not None:
            out.append(v)
    return out


def embed_doc_sum(doc, table: EmbeddingTable) -> np.ndarray:
    vs = _vectors(doc, table)
    return np.sum(vs, axis=0) if vs else np.zeros(table.dim)


def embed_doc_avg(doc, table: EmbeddingTable) -> np.ndarray:
    vs = _vectors(doc, table)
    return np.sum(vs, axis=0) / len(vs) if vs else np.zeros(table.dim)


def embed_doc_fasttext(doc, table: EmbeddingTable, eps: float = ZERO_NORM_EPS) -> np.ndarray:
    """Mean of L2-normalized word vectors, skipping vectors with norm <= eps."""
    units = []
    for v in _vectors(doc, table):
        nrm = np.linalg.norm(v)
        if nrm > eps:
            units.append(v / nrm)
    return np.mean(units, axis=0) if units else np.zeros(table.dim)


RULES = {"sum": embed_doc_sum, "avg": embed_doc_avg, "l2avg": embed_doc_fasttext}
