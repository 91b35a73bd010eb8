from .aggregate import embed_doc_avg, embed_doc_fasttext, embed_doc_sum
from .glove import CooccurrenceCounts, GloveConfig, build_cooccurrence, train_glove
from .table import EmbeddingTable, FastTextTable, SubwordConfig, char_ngrams, fnv1a_32
from .vectorize import (
    ALL_KINDS,
    EmbeddingVectorizer,
    SparseVectorizer,
    VectorizationKind,
    allowed_params,
    make_vectorizer,
    parse_kind,
    vectorize,
)
from .word2vec import CBOW, SKIPGRAM, EmbeddingConfig, train_fasttext, train_word2vec
