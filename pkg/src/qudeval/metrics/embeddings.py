"""Token embedding providers for the embedding-F1 and QSTS metrics.

A provider maps a token sequence to fixed-dimension vectors and must be
deterministic for a given name/version. The default provider derives unit
vectors from a hash of each token: it carries no semantics, but it is
reproducible everywhere, which is what the property tests need. Real
encoders can be plugged in behind the same interface.
"""

from __future__ import annotations

import hashlib
import math
import struct
from typing import Protocol, Sequence


class ProviderUnavailable(RuntimeError):
    pass


class EmbeddingProvider(Protocol):
    name: str

    def embed(self, tokens: Sequence[str]) -> list[list[float]]: ...


class HashEmbeddingProvider:
    """Deterministic pseudo-embeddings: same token, same vector, any machine."""

    def __init__(self, dim: int = 32, version: str = "v1"):
        self.dim = dim
        self.name = f"hash-{version}-d{dim}"

    def _vector(self, token: str) -> list[float]:
        values: list[float] = []
        counter = 0
        while len(values) < self.dim:
            digest = hashlib.sha256(f"{self.name}:{token}:{counter}".encode("utf-8")).digest()
            for i in range(0, len(digest) - 7, 8):
                (raw,) = struct.unpack(">q", digest[i : i + 8])
                values.append(raw / 2**63)
                if len(values) == self.dim:
                    break
            counter += 1
        norm = math.sqrt(sum(v * v for v in values)) or 1.0
        return [v / norm for v in values]

    def embed(self, tokens: Sequence[str]) -> list[list[float]]:
        return [self._vector(t) for t in tokens]


class StaticEmbeddingProvider:
    """Fixed token->vector table; used in tests with hand-chosen cosines."""

    def __init__(self, table: dict[str, Sequence[float]], name: str = "static"):
        self.table = {k: list(v) for k, v in table.items()}
        self.name = name

    def embed(self, tokens: Sequence[str]) -> list[list[float]]:
        try:
            return [list(self.table[t]) for t in tokens]
        except KeyError as exc:
            raise ProviderUnavailable(f"no vector for token {exc.args[0]!r}") from exc


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    num = sum(x * y for x, y in zip(a, b))
    da = math.sqrt(sum(x * x for x in a))
    db = math.sqrt(sum(y * y for y in b))
    if da == 0.0 or db == 0.0:
        return 0.0
    return num / (da * db)
