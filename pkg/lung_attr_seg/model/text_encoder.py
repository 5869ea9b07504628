"""
Frozen attribute encoder f_A.

Any module mapping a list of texts to ``(B, d, L)`` embeddings and holding
no trainable parameters can serve; ``LookupTextEncoder`` is the default.
Its vocabulary is the taxonomy's category words plus the clause glue of
clinical descriptions, and its table is a seeded Gaussian frozen at
construction.  A pretrained language-model adapter only needs the same
``forward(texts)`` contract.
"""

from __future__ import annotations

from typing import List, Protocol, Sequence, runtime_checkable

import torch
import torch.nn as nn

from lung_attr_seg.attributes.parser import tokenize
from lung_attr_seg.attributes.taxonomy import AttributeTaxonomy
from lung_attr_seg.errors import EmptyText

PAD, UNK = "<pad>", "<unk>"
GLUE_WORDS = (
    "pulmonary", "infection", "infections", "infected", "area", "areas",
    "left", "right", "lung", "lungs", "and", "of", "the", ",", ".",
)


@runtime_checkable
class FrozenTextEncoder(Protocol):
    embed_dim: int
    max_tokens: int

    def __call__(self, texts: Sequence[str]) -> torch.Tensor:  # pragma: no cover - protocol
        ...


def build_vocabulary(taxonomy: AttributeTaxonomy) -> List[str]:
    vocab = [PAD, UNK]
    for w in list(taxonomy.vocabulary()) + list(GLUE_WORDS):
        if w not in vocab:
            vocab.append(w)
    return vocab


class LookupTextEncoder(nn.Module):
    """Frozen token-embedding table, ``texts -> (B, d, L)``."""

    def __init__(self, vocabulary: Sequence[str], embed_dim: int = 32, max_tokens: int = 24, seed: int = 0) -> None:
        super().__init__()
        self.vocabulary = list(vocabulary)
        self.index = {w: i for i, w in enumerate(self.vocabulary)}
        self.embed_dim = embed_dim
        self.max_tokens = max_tokens
        g = torch.Generator().manual_seed(seed)
        table = torch.randn(len(self.vocabulary), embed_dim, generator=g)
        table[self.index[PAD]] = 0.0
        self.embedding = nn.Embedding.from_pretrained(table, freeze=True, padding_idx=self.index[PAD])

    def token_ids(self, texts: Sequence[str]) -> torch.Tensor:
        """Pad/truncate each text's tokens to exactly L ids."""
        pad, unk = self.index[PAD], self.index[UNK]
        rows = []
        for text in texts:
            tokens = tokenize(text)
            if not tokens:
                raise EmptyText(f"no tokens in text {text!r}")
            ids = [self.index.get(t, unk) for t in tokens[: self.max_tokens]]
            rows.append(ids + [pad] * (self.max_tokens - len(ids)))
        return torch.tensor(rows, dtype=torch.long)

    def forward(self, texts: Sequence[str]) -> torch.Tensor:
        ids = self.token_ids(texts).to(self.embedding.weight.device)
        return self.embedding(ids).transpose(1, 2).contiguous()
