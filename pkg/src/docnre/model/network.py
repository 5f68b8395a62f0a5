"""The multiscale relation classifier.

Each discourse unit is encoded independently by a BiLSTM over word vectors
concatenated with a sinusoidal encoding of the unit's index in the document.
A mention tuple is represented by concatenating its mentions' hidden states
and applying a per-subset linear layer with tanh. Per entity subset, tuple
representations are pooled elementwise (logsumexp or max); a subset that
never co-occurs in one unit contributes a learned fallback vector instead.
The concatenated subset vectors feed a one-hidden-layer ReLU classifier.
"""
from __future__ import annotations

import math

import torch
from torch import Tensor, nn

from docnre.candidates import relation_subsets
from docnre.errors import DataError
from docnre.model.config import Aggregator, ModelConfig
from docnre.model.vocab import Vocabulary

INIT_RANGE = 0.05  # uniform init half-width for embeddings and fallback vectors


def subset_key(subset: tuple[int, ...]) -> str:
    return "_".join(str(i) for i in subset)


def sinusoidal_encoding(index: int, dim: int, dtype: torch.dtype) -> Tensor:
    """Interleaved sin/cos of the index at geometric frequencies.

    Pair i uses angular frequency 10000^(-2i/dim); even output positions
    carry sin, odd positions cos. Index 0 therefore encodes as alternating
    zeros and ones.
    """
    if dim % 2 != 0:
        raise DataError("sinusoidal encoding dimension must be even")
    i = torch.arange(dim // 2, dtype=dtype)
    angles = index * torch.pow(torch.tensor(10000.0, dtype=dtype), -2.0 * i / dim)
    out = torch.empty(dim, dtype=dtype)
    out[0::2] = torch.sin(angles)
    out[1::2] = torch.cos(angles)
    return out


def pool_vectors(vectors: Tensor, aggregator: Aggregator) -> Tensor:
    """Elementwise pooling of a (count, dim) stack down to (dim,).

    The logsumexp subtracts the running elementwise max before
    exponentiating, so magnitude never overflows; a single vector pools to
    itself exactly under both operators.
    """
    if vectors.ndim != 2 or vectors.shape[0] == 0:
        raise DataError("pooling needs a nonempty (count, dim) stack")
    if aggregator == Aggregator.MAX:
        return vectors.max(dim=0).values
    peak = vectors.max(dim=0).values
    return peak + torch.log(torch.exp(vectors - peak).sum(dim=0))


class RelationClassifier(nn.Module):
    """BiLSTM encoder plus subset heads, pooling, fallbacks, and classifier."""

    def __init__(
        self,
        config: ModelConfig,
        vocab: Vocabulary,
        arity: int = 3,
        word_vectors: dict[str, list[float]] | None = None,
    ):
        super().__init__()
        if arity < 2:
            raise DataError("relation arity must be at least 2")
        self.config = config
        self.vocab = vocab
        self.arity = arity
        self.subsets = relation_subsets(arity)

        self.embedding = nn.Embedding(len(vocab), config.d_word)
        self.encoder = nn.LSTM(
            config.d_input, config.lstm_hidden, num_layers=1, bidirectional=True
        )
        self.subset_heads = nn.ModuleDict(
            {
                subset_key(s): nn.Linear(len(s) * config.d_hidden, config.d_mention)
                for s in self.subsets
            }
        )
        self.fallbacks = nn.ParameterDict(
            {subset_key(s): nn.Parameter(torch.empty(config.d_mention)) for s in self.subsets}
        )
        self.hidden_layer = nn.Linear(len(self.subsets) * config.d_mention, config.ffn_hidden)
        self.output_layer = nn.Linear(config.ffn_hidden, config.num_classes)

        self.to(config.dtype)
        self._reset_parameters(word_vectors or {})

    def _reset_parameters(self, word_vectors: dict[str, list[float]]) -> None:
        """Seeded init, independent of torch's global RNG state."""
        gen = torch.Generator().manual_seed(self.config.seed)
        with torch.no_grad():
            self.embedding.weight.uniform_(-INIT_RANGE, INIT_RANGE, generator=gen)
            for token, vec in sorted(word_vectors.items()):
                if len(vec) != self.config.d_word:
                    raise DataError(f"word vector for {token!r} has wrong dimension")
                if token in self.vocab:
                    row = self.vocab.index(token)
                    self.embedding.weight[row] = torch.tensor(vec, dtype=self.config.dtype)

            bound = 1.0 / math.sqrt(self.config.lstm_hidden)
            hidden = self.config.lstm_hidden
            for name, param in self.encoder.named_parameters():
                param.uniform_(-bound, bound, generator=gen)
                # Gate order is input, forget, cell, output; start with the
                # forget gate biased open.
                if name.startswith("bias_ih"):
                    param[hidden : 2 * hidden] = 1.0
                elif name.startswith("bias_hh"):
                    param[hidden : 2 * hidden] = 0.0

            for linear in (*self.subset_heads.values(), self.hidden_layer, self.output_layer):
                fan_in = linear.weight.shape[1]
                bound = 1.0 / math.sqrt(fan_in)
                linear.weight.uniform_(-bound, bound, generator=gen)
                linear.bias.uniform_(-bound, bound, generator=gen)

            for key in sorted(self.fallbacks.keys()):
                self.fallbacks[key].uniform_(-INIT_RANGE, INIT_RANGE, generator=gen)

    # -- forward pieces ---------------------------------------------------

    def embed_unit(self, token_ids: Tensor, unit_index: int) -> Tensor:
        """(len,) int64 token ids -> (len, d_word + d_unit_index)."""
        words = self.embedding(token_ids)
        pos = sinusoidal_encoding(unit_index, self.config.d_unit_index, self.config.dtype)
        return torch.cat([words, pos.expand(words.shape[0], -1)], dim=1)

    def encode_unit(self, token_ids: Tensor, unit_index: int) -> Tensor:
        """Hidden states (len, 2 * lstm_hidden) for one discourse unit.

        Units are encoded in isolation: no LSTM state crosses a unit
        boundary, so editing one unit can never change another's states.
        """
        if token_ids.numel() == 0:
            raise DataError("cannot encode an empty discourse unit")
        inputs = self.embed_unit(token_ids, unit_index).unsqueeze(1)
        outputs, _ = self.encoder(inputs)
        return outputs.squeeze(1)

    def subset_vector(self, subset: tuple[int, ...], tuple_hidden: Tensor | None) -> Tensor:
        """Pooled representation for one entity subset, or its fallback.

        tuple_hidden stacks, per mention tuple, the concatenated hidden
        states of its mentions in subset slot order: shape
        (num_tuples, |subset| * d_hidden). None or empty selects the
        learned fallback vector.
        """
        key = subset_key(subset)
        if tuple_hidden is None or tuple_hidden.shape[0] == 0:
            return self.fallbacks[key]
        reps = torch.tanh(self.subset_heads[key](tuple_hidden))
        return pool_vectors(reps, self.config.aggregator)

    def classify(self, subset_vectors: Tensor) -> Tensor:
        """Concatenated subset vectors (num_subsets * d_mention,) -> logits."""
        hidden = torch.relu(self.hidden_layer(subset_vectors))
        return self.output_layer(hidden)

    def candidate_logits(
        self, hidden_flat: Tensor, tuple_indices: dict[str, Tensor]
    ) -> Tensor:
        """Logits for one candidate given the document's flat hidden states.

        tuple_indices maps subset key -> (num_tuples, |subset|) rows into
        hidden_flat; subsets without co-occurring tuples are simply absent.
        """
        parts = []
        for subset in self.subsets:
            idx = tuple_indices.get(subset_key(subset))
            if idx is None or idx.shape[0] == 0:
                parts.append(self.subset_vector(subset, None))
            else:
                gathered = hidden_flat[idx]  # (k, |S|, d_hidden)
                flat = gathered.reshape(idx.shape[0], -1)
                parts.append(self.subset_vector(subset, flat))
        return self.classify(torch.cat(parts))
