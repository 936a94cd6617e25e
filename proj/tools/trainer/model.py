"""Causal transformer without positional encodings for per-position labels."""

import torch
from torch import nn


class NoPETransformer(nn.Module):
    def __init__(self, depth, d=64, heads=2, vocab=3):
        super().__init__()
        if depth < 1:
            raise ValueError("depth must be at least 1")
        self.embed = nn.Embedding(vocab, d)
        layer = nn.TransformerEncoderLayer(d, heads, dim_feedforward=4 * d, dropout=0.0, batch_first=True)
        self.layers = nn.TransformerEncoder(layer, depth, enable_nested_tensor=False)
        self.head = nn.Linear(d, 2)

    def forward(self, tokens, padding_mask=None):
        n = tokens.shape[1]
        causal = torch.triu(torch.full((n, n), float("-inf"), device=tokens.device), diagonal=1)
        h = self.layers(self.embed(tokens), mask=causal, src_key_padding_mask=padding_mask)
        return self.head(h)
