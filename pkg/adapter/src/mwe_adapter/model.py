"""Token encoder with three independent sigmoid heads.

Two encoder families sit behind one interface:

* "builtin": a small randomly initialized transformer over hashed
  character-chunk subwords. Fully offline and fast on CPU; the default
  for tests and smoke runs.
* any other name: a pretrained Hugging Face encoder loaded through
  transformers (requires the model to be downloadable or cached).

Either way, each input token contributes its first subword's hidden
state; optional 16-dimensional NP-chunk and 32-dimensional
mean-dependency-distance embeddings are concatenated to that state
before the heads, one logit each for start, end and inside.
"""

import zlib
from dataclasses import dataclass

import torch
from torch import nn

CHUNK_EMB_DIM = 16
DEP_EMB_DIM = 32
DISTANCE_CAP = 5


@dataclass
class AdapterConfig:
    encoder_name: str = "builtin"
    use_chunk_embeddings: bool = False
    use_dep_embeddings: bool = False
    learning_rate: float = 3e-5
    batch_size: int = 16
    dropout: float = 0.3
    weight_decay: float = 0.01
    max_epochs: int = 20
    patience: int = 3
    seed: int = 42
    # builtin encoder geometry
    vocab_size: int = 4096
    hidden_size: int = 64
    num_layers: int = 2
    num_heads: int = 4
    max_positions: int = 512
    subword_chunk: int = 4

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @staticmethod
    def from_dict(raw: dict) -> "AdapterConfig":
        return AdapterConfig(**raw)


class HashSubwordTokenizer:
    """Deterministic subwords: lowercased fixed-length character chunks,
    hashed into a fixed vocabulary. Id 0 is reserved for padding."""

    def __init__(self, vocab_size: int, chunk: int):
        self.vocab_size = vocab_size
        self.chunk = chunk

    def subword_ids(self, surface: str) -> list[int]:
        s = surface.lower() or "?"
        pieces = [s[i : i + self.chunk] for i in range(0, len(s), self.chunk)]
        return [zlib.crc32(p.encode("utf-8")) % (self.vocab_size - 1) + 1 for p in pieces]

    def encode(self, surfaces) -> tuple[list[int], list[int]]:
        """Concatenated subword ids plus each token's first-subword index."""
        ids: list[int] = []
        first: list[int] = []
        for surface in surfaces:
            first.append(len(ids))
            ids.extend(self.subword_ids(surface))
        return ids, first


class BuiltinEncoder(nn.Module):
    def __init__(self, cfg: AdapterConfig):
        super().__init__()
        self.embed = nn.Embedding(cfg.vocab_size, cfg.hidden_size, padding_idx=0)
        self.positions = nn.Embedding(cfg.max_positions, cfg.hidden_size)
        layer = nn.TransformerEncoderLayer(
            d_model=cfg.hidden_size,
            nhead=cfg.num_heads,
            dim_feedforward=cfg.hidden_size * 2,
            dropout=cfg.dropout,
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=cfg.num_layers)
        self.hidden_size = cfg.hidden_size

    def forward(self, ids: torch.Tensor, pad_mask: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(ids.shape[1], device=ids.device).unsqueeze(0)
        h = self.embed(ids) + self.positions(positions)
        return self.encoder(h, src_key_padding_mask=pad_mask)


class BoundaryScorer(nn.Module):
    """Encoder plus start/end/inside heads over first-subword states."""

    def __init__(self, cfg: AdapterConfig):
        super().__init__()
        self.cfg = cfg
        if cfg.encoder_name == "builtin":
            self.tokenizer = HashSubwordTokenizer(cfg.vocab_size, cfg.subword_chunk)
            self.encoder = BuiltinEncoder(cfg)
            hidden = cfg.hidden_size
            self.hf = None
        else:
            try:
                from transformers import AutoModel, AutoTokenizer
            except ImportError as exc:  # pragma: no cover
                raise RuntimeError(
                    "transformers is required for pretrained encoders; "
                    "install mwe-adapter[hf] or use encoder_name='builtin'"
                ) from exc
            self.hf = AutoTokenizer.from_pretrained(cfg.encoder_name)
            self.encoder = AutoModel.from_pretrained(cfg.encoder_name)
            hidden = self.encoder.config.hidden_size
            self.tokenizer = None
        extra = 0
        if cfg.use_chunk_embeddings:
            self.chunk_embed = nn.Embedding(2, CHUNK_EMB_DIM)
            extra += CHUNK_EMB_DIM
        if cfg.use_dep_embeddings:
            self.dep_embed = nn.Embedding(DISTANCE_CAP + 1, DEP_EMB_DIM)
            extra += DEP_EMB_DIM
        self.dropout = nn.Dropout(cfg.dropout)
        self.heads = nn.Linear(hidden + extra, 3)

    def _encode_builtin(self, batch_surfaces):
        encoded = [self.tokenizer.encode(s) for s in batch_surfaces]
        max_sub = max(len(ids) for ids, _ in encoded)
        if max_sub > self.cfg.max_positions:
            raise ValueError(
                f"sentence needs {max_sub} subword positions, "
                f"limit is {self.cfg.max_positions}"
            )
        max_tok = max(len(first) for _, first in encoded)
        device = next(self.parameters()).device
        ids = torch.zeros(len(encoded), max_sub, dtype=torch.long, device=device)
        first = torch.zeros(len(encoded), max_tok, dtype=torch.long, device=device)
        token_mask = torch.zeros(len(encoded), max_tok, dtype=torch.bool, device=device)
        for b, (sub_ids, firsts) in enumerate(encoded):
            ids[b, : len(sub_ids)] = torch.tensor(sub_ids, device=device)
            first[b, : len(firsts)] = torch.tensor(firsts, device=device)
            token_mask[b, : len(firsts)] = True
        states = self.encoder(ids, pad_mask=ids == 0)
        return states, first, token_mask

    def _encode_hf(self, batch_surfaces):
        device = next(self.parameters()).device
        enc = self.hf(
            [list(s) for s in batch_surfaces],
            is_split_into_words=True,
            padding=True,
            truncation=True,
            return_tensors="pt",
        ).to(device)
        states = self.encoder(**enc).last_hidden_state
        max_tok = max(len(s) for s in batch_surfaces)
        first = torch.zeros(len(batch_surfaces), max_tok, dtype=torch.long, device=device)
        token_mask = torch.zeros(len(batch_surfaces), max_tok, dtype=torch.bool, device=device)
        for b, surfaces in enumerate(batch_surfaces):
            word_ids = enc.word_ids(b)
            seen = set()
            for position, word in enumerate(word_ids):
                if word is not None and word not in seen:
                    seen.add(word)
                    first[b, word] = position
                    token_mask[b, word] = True
        return states, first, token_mask

    def forward(self, batch_surfaces, chunk_tags=None, dep_buckets=None):
        """Logits [batch, max_tokens, 3] and a token validity mask."""
        if self.hf is None:
            states, first, token_mask = self._encode_builtin(batch_surfaces)
        else:
            states, first, token_mask = self._encode_hf(batch_surfaces)
        gather_index = first.unsqueeze(-1).expand(-1, -1, states.shape[-1])
        token_states = states.gather(1, gather_index)
        parts = [token_states]
        device = token_states.device
        if self.cfg.use_chunk_embeddings:
            tags = _pad_long(chunk_tags, first.shape[1], device)
            parts.append(self.chunk_embed(tags))
        if self.cfg.use_dep_embeddings:
            buckets = _pad_long(dep_buckets, first.shape[1], device)
            parts.append(self.dep_embed(buckets))
        stacked = torch.cat(parts, dim=-1) if len(parts) > 1 else token_states
        return self.heads(self.dropout(stacked)), token_mask


def _pad_long(rows, width: int, device) -> torch.Tensor:
    out = torch.zeros(len(rows), width, dtype=torch.long, device=device)
    for b, row in enumerate(rows):
        out[b, : len(row)] = torch.tensor(list(row), dtype=torch.long, device=device)
    return out


def save_checkpoint(model: BoundaryScorer, path) -> None:
    torch.save({"config": model.cfg.to_dict(), "state": model.state_dict()}, path)


def load_checkpoint(path) -> BoundaryScorer:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    model = BoundaryScorer(AdapterConfig.from_dict(payload["config"]))
    model.load_state_dict(payload["state"])
    model.eval()
    return model
