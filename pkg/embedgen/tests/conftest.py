"""Shared fixtures: a tiny offline sentence-transformers model and raw files.

The test model is built from scratch on disk (character-level WordPiece
vocab, 2-layer BERT, 384-dim hidden state) so the suite runs without
network access while exercising the same loading path as a published
model name.
"""

import json
import string

import pytest

_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE_RESULTS.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE_RESULTS:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")


def _build_tiny_model(target_dir) -> str:
    """Write a deterministic 384-dim sentence-transformers model to disk."""
    import torch
    from tokenizers import Tokenizer
    from tokenizers.models import WordPiece
    from tokenizers.normalizers import BertNormalizer
    from tokenizers.pre_tokenizers import BertPreTokenizer
    from tokenizers.processors import TemplateProcessing
    from transformers import BertConfig, BertModel, BertTokenizerFast
    from sentence_transformers import SentenceTransformer
    from sentence_transformers.sentence_transformer.modules import Pooling, Transformer

    hf_dir = target_dir / "hf"
    st_dir = target_dir / "st"
    hf_dir.mkdir(parents=True)

    chars = string.ascii_lowercase + string.digits
    tokens = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    tokens += list(chars) + ["##" + c for c in chars]
    vocab = {t: i for i, t in enumerate(tokens)}

    inner = Tokenizer(WordPiece(vocab, unk_token="[UNK]"))
    inner.normalizer = BertNormalizer(lowercase=True)
    inner.pre_tokenizer = BertPreTokenizer()
    inner.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    tokenizer = BertTokenizerFast(
        tokenizer_object=inner,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
        model_max_length=128,
    )
    tokenizer.save_pretrained(hf_dir)

    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=384,
        num_hidden_layers=2,
        num_attention_heads=4,
        intermediate_size=512,
        max_position_embeddings=128,
    )
    torch.manual_seed(0)
    BertModel(config).save_pretrained(hf_dir)

    word = Transformer(str(hf_dir))
    pooling = Pooling(word.get_embedding_dimension())
    SentenceTransformer(modules=[word, pooling]).save(str(st_dir))
    return str(st_dir)


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory) -> str:
    return _build_tiny_model(tmp_path_factory.mktemp("tiny_model"))


RAW_CATALOG_DOC = {
    "servers": [
        {
            "id": "srv-files",
            "name": "files",
            "description": "local file utilities",
            "tools": [
                {"id": "t-read", "name": "read", "description": "read a text file"},
                {"id": "t-write", "name": "write", "description": "write a text file"},
            ],
        },
        {
            "id": "srv-weather",
            "name": "weather",
            "description": "weather lookups",
            "tools": [
                {
                    "id": "t-forecast",
                    "name": "forecast",
                    "description": "forecast tomorrow",
                    "server_id": "srv-weather",
                },
            ],
        },
        {
            "id": "srv-mail",
            "name": "mail",
            "description": "send and search email",
            "tools": [
                {"id": "t-send", "name": "send", "description": "send an email"},
                {"id": "t-search", "name": "search", "description": "search the inbox"},
            ],
        },
    ]
}

RAW_QUERIES_DOC = [
    {"query": "read the report file", "server_id": "srv-files", "tool_id": "t-read"},
    {"query": "what is the weather tomorrow", "server_id": "srv-weather", "tool_id": "t-forecast"},
    {"query": "read the report file", "server_id": "srv-files", "tool_id": "t-read"},
]


@pytest.fixture()
def raw_catalog_path(tmp_path):
    path = tmp_path / "raw_catalog.json"
    path.write_text(json.dumps(RAW_CATALOG_DOC))
    return path


@pytest.fixture()
def raw_queries_path(tmp_path):
    path = tmp_path / "raw_queries.json"
    path.write_text(json.dumps(RAW_QUERIES_DOC))
    return path
