"""Corpus loading, preprocessing, tokenization, and corpus statistics.

A corpus is a directory of UTF-8 fragment files plus a pairs manifest CSV
(`left_id,right_id,label,level,dataset`). Fragment ids are the file paths
relative to the corpus root (optionally prefixed when several corpora are
merged into one run).
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional

from .errors import LoadError, ValidationError
from .lexer import Token, comment_and_literal_spans, lex

MANIFEST_HEADER = ["left_id", "right_id", "label", "level", "dataset"]


@dataclass(frozen=True)
class CodeFragment:
    """One source file of a dataset."""

    id: str
    dataset: str
    task_id: str
    raw_text: str
    preprocessed_text: Optional[str] = None
    language: str = "java"


@dataclass(frozen=True)
class PairRecord:
    left_id: str
    right_id: str
    label: bool
    level: Optional[int]
    dataset: str

    def key(self) -> tuple[str, str]:
        """Order-free identity of the pair."""
        return (self.left_id, self.right_id) if self.left_id <= self.right_id else (self.right_id, self.left_id)


@dataclass(frozen=True)
class TokenStream:
    tokens: tuple[Token, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def texts(self) -> tuple[str, ...]:
        return tuple(t.text for t in self.tokens)


@dataclass
class Corpus:
    fragments: dict[str, CodeFragment]
    pairs: list[PairRecord]

    def datasets(self) -> list[str]:
        return sorted({p.dataset for p in self.pairs})

    def pairs_for_dataset(self, dataset: str) -> list[PairRecord]:
        return [p for p in self.pairs if p.dataset == dataset]

    def pair_counts(self, dataset: Optional[str] = None) -> dict[str, int]:
        pairs = self.pairs if dataset is None else self.pairs_for_dataset(dataset)
        pos = sum(1 for p in pairs if p.label)
        return {"total": len(pairs), "plagiarised": pos, "non_plagiarised": len(pairs) - pos}

    def level_counts(self, dataset: Optional[str] = None) -> dict[int, int]:
        pairs = self.pairs if dataset is None else self.pairs_for_dataset(dataset)
        counts = {k: 0 for k in range(1, 7)}
        for p in pairs:
            if p.level is not None:
                counts[p.level] += 1
        return counts

    def fragments_for_dataset(self, dataset: str) -> list[CodeFragment]:
        ids = sorted({fid for p in self.pairs_for_dataset(dataset) for fid in (p.left_id, p.right_id)})
        return [self.fragments[i] for i in ids]

    def with_preprocessed(self) -> "Corpus":
        """Return a copy whose fragments all carry preprocessed_text."""
        frags = {
            fid: (f if f.preprocessed_text is not None else preprocess(f))
            for fid, f in self.fragments.items()
        }
        return Corpus(fragments=frags, pairs=list(self.pairs))


@dataclass
class CorpusStats:
    dataset: str
    n_fragments: int
    avg_tokens: float
    max_tokens: int
    n_over_512: int
    avg_tokens_pre: float
    max_tokens_pre: int
    n_over_512_pre: int
    reduction_pct: float


def load_corpus(root: Path | str, manifest: Path | str, id_prefix: str = "",
                language: str = "java") -> Corpus:
    """Load the fragments referenced by `manifest` from files under `root`.

    Duplicate manifest rows (same unordered pair and identical metadata)
    collapse to one. Fragment task_id is the file's parent directory
    relative to the root.
    """
    root = Path(root)
    manifest = Path(manifest)
    if not manifest.is_file():
        raise LoadError(f"pairs manifest not found: {manifest}")
    try:
        with manifest.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                rows = []
            else:
                missing = [c for c in MANIFEST_HEADER if c not in reader.fieldnames]
                if missing:
                    raise ValidationError(
                        f"{manifest}: manifest missing column(s) {missing}; "
                        f"expected header {','.join(MANIFEST_HEADER)}"
                    )
                rows = list(reader)
    except OSError as exc:
        raise LoadError(f"cannot read manifest {manifest}: {exc}") from exc

    pairs: list[PairRecord] = []
    seen: set[tuple] = set()
    for lineno, row in enumerate(rows, start=2):
        pair = _parse_pair_row(row, manifest, lineno, id_prefix)
        dedup_key = (pair.key(), pair.label, pair.level, pair.dataset)
        if dedup_key in seen:
            continue
        seen.add(dedup_key)
        pairs.append(pair)

    fragments: dict[str, CodeFragment] = {}
    for pair in pairs:
        for fid in (pair.left_id, pair.right_id):
            if fid in fragments:
                continue
            rel = fid[len(id_prefix):] if id_prefix and fid.startswith(id_prefix) else fid
            path = root / rel
            if not path.is_file():
                raise LoadError(f"fragment file missing for id {fid!r}: {path}")
            try:
                raw = path.read_text(encoding="utf-8")
            except (OSError, UnicodeDecodeError) as exc:
                raise LoadError(f"cannot read fragment {fid!r} from {path}: {exc}") from exc
            task = str(Path(rel).parent)
            fragments[fid] = CodeFragment(
                id=fid,
                dataset=pair.dataset,
                task_id="" if task == "." else task,
                raw_text=raw,
                language=language,
            )
    return Corpus(fragments=fragments, pairs=pairs)


def _parse_pair_row(row: dict, manifest: Path, lineno: int, id_prefix: str) -> PairRecord:
    where = f"{manifest}:{lineno}"
    left = (row.get("left_id") or "").strip()
    right = (row.get("right_id") or "").strip()
    if not left or not right:
        raise ValidationError(f"{where}: empty fragment id")
    label_raw = (row.get("label") or "").strip()
    if label_raw not in {"0", "1"}:
        raise ValidationError(f"{where}: label must be 0 or 1, got {label_raw!r}")
    label = label_raw == "1"
    level_raw = (row.get("level") or "").strip()
    level: Optional[int] = None
    if level_raw:
        try:
            level = int(level_raw)
        except ValueError:
            raise ValidationError(f"{where}: malformed level {level_raw!r}") from None
        if not 1 <= level <= 6:
            raise ValidationError(f"{where}: level {level} outside 1..6")
        if not label:
            raise ValidationError(f"{where}: level given on a non-plagiarised pair")
    dataset = (row.get("dataset") or "").strip()
    if not dataset:
        raise ValidationError(f"{where}: empty dataset tag")
    left, right = id_prefix + left, id_prefix + right
    if left == right:
        raise ValidationError(f"{where}: pair references the same fragment {left!r} twice")
    return PairRecord(left_id=left, right_id=right, label=label, level=level, dataset=dataset)


def merge_corpora(parts: Iterable[Corpus]) -> Corpus:
    fragments: dict[str, CodeFragment] = {}
    pairs: list[PairRecord] = []
    for part in parts:
        for fid, frag in part.fragments.items():
            if fid in fragments and fragments[fid].raw_text != frag.raw_text:
                raise ValidationError(
                    f"fragment id collision across corpora: {fid!r} "
                    "(set a distinct id prefix per corpus entry)"
                )
            fragments.setdefault(fid, frag)
        pairs.extend(part.pairs)
    return Corpus(fragments=fragments, pairs=pairs)


def preprocess(f: CodeFragment) -> CodeFragment:
    """Strip comments and Java import/package statements, collapse whitespace.

    String/char literal contents are untouched; every removed span leaves one
    separator so adjacent tokens never merge. Idempotent at the text level.
    """
    return replace(f, preprocessed_text=preprocess_text(f.raw_text))


def preprocess_text(text: str) -> str:
    """Fixed point of the single preprocessing pass. Lexable code converges in
    one pass; pathological quote-mismatched text can regroup literal spans
    between passes, so iterate (each pass shrinks a (length, non-space-
    whitespace) measure, guaranteeing termination)."""
    prev = text
    for _ in range(len(text) + 2):
        cur = _preprocess_once(prev)
        if cur == prev:
            return cur
        prev = cur
    return prev


def _preprocess_once(text: str) -> str:
    protected: list[tuple[int, int]] = []  # literal spans, kept verbatim
    drop: list[tuple[int, int]] = []  # comment spans
    for start, end, kind in comment_and_literal_spans(text):
        (protected if kind == "literal" else drop).append((start, end))

    # pass 1: comments -> single space
    pieces: list[str] = []
    pos = 0
    for start, end in drop:
        pieces.append(text[pos:start])
        pieces.append(" ")
        pos = end
    pieces.append(text[pos:])
    text = "".join(pieces)

    # pass 2: drop import/package statements (token-level, so literals are safe)
    text = _strip_import_package(text)

    # pass 3: collapse whitespace runs outside literals
    out: list[str] = []
    literal_spans = [(s, e) for s, e, k in comment_and_literal_spans(text) if k == "literal"]
    idx = 0
    pos = 0
    pending_space = False
    n = len(text)
    while pos < n:
        if idx < len(literal_spans) and pos == literal_spans[idx][0]:
            s, e = literal_spans[idx]
            if pending_space and out:
                out.append(" ")
            pending_space = False
            out.append(text[s:e])
            pos = e
            idx += 1
            continue
        ch = text[pos]
        if ch.isspace():
            pending_space = True
        else:
            if pending_space and out:
                out.append(" ")
            pending_space = False
            out.append(ch)
        pos += 1
    return "".join(out)


def _strip_import_package(text: str) -> str:
    """Remove `import ...;` / `package ...;` statements at statement starts.
    Works on comment-free text; literal-aware via the lexer's span scanner."""
    spans = [(s, e) for s, e, k in comment_and_literal_spans(text) if k == "literal"]

    out: list[str] = []
    i, n = 0, len(text)
    span_idx = 0
    at_stmt_start = True
    while i < n:
        if span_idx < len(spans) and i == spans[span_idx][0]:
            s, e = spans[span_idx]
            out.append(text[s:e])
            i = e
            span_idx += 1
            at_stmt_start = False
            continue
        ch = text[i]
        if ch.isspace():
            out.append(ch)
            i += 1
            continue
        if at_stmt_start and text.startswith(("import", "package"), i):
            j = i + (6 if text.startswith("import", i) else 7)
            if j >= n or not (text[j].isalnum() or text[j] in "_$"):
                # consume through the terminating ';' (or to end of input)
                k = j
                while k < n and text[k] != ";":
                    k += 1
                i = k + 1 if k < n else n
                out.append(" ")
                continue
        out.append(ch)
        if ch in ";{}":
            at_stmt_start = True
        else:
            at_stmt_start = False
        i += 1
    return "".join(out)


def tokenize(f: CodeFragment, use_preprocessed: bool = False,
             include_comments: bool = False) -> TokenStream:
    """Lex the fragment. Comments become tokens only on raw text with
    include_comments enabled."""
    if use_preprocessed:
        if f.preprocessed_text is None:
            raise ValidationError(f"fragment {f.id!r} has no preprocessed text")
        text = f.preprocessed_text
        include_comments = False
    else:
        text = f.raw_text
    return TokenStream(tokens=tuple(lex(text, f.language, include_comments=include_comments)))


def ngram_multiset(stream: TokenStream, n: int) -> Counter:
    """Multiset of all contiguous n-token windows (token text only)."""
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    texts = stream.texts()
    return Counter(texts[i:i + n] for i in range(len(texts) - n + 1))


def corpus_stats(corpus: Corpus) -> list[CorpusStats]:
    """Per-dataset token statistics over unique fragments (plus a pooled row).
    Raw counts include comment-content tokens (the statistics motivate
    preprocessing, whose main effect is comment removal); preprocessed text
    has none. Fragments missing preprocessed_text are preprocessed on the fly."""
    rows = []
    datasets = corpus.datasets()
    for tag in datasets + ["pooled"]:
        if tag == "pooled":
            frags = [corpus.fragments[b] for b in sorted(corpus.fragments)]
        else:
            frags = corpus.fragments_for_dataset(tag)
        raw_counts = []
        pre_counts = []
        for f in frags:
            if f.preprocessed_text is None:
                f = preprocess(f)
            raw_counts.append(len(tokenize(f, use_preprocessed=False, include_comments=True)))
            pre_counts.append(len(tokenize(f, use_preprocessed=True)))
        n = len(frags)
        avg_raw = sum(raw_counts) / n if n else 0.0
        avg_pre = sum(pre_counts) / n if n else 0.0
        reduction = 100.0 * (avg_raw - avg_pre) / avg_raw if avg_raw > 0 else 0.0
        rows.append(CorpusStats(
            dataset=tag,
            n_fragments=n,
            avg_tokens=avg_raw,
            max_tokens=max(raw_counts, default=0),
            n_over_512=sum(1 for c in raw_counts if c > 512),
            avg_tokens_pre=avg_pre,
            max_tokens_pre=max(pre_counts, default=0),
            n_over_512_pre=sum(1 for c in pre_counts if c > 512),
            reduction_pct=reduction,
        ))
    return rows
