"""Shared fixtures and deterministic synthetic-corpus helpers."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from simscore.corpus import CodeFragment, Corpus, PairRecord, preprocess

_TYPES = ["int", "long", "double", "boolean"]
_OPS = ["+", "-", "*", "%"]
_NAMES = ["acc", "tmp", "val", "count", "idx", "item", "size", "left", "right", "cur"]


def synth_java(rng: random.Random, uid: int) -> str:
    """A deterministic random Java class. Every fragment carries globally
    unique identifiers (class, method and one variable) so corpus-level
    n-gram filtering never empties a fragment's own n-grams entirely."""
    cls = f"Gen{uid}"
    uniq = f"uq{uid}z{rng.randrange(1_000_000)}"
    names = rng.sample(_NAMES, k=4) + [uniq]
    lines = [f"public class {cls} {{"]
    if rng.random() < 0.4:
        lines.append(f"    static int shared{uid} = {rng.randrange(100)};")
    for m in range(rng.randint(1, 2)):
        method = f"run{uid}m{m}"
        a, b = rng.sample(names, k=2)
        lines.append(f"    public static int {method}(int {a}, int {b}) {{")
        decl = rng.choice(names)
        lines.append(f"        {rng.choice(_TYPES)} {decl} = {a} {rng.choice(_OPS)} {rng.randrange(1, 9)};")
        n_stmts = rng.randint(1, 4)
        for _ in range(n_stmts):
            kind = rng.randrange(4)
            x = rng.choice(names)
            y = rng.choice(names)
            if kind == 0:
                lines.append(f"        {x} = {y} {rng.choice(_OPS)} {rng.randrange(1, 20)};")
            elif kind == 1:
                lines.append(f"        if ({x} > {rng.randrange(10)}) {{ {x} = {x} - {y}; }}")
            elif kind == 2:
                lines.append(
                    f"        for (int i{m} = 0; i{m} < {rng.randrange(2, 12)}; i{m}++)"
                    f" {{ {x} = {x} {rng.choice(_OPS)} i{m}; }}"
                )
            else:
                lines.append(f'        System.out.println("{cls}-" + {x});')
        lines.append(f"        return {rng.choice(names)};")
        lines.append("    }")
    if rng.random() < 0.5:
        lines.append(f"    // generated case {uid}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def synth_fragment(rng: random.Random, uid: int, dataset: str = "synth") -> CodeFragment:
    return preprocess(CodeFragment(
        id=f"frag{uid}.java", dataset=dataset, task_id="",
        raw_text=synth_java(rng, uid),
    ))


def synth_corpus(seed: int, n_fragments: int, n_pairs: int,
                 dataset: str = "synth") -> Corpus:
    """Deterministic labelled corpus: positive pairs are (original, mutated
    copy) with levels cycling 1..6, negatives pair independent fragments."""
    rng = random.Random(seed)
    fragments = {}
    for uid in range(n_fragments):
        frag = synth_fragment(rng, uid, dataset)
        fragments[frag.id] = frag
    originals = sorted(fragments)
    pairs = []
    used = set()
    pos_count = 0
    while len(pairs) < n_pairs:
        make_positive = len(pairs) % 2 == 0
        if make_positive:
            src = fragments[rng.choice(originals)]
            copy_id = f"copy{pos_count}_{src.id}"
            copy = preprocess(CodeFragment(
                id=copy_id, dataset=dataset, task_id="",
                raw_text=mutate_java(rng, src.raw_text),
            ))
            fragments[copy_id] = copy
            pairs.append(PairRecord(src.id, copy_id, True, pos_count % 6 + 1, dataset))
            pos_count += 1
            continue
        left, right = rng.sample(originals, k=2)
        key = (left, right) if left <= right else (right, left)
        if key in used:
            continue
        used.add(key)
        pairs.append(PairRecord(left, right, False, None, dataset))
    return Corpus(fragments=fragments, pairs=pairs)


def mutate_java(rng: random.Random, text: str) -> str:
    """Identifier-renaming plus light formatting noise: a cheap 'plagiarised'
    copy generator for end-to-end tests."""
    out = text
    for name in _NAMES:
        if rng.random() < 0.6:
            out = out.replace(name, f"{name}R{rng.randrange(100)}")
    if rng.random() < 0.5:
        out = out.replace("    ", "  ")
    if rng.random() < 0.5:
        out = "// reviewed\n" + out
    return out


def write_dataset(root: Path, corpus_dir: str, rows: list[tuple[str, str, int, str, str]],
                  files: dict[str, str]) -> tuple[Path, Path]:
    """Materialize fragment files + pairs manifest on disk; returns (root, manifest)."""
    base = root / corpus_dir
    files_dir = base / "files"
    files_dir.mkdir(parents=True, exist_ok=True)
    for rel, text in files.items():
        path = files_dir / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    manifest = base / "pairs.csv"
    lines = ["left_id,right_id,label,level,dataset"]
    for left, right, label, level, dataset in rows:
        lines.append(f"{left},{right},{label},{level},{dataset}")
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return files_dir, manifest


@pytest.fixture(scope="session")
def small_corpus() -> Corpus:
    return synth_corpus(seed=7, n_fragments=14, n_pairs=20)
