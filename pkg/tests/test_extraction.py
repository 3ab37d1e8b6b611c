"""Lexer, parser, and sample-extraction contracts.

The expected path-context sets are produced by an independent brute-force
tree walk in this file, never by the library's own enumeration.
"""

import pytest

from codeshift import extraction as ex

FIXTURE_METHOD = "int id(int a){return a;}"
FIXTURE_CLASS = "class A { void f() { return; } }"


# -- tokenizer ----------------------------------------------------------


def kinds_and_texts(tokens):
    return [(t.kind, t.text) for t in tokens]


def test_tokenize_simple_statement():
    tokens = ex.tokenize_java("int x = 1;")
    assert kinds_and_texts(tokens) == [
        ("keyword", "int"),
        ("identifier", "x"),
        ("operator", "="),
        ("literal", "1"),
        ("separator", ";"),
    ]


def test_tokenize_strips_comments():
    tokens = ex.tokenize_java("// note\nreturn;")
    assert kinds_and_texts(tokens) == [("keyword", "return"), ("separator", ";")]
    block = ex.tokenize_java("/* a\nb */ x")
    assert kinds_and_texts(block) == [("identifier", "x")]


def test_tokenize_unterminated_string():
    with pytest.raises(ex.LexicalError) as err:
        ex.tokenize_java('"abc')
    assert err.value.line == 1
    with pytest.raises(ex.LexicalError) as err:
        ex.tokenize_java("x;\n/* never closed")
    assert err.value.line == 2


def test_tokenize_literals_and_operators():
    tokens = ex.tokenize_java('s = "a b" + \'c\' + 0x1F + 2.5e-3; y >>= 2;')
    texts = [t.text for t in tokens]
    assert '"a b"' in texts and "'c'" in texts and "0x1F" in texts and "2.5e-3" in texts
    assert ">>=" in texts
    kinds = {t.text: t.kind for t in tokens}
    assert kinds['"a b"'] == "literal"
    assert kinds[">>="] == "operator"


def test_tokenize_word_literals():
    tokens = ex.tokenize_java("flag = true;")
    assert ("literal", "true") in kinds_and_texts(tokens)


# -- parser ------------------------------------------------------------


def parse(source):
    return ex.parse_java_lite(ex.tokenize_java(source))


def shape(n):
    """(kind, text-if-leaf, child shapes) for structural comparison."""
    return (n.kind, n.token.text if n.token else None, [shape(c) for c in n.children])


def test_parse_fixture_class_tree():
    tree = parse(FIXTURE_CLASS)
    expected = (
        "CompilationUnit",
        None,
        [
            (
                "ClassDecl",
                None,
                [
                    ("Name", "A", []),
                    (
                        "MethodDecl",
                        None,
                        [
                            ("Type", "void", []),
                            ("Name", "f", []),
                            ("Block", None, [("Return", "return", [])]),
                        ],
                    ),
                ],
            )
        ],
    )
    assert shape(tree) == expected


def test_parse_empty_source():
    tree = parse("")
    assert tree.kind == "CompilationUnit"
    assert tree.children == []


def test_parse_unbalanced_braces():
    with pytest.raises(ex.ParseError):
        parse("class A { void f() {")


def test_parse_statements_and_expressions():
    source = """
    class Demo {
        int total;
        int sum(int[] xs, int n) {
            int acc = 0;
            for (int i = 0; i < n; i++) {
                acc += xs[i];
            }
            while (acc > 100) { acc = acc - 1; }
            if (acc == 0) { return acc; } else { acc--; }
            try { helper(acc); } catch (Exception e) { acc = 0; } finally { log(acc); }
            return acc;
        }
    }
    """
    tree = parse(source)
    kinds = {n.kind for n in tree.walk()}
    assert {"ClassDecl", "FieldDecl", "MethodDecl", "For", "While", "If", "Try",
            "Catch", "Finally", "Call", "Index", "Assign=", "Assign+=", "Binary<"} <= kinds
    methods = list(ex.iter_method_nodes(tree))
    assert len(methods) == 1
    assert ex.method_name(methods[0]) == "sum"


def test_parse_invariants_hold():
    source = """
    class A {
        void f(String s) {
            Object o = s.trim().length() > 2 ? s : null;
            for (String part : parts) { use(part); }
            do { spin(); } while (busy);
        }
    }
    """
    tree = parse(source)
    for n in tree.walk():
        if n is tree:
            continue
        if n.token is not None:
            assert n.children == [], f"leaf {n.kind} has children"
        else:
            assert len(n.children) >= 1, f"internal {n.kind} is empty"


def test_parse_recovery_wraps_unknown_material():
    # switch is outside the subset grammar: consumed balanced, not rejected.
    source = "class A { void f(int x) { switch (x) { default: x = 1; } return; } }"
    tree = parse(source)
    methods = list(ex.iter_method_nodes(tree))
    assert len(methods) == 1
    kinds = [n.kind for n in methods[0].walk()]
    assert "ExprStmt" in kinds and "Return" in kinds


def test_parse_is_deterministic():
    source = FIXTURE_CLASS + " class B { int g(int v) { return v + 1; } }"
    assert shape(parse(source)) == shape(parse(source))


# -- path contexts -------------------------------------------------------


def brute_force_contexts(tree, max_path_len):
    """Independent enumeration: walk every method, pair leaves, climb chains."""
    def parent_of(root):
        table = {}
        def rec(n):
            for c in n.children:
                table[id(c)] = n
                rec(c)
        rec(root)
        return table

    def chain(table, n):
        out = []
        cur = table.get(id(n))
        while cur is not None:
            out.append(cur)
            cur = table.get(id(cur))
        return out

    parents = parent_of(tree)
    per_method = {}
    for m in tree.walk():
        if m.kind != "MethodDecl":
            continue
        name = next(c.token.text for c in m.children if c.kind == "Name" and c.token)
        skip = {id(c) for c in m.children if c.token is not None and c.kind in ("Type", "Name")}
        leaves = [n for n in m.walk() if n.token is not None and id(n) not in skip]
        triples = set()
        for i in range(len(leaves)):
            for j in range(i + 1, len(leaves)):
                up = chain(parents, leaves[i])
                down = chain(parents, leaves[j])
                common = None
                dpos = {id(x): k for k, x in enumerate(down)}
                for k, x in enumerate(up):
                    if id(x) in dpos:
                        common = (k, dpos[id(x)])
                        break
                k, l = common
                nodes = up[: k + 1] + down[:l][::-1]
                if len(nodes) > max_path_len:
                    continue
                text = "↑".join(x.kind for x in up[: k + 1])
                for x in down[:l][::-1]:
                    text += "↓" + x.kind
                def term(leaf):
                    t = leaf.token.text
                    if t == name:
                        return ex.METHOD_NAME_SENTINEL
                    return ex.normalize_text(t)
                triples.add((term(leaves[i]), text, term(leaves[j])))
        per_method[name] = triples
    return per_method


def test_method_samples_match_brute_force():
    tree = parse(f"class A {{ {FIXTURE_METHOD} }}")
    expected = brute_force_contexts(tree, max_path_len=9)
    samples = ex.extract_method_samples(tree, max_contexts=200, max_path_len=9)
    assert len(samples) == 1
    got = {(c.left, c.path, c.right) for c in samples[0].contexts}
    assert got == expected["id"]
    # the param/return pairing the fixture exists to pin down
    assert ("a", "Param↑MethodDecl↓Block↓Return", "a") in got


def test_method_samples_match_brute_force_larger():
    source = """
    class Demo {
        int pick(int a, int b) { if (a > b) { return a; } return b; }
        void store(int v) { total = total + v; count++; }
    }
    """
    tree = parse(source)
    expected = brute_force_contexts(tree, max_path_len=9)
    for s in ex.extract_method_samples(tree, max_contexts=10_000, max_path_len=9):
        got = {(c.left, c.path, c.right) for c in s.contexts}
        assert got == expected[s.label]


def test_method_sample_path_length_pruning():
    source = "class A { int f(int a) { if (a > 0) { if (a > 1) { return a; } } return 0; } }"
    tree = parse(source)
    deep = ex.extract_method_samples(tree, max_contexts=10_000, max_path_len=30)[0]
    shallow = ex.extract_method_samples(tree, max_contexts=10_000, max_path_len=3)[0]
    assert len(shallow.contexts) < len(deep.contexts)
    assert {(c.left, c.path, c.right) for c in shallow.contexts} <= {
        (c.left, c.path, c.right) for c in deep.contexts
    }


def test_method_with_single_body_leaf_is_dropped():
    tree = parse("class A { void f() { go; } }")
    assert ex.extract_method_samples(tree) == []


def test_max_contexts_subsample_is_deterministic():
    source = "class A { int f(int a, int b, int c) { return a + b + c * a - b; } }"
    tree = parse(source)
    first = ex.extract_method_samples(tree, max_contexts=1, seed=7)
    second = ex.extract_method_samples(tree, max_contexts=1, seed=7)
    assert len(first[0].contexts) == 1
    assert first[0].contexts == second[0].contexts


def test_no_label_leakage():
    source = "class A { int fib(int fib) { return fib(fib - 1) + fib; } }"
    tree = parse(source)
    sample = ex.extract_method_samples(tree, max_contexts=10_000)[0]
    for c in sample.contexts:
        assert c.left != "fib" and c.right != "fib"
    terminals = {c.left for c in sample.contexts} | {c.right for c in sample.contexts}
    assert ex.METHOD_NAME_SENTINEL in terminals


def test_path_symmetry():
    tree = parse(FIXTURE_CLASS + f" class B {{ {FIXTURE_METHOD} }}")
    parents = ex.build_parent_map(tree)
    for m in ex.iter_method_nodes(tree):
        leaves = ex.method_context_leaves(m)
        for i in range(len(leaves)):
            for j in range(i + 1, len(leaves)):
                fwd, flen = ex.leaf_path(parents, leaves[i], leaves[j])
                rev, rlen = ex.leaf_path(parents, leaves[j], leaves[i])
                assert flen == rlen
                # reversing the walk swaps the arrows and the node order
                swapped = rev.replace("↑", "#").replace("↓", "↑").replace("#", "↓")
                parts = swapped.replace("↓", "↑").split("↑")
                fparts = fwd.replace("↓", "↑").split("↑")
                assert parts[::-1] == fparts


# -- cbow ----------------------------------------------------------------


def test_cbow_window_one():
    tokens = ex.tokenize_java("a b c")
    samples = ex.extract_cbow_samples(tokens, window=1)
    assert [(s.target, s.context) for s in samples] == [
        ("a", [ex.PAD_TOKEN, "b"]),
        ("b", ["a", "c"]),
        ("c", ["b", ex.PAD_TOKEN]),
    ]


def test_cbow_empty_and_middle():
    assert ex.extract_cbow_samples([], window=2) == []
    tokens = ex.tokenize_java("a b c d e")
    samples = ex.extract_cbow_samples(tokens, window=2)
    middle = samples[2]
    assert middle.target == "c"
    assert middle.context == ["a", "b", "d", "e"]
    for s in samples:
        assert len(s.context) == 4


# -- vocabulary ----------------------------------------------------------


def test_vocab_min_count():
    from collections import Counter

    vocab = ex.Vocabulary.from_counts(Counter({"foo": 3, "bar": 1}), min_count=2)
    assert "foo" in vocab
    assert vocab.encode("bar") == ex.UNK_ID


def test_vocab_min_count_one_keeps_all():
    from collections import Counter

    vocab = ex.Vocabulary.from_counts(Counter({"x": 1, "y": 1}), min_count=1)
    assert "x" in vocab and "y" in vocab


def test_vocab_frozen_rejects_and_unknown_maps_to_unk():
    from collections import Counter

    vocab = ex.Vocabulary.from_counts(Counter({"x": 2}), min_count=1)
    assert vocab.encode("baz") == ex.UNK_ID
    with pytest.raises(ex.VocabularyFrozenError):
        vocab.add("new")


def test_vocab_ids_dense_and_frequency_ordered():
    from collections import Counter

    vocab = ex.Vocabulary.from_counts(Counter({"rare": 1, "mid": 5, "abc": 5, "big": 9}), min_count=1)
    assert vocab.tokens == [ex.UNK_TOKEN, ex.PAD_TOKEN, "big", "abc", "mid", "rare"]
    assert [vocab.encode(t) for t in vocab.tokens] == list(range(len(vocab)))
    rebuilt = ex.Vocabulary.from_tokens(vocab.tokens)
    assert rebuilt.tokens == vocab.tokens


def test_build_vocabs_from_samples_and_empty_error():
    tree = parse("class A { int f(int a) { return a; } int g(int b) { return b; } }")
    samples = ex.extract_method_samples(tree)
    terminals, paths, labels = ex.build_cs_vocabs(samples, min_count=1)
    assert "f" in labels and "g" in labels
    assert all(p.count(",") == 0 and " " not in p for p in paths.tokens)
    with pytest.raises(ValueError):
        ex.build_cs_vocabs([], min_count=1)
    with pytest.raises(ValueError):
        ex.build_cc_vocab([], min_count=1)


def test_cc_vocab_skips_pad():
    tokens = ex.tokenize_java("a b")
    vocab = ex.build_cc_vocab(ex.extract_cbow_samples(tokens, window=2), min_count=1)
    assert vocab.encode(ex.PAD_TOKEN) == ex.PAD_ID
    assert ex.PAD_TOKEN in vocab.tokens[:2]


# -- interchange files ----------------------------------------------------


def test_cs_contexts_roundtrip(tmp_path):
    tree = parse("class A { int f(int a, int b) { return a + b; } }")
    samples = ex.extract_method_samples(tree)
    path = tmp_path / "cs.txt"
    ex.write_cs_contexts(path, samples)
    back = ex.read_cs_contexts(path)
    assert [(s.label, s.contexts) for s in back] == [(s.label, s.contexts) for s in samples]


def test_cc_contexts_roundtrip(tmp_path):
    tokens = ex.tokenize_java('x = helper(y, "a b");')
    samples = ex.extract_cbow_samples(tokens, window=2)
    path = tmp_path / "cc.txt"
    ex.write_cc_contexts(path, samples)
    back = ex.read_cc_contexts(path)
    assert [(s.target, s.context) for s in back] == [(s.target, s.context) for s in samples]


def test_cs_contexts_bad_line(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("label left,only\n", encoding="utf-8")
    with pytest.raises(ex.ContextFormatError):
        ex.read_cs_contexts(path)
