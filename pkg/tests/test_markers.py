import json
import random

import pytest

from crossweave.errors import MarkerError
from crossweave.markers import (
    AnnotatedSentence,
    EntitySpan,
    RelationEdge,
    extract_markers,
    insert_markers,
    mark_file,
    project_labels,
    read_annotations,
    sentence_from_dict,
    sentence_to_dict,
    strip_markers,
    unmark_file,
    write_annotations,
)

SOURCE_TEXT = "After taking Metoclopramide, she developed dyskinesia and a period of unresponsiveness."


def source_sentence():
    drug = SOURCE_TEXT.index("Metoclopramide")
    disorder = SOURCE_TEXT.index("dyskinesia")
    return AnnotatedSentence(
        SOURCE_TEXT,
        (
            EntitySpan(drug, drug + len("Metoclopramide"), "drug"),
            EntitySpan(disorder, disorder + len("dyskinesia"), "disorder"),
        ),
        (RelationEdge(0, 1, "causes"),),
    )


def test_insert_wraps_by_start_order():
    marked = insert_markers(source_sentence())
    assert "<1>Metoclopramide</1>" in marked
    assert "<2>dyskinesia</2>" in marked
    assert marked.index("<1>") < marked.index("<2>")
    assert strip_markers(marked) == SOURCE_TEXT


def test_extract_translated_sentence():
    translated = "服用<1>甲氧氯普胺</1>后，她出现了<2>运动障碍</2>和一段时间的无反应。"
    clean, spans = extract_markers(translated, expected_count=2)
    assert clean == "服用甲氧氯普胺后，她出现了运动障碍和一段时间的无反应。"
    assert clean[spans[0][0]:spans[0][1]] == "甲氧氯普胺"
    assert clean[spans[1][0]:spans[1][1]] == "运动障碍"


def test_project_labels_after_translation():
    translated = "服用<1>甲氧氯普胺</1>后，她出现了<2>运动障碍</2>和一段时间的无反应。"
    ported = project_labels(source_sentence(), extract_markers(translated, 2))
    assert [e.label for e in ported.entities] == ["drug", "disorder"]
    assert ported.relations == (RelationEdge(0, 1, "causes"),)
    e0, e1 = ported.entities
    assert ported.text[e0.start:e0.end] == "甲氧氯普胺"
    assert ported.text[e1.start:e1.end] == "运动障碍"


def test_reordered_markers_keep_identity():
    # the translation moved entity 2 in front of entity 1
    translated = "<2>运动障碍</2>出现在服用<1>甲氧氯普胺</1>之后。"
    clean, spans = extract_markers(translated, 2)
    assert clean[spans[0][0]:spans[0][1]] == "甲氧氯普胺"
    assert clean[spans[1][0]:spans[1][1]] == "运动障碍"


def test_identity_round_trip():
    sentence = source_sentence()
    clean, spans = extract_markers(insert_markers(sentence), len(sentence.entities))
    assert clean == sentence.text
    assert spans == tuple((e.start, e.end) for e in sentence.entities)


def test_no_entities_passes_through():
    sentence = AnnotatedSentence("nothing to mark", (), ())
    assert insert_markers(sentence) == "nothing to mark"
    assert extract_markers("nada que marcar", 0) == ("nada que marcar", ())


def test_shuffled_units_survive_extraction():
    words = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel"]
    text = " ".join(words)
    spans = []
    pos = 0
    for i, w in enumerate(words):
        if i % 2 == 1:
            spans.append(EntitySpan(pos, pos + len(w), f"label{i}"))
        pos += len(w) + 1
    sentence = AnnotatedSentence(text, tuple(spans), ())
    surfaces = {k: text[e.start:e.end] for k, e in enumerate(spans, start=1)}
    units = [f"<{k}>{s}</{k}>" for k, s in surfaces.items()]
    fillers = ["xx", "yy", "zz", "ww"]
    rng = random.Random(13)
    for _ in range(50):
        pieces = units + fillers
        rng.shuffle(pieces)
        translated = " ".join(pieces)
        clean, extracted = extract_markers(translated, len(units))
        assert len(extracted) == len(units)
        for k, (s, e) in enumerate(extracted, start=1):
            assert clean[s:e] == surfaces[k]


@pytest.mark.parametrize(
    "translated,expected,message,ordinal",
    [
        ("solo <1>uno</1> aqui", 2, "missing marker 2", 2),
        ("<1>a</1> y <1>b</1>", 1, "duplicate marker 1", 1),
        ("texto <3>raro</3>", 2, "unexpected marker 3", 3),
        ("<1>a</2> y <2>b</2>", 2, "mismatched closing marker 2", 2),
        ("abierto <1>sin fin", 1, "unclosed marker 1", 1),
        ("<1>a <2>b</2> c</1>", 2, "marker 2 opened inside marker 1", 2),
        ("cierre </1> suelto", 1, "mismatched closing marker 1", 1),
    ],
)
def test_malformed_translations(translated, expected, message, ordinal):
    with pytest.raises(MarkerError) as exc_info:
        extract_markers(translated, expected)
    assert message in str(exc_info.value)
    assert exc_info.value.ordinal == ordinal


def test_insert_rejects_marker_like_source():
    sentence = AnnotatedSentence("already has <1> inside", (EntitySpan(0, 7, "x"),), ())
    with pytest.raises(MarkerError, match="marker-like"):
        insert_markers(sentence)


def test_insert_rejects_overlapping_spans():
    sentence = AnnotatedSentence(
        "overlap here", (EntitySpan(0, 7, "a"), EntitySpan(4, 11, "b")), ()
    )
    with pytest.raises(MarkerError, match="overlapping"):
        insert_markers(sentence)


def test_insert_rejects_out_of_range_relation():
    sentence = AnnotatedSentence("one word", (EntitySpan(0, 3, "a"),), (RelationEdge(0, 5, "r"),))
    with pytest.raises(MarkerError, match="out of range"):
        insert_markers(sentence)


def test_project_rejects_span_count_mismatch():
    with pytest.raises(MarkerError, match="2 source entities"):
        project_labels(source_sentence(), ("texto", ((0, 3),)))


def test_sentence_dict_round_trip():
    sentence = source_sentence()
    record = sentence_to_dict("s1", sentence)
    assert record["id"] == "s1"
    assert sentence_from_dict(json.loads(json.dumps(record, ensure_ascii=False))) == ("s1", sentence)


def make_corpus():
    rows = []
    for i in range(5):
        text = f"sentence {i} mentions aspirin and also fever today"
        a = text.index("aspirin")
        b = text.index("fever")
        rows.append((
            f"s{i}",
            AnnotatedSentence(
                text,
                (EntitySpan(a, a + 7, "drug"), EntitySpan(b, b + 5, "symptom")),
                (RelationEdge(0, 1, "treats"),),
            ),
        ))
    return rows


def test_mark_file_writes_lines_and_ids(tmp_path):
    write_annotations(tmp_path / "gold.jsonl", make_corpus())
    count = mark_file(tmp_path / "gold.jsonl", tmp_path / "marked.txt", tmp_path / "ids.txt")
    assert count == 5
    marked_lines = (tmp_path / "marked.txt").read_text(encoding="utf-8").splitlines()
    assert len(marked_lines) == 5
    assert all("<1>aspirin</1>" in line for line in marked_lines)
    assert (tmp_path / "ids.txt").read_text(encoding="utf-8").splitlines() == [f"s{i}" for i in range(5)]


def test_mark_file_names_defective_sentence(tmp_path):
    rows = make_corpus()
    rows.append(("bad1", AnnotatedSentence("short", (EntitySpan(0, 99, "x"),), ())))
    write_annotations(tmp_path / "gold.jsonl", rows)
    with pytest.raises(MarkerError, match="bad1"):
        mark_file(tmp_path / "gold.jsonl", tmp_path / "marked.txt", tmp_path / "ids.txt")


def test_mark_file_rejects_newline_in_text(tmp_path):
    rows = [("nl", AnnotatedSentence("two\nlines", (EntitySpan(0, 3, "x"),), ()))]
    write_annotations(tmp_path / "gold.jsonl", rows)
    with pytest.raises(MarkerError, match="newline"):
        mark_file(tmp_path / "gold.jsonl", tmp_path / "marked.txt", tmp_path / "ids.txt")


def test_unmark_file_recovers_and_quarantines(tmp_path):
    write_annotations(tmp_path / "gold.jsonl", make_corpus())
    mark_file(tmp_path / "gold.jsonl", tmp_path / "marked.txt", tmp_path / "ids.txt")
    translations = []
    for i, line in enumerate((tmp_path / "marked.txt").read_text(encoding="utf-8").splitlines()):
        if i == 1:
            line = line.replace("<2>", "").replace("</2>", "")  # translator dropped a marker
        if i == 3:
            line = line + " <1>extra</1>"  # translator duplicated one
        translations.append(line)
    (tmp_path / "translated.txt").write_text("\n".join(translations) + "\n", encoding="utf-8")
    recovered, quarantined = unmark_file(
        tmp_path / "translated.txt", tmp_path / "ids.txt", tmp_path / "gold.jsonl",
        tmp_path / "ported.jsonl", tmp_path / "quarantine.jsonl",
    )
    assert (recovered, quarantined) == (3, 2)
    ported = read_annotations(tmp_path / "ported.jsonl")
    assert [sid for sid, _ in ported] == ["s0", "s2", "s4"]
    for _, sentence in ported:
        assert sentence.text.count("aspirin") == 1
        assert "<" not in sentence.text
    rows = [json.loads(line) for line in (tmp_path / "quarantine.jsonl").read_text(encoding="utf-8").splitlines()]
    assert [(r["id"]) for r in rows] == ["s1", "s3"]
    assert "missing marker 2" in rows[0]["error"]
    assert "duplicate marker 1" in rows[1]["error"]


def test_unmark_file_line_count_mismatch(tmp_path):
    write_annotations(tmp_path / "gold.jsonl", make_corpus())
    mark_file(tmp_path / "gold.jsonl", tmp_path / "marked.txt", tmp_path / "ids.txt")
    (tmp_path / "translated.txt").write_text("only one line\n", encoding="utf-8")
    with pytest.raises(MarkerError, match="line count mismatch"):
        unmark_file(
            tmp_path / "translated.txt", tmp_path / "ids.txt", tmp_path / "gold.jsonl",
            tmp_path / "ported.jsonl", tmp_path / "quarantine.jsonl",
        )
