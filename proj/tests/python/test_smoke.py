import os
import subprocess

import numpy as np
import pytest

import glyphforge as gf


def test_render_and_segment_roundtrip():
    spec = gf.SyntheticSpec()
    spec.text = ["mark bold", "sound"]
    page = gf.render_page(spec, seed=3)
    assert page["text"] == "mark bold\nsound"
    img = page["page"]
    assert img.dtype == np.uint8 and img.ndim == 2
    boxes = gf.segment(img)
    truth = [b for b, _ in page["glyphs"]]
    assert sorted(b.as_tuple() for b in boxes) == sorted(b.as_tuple() for b in truth)
    assert gf.read_skeleton(img) == "xxxx xxxx\nxxxxx"


def test_normalize_is_square():
    spec = gf.SyntheticSpec()
    spec.text = ["ab"]
    page = gf.render_page(spec, seed=1)
    box = page["glyphs"][0][0]
    glyph = gf.normalize(page["page"], box)
    assert glyph.shape == (40, 40)
    assert glyph.max() == 1


def test_metrics():
    assert gf.auc([0.9, 0.4, 0.6, 0.1], [1, 1, 0, 0]) == 0.75
    m = gf.binary_metrics([0.9, 0.2], [1, 1])
    assert m["tp"] == 1 and m["fn"] == 1 and m["auc"] is None
    assert gf.levenshtein("kitten", "sitting") == 3
    assert gf.char_accuracy("ab c", "abd") == pytest.approx(2 / 3)


def test_errors_carry_codes():
    with pytest.raises(gf.GlyphforgeError) as info:
        gf.auc([0.1, 0.2], [1, 1])
    assert info.value.code == "OneClassOnly"
    with pytest.raises(gf.GlyphforgeError) as info:
        gf.char_accuracy("", "a")
    assert info.value.code == "EmptyReference"


def test_grad_check():
    r = gf.grad_check_toy_charnet()
    assert r["passed"] and r["max_relative_error"] < 1e-4


def test_label_store_replays(tmp_path):
    path = tmp_path / "labels.jsonl"
    store = gf.LabelStore(path)
    rec = store.append("p1", gf.BoundingBox(1, 2, 3, 4), "q")
    assert rec["id"] == 1 and rec["letter"] == "q"
    with pytest.raises(gf.GlyphforgeError):
        store.append("p1", gf.BoundingBox(1, 2, 3, 4), "Q")
    del store
    again = gf.LabelStore(path)
    assert len(again) == 1
    assert again.records()[0]["box"] == gf.BoundingBox(1, 2, 3, 4)


@pytest.mark.skipif("GLYPHFORGE_CLI" not in os.environ, reason="CLI path not given")
def test_recognizer_with_cli_model(tmp_path):
    cli = os.environ["GLYPHFORGE_CLI"]
    subprocess.run([cli, "--seed", "5", "ocr-train", "--synthetic", "12", "--epochs", "3", "--out", str(tmp_path)],
                   check=True, capture_output=True)
    spec = gf.SyntheticSpec()
    spec.text = ["hello world"]
    page = gf.render_page(spec, seed=9)
    result = gf.Recognizer(tmp_path / "charnet.gfckpt").recognize(page["page"])
    assert [a["index"] for a in result["annotations"]] == list(range(1, 11))
    assert gf.char_accuracy("hello world", result["text"]) >= 0.5
