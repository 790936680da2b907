import json

import numpy as np
import pytest

from docrec.errors import ConfigurationError, FontError, FormatError, GenerationError
from docrec.layout import build_graph, loer, parse_layout
from docrec.syndoc import (
    DEFAULT_FONTS,
    OPS,
    BitmapFont,
    EntityStyle,
    FontSet,
    LineCorpus,
    StyleSheet,
    augment,
    change_resolution,
    crop_under_lowest,
    dilate_ink,
    erode_ink,
    generate_document,
    generate_line,
    read_pgm,
    read_stylesheet,
    render_line,
    rimes_stylesheet,
    write_image,
    write_pgm,
)
from docrec.syndoc.font import INK, PAPER
from docrec.syndoc.generate import LINE_BREAK

READ_SHEET = read_stylesheet()
READ_CORPUS = LineCorpus.builtin(READ_SHEET, seed=0)


# -- fonts and lines ---------------------------------------------------------------


def test_empty_line_is_a_blank_canvas():
    img = render_line("", DEFAULT_FONTS[0], 1)
    assert img.shape == (11 + 4, 4) and np.all(img == PAPER)


def test_line_rendering_is_deterministic():
    a = render_line("Hello, world", DEFAULT_FONTS[1], 2, rng=3)
    b = render_line("Hello, world", DEFAULT_FONTS[1], 2, rng=3)
    assert a.tobytes() == b.tobytes()


@pytest.mark.parametrize("font", DEFAULT_FONTS, ids=lambda f: f.name)
@pytest.mark.parametrize("size", [1, 2, 3])
def test_every_font_inks_text(font, size):
    img, text = generate_line("Abc 123 éà", font, size, rng=0)
    assert text == "Abc 123 éà"
    assert (img == INK).sum() > 0
    assert img.shape[0] == 11 * size + 4


def test_bold_has_more_ink_and_wide_is_wider():
    plain = render_line("word", BitmapFont("m"), 1, max_jitter=0)
    bold = render_line("word", BitmapFont("b", bold=True), 1, max_jitter=0)
    wide = render_line("word", BitmapFont("w", width_factor=2), 1, max_jitter=0)
    assert (bold == INK).sum() > (plain == INK).sum()
    assert wide.shape[1] - 4 == 2 * (plain.shape[1] - 4)


def test_unsupported_character_raises():
    with pytest.raises(FontError):
        render_line("日本", DEFAULT_FONTS[0], 1)
    assert FontSet().supporting("日") == []


def test_font_set_validation():
    with pytest.raises(FontError):
        FontSet(fonts=())
    with pytest.raises(FontError):
        FontSet(sizes=(2, 1))


# -- style sheets and corpora --------------------------------------------------------


def test_stylesheet_json_round_trip(tmp_path):
    for sheet in (READ_SHEET, rimes_stylesheet()):
        path = tmp_path / "s.json"
        path.write_text(json.dumps(sheet.to_json()))
        assert StyleSheet.load(path).to_json() == sheet.to_json()
    assert StyleSheet.load("builtin:rimes").to_json() == rimes_stylesheet().to_json()


def test_stylesheet_validation(tmp_path):
    with pytest.raises(ConfigurationError):
        EntityStyle("X", x_range=(0.5, 0.2))
    with pytest.raises(ConfigurationError):
        StyleSheet(READ_SHEET.schema, READ_SHEET.entities[:-1])
    path = tmp_path / "bad.json"
    path.write_text("[")
    with pytest.raises(FormatError):
        StyleSheet.load(path)


def test_corpus_from_jsonl_and_coverage(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text("\n".join(json.dumps({"text": t, "class": c}) for t, c in [("hello", "B"), ("7", "N")]))
    corpus = LineCorpus.from_jsonl(path)
    assert corpus.lines("B") == ("hello",)
    with pytest.raises(ConfigurationError):
        corpus.check_covers(["A"])
    with pytest.raises(ConfigurationError):
        generate_document(None, 5, READ_SHEET, corpus, rng=0)


# -- documents ---------------------------------------------------------------------


def test_single_line_curriculum():
    for seed in range(20):
        doc = generate_document(None, 1, READ_SHEET, READ_CORPUS, rng=seed)
        assert doc.line_count == 1
        leaves = [p for p in doc.placements if not READ_SHEET.is_container(p.name)]
        assert len(leaves) == 1 and leaves[0].n_lines == 1


@pytest.mark.parametrize("sheet", [READ_SHEET, rimes_stylesheet()], ids=["read", "rimes"])
def test_generated_documents_are_self_consistent(sheet):
    corpus = LineCorpus.builtin(sheet, seed=1)
    for seed in range(40):
        doc = generate_document(None, 30, sheet, corpus, rng=seed)
        res = parse_layout(doc.gt_tokens.tokens, sheet.schema)
        assert res.ok
        assert res.graph.key() == doc.gt_graph.key()
        assert loer([(doc.gt_graph, doc.gt_graph)]) == 0.0
        assert 1 <= doc.line_count <= 30
        assert doc.gt_tokens.tokens.count(LINE_BREAK) == doc.line_count - sum(
            1 for p in doc.placements if not sheet.is_container(p.name)
        )


def test_line_counts_cover_the_curriculum_range():
    small = READ_SHEET.with_template((1200, 900))
    for l in (3, 10):
        seen = set()
        for seed in range(10_000 if l == 10 else 500):
            seen.add(generate_document(None, l, small, READ_CORPUS, rng=seed).line_count)
            if len(seen) == l:
                break
        assert seen == set(range(1, l + 1))


def test_generation_is_deterministic():
    a = generate_document(None, 12, READ_SHEET, READ_CORPUS, rng=99)
    b = generate_document(None, 12, READ_SHEET, READ_CORPUS, rng=99)
    assert a.image.tobytes() == b.image.tobytes()
    assert a.gt_tokens.tokens == b.gt_tokens.tokens


def test_reading_order_follows_placements():
    for seed in range(30):
        doc = generate_document(None, 20, READ_SHEET, READ_CORPUS, rng=seed)
        begins = [READ_SHEET.schema.token_kind(t)[1] for t in doc.gt_tokens.tokens
                  if (READ_SHEET.schema.token_kind(t) or ("", ""))[0] == "begin"]
        assert begins == [p.name for p in doc.placements]
        leaves = [p for p in doc.placements if not READ_SHEET.is_container(p.name)]
        # a later entity never starts above an earlier one it overlaps horizontally
        for i, a in enumerate(leaves):
            for b in leaves[i + 1:]:
                if a.box[0] < b.box[2] and b.box[0] < a.box[2]:
                    assert b.box[1] >= a.box[3]


@pytest.mark.parametrize("seed", range(10))
def test_text_lies_inside_entity_boxes(seed):
    doc = generate_document(None, 30, READ_SHEET, READ_CORPUS, rng=seed)
    mask = np.zeros(doc.image.shape, bool)
    for p in doc.placements:
        x0, y0, x1, y1 = p.box
        mask[y0:y1, x0:x1] = True
    assert not np.any((doc.image < PAPER) & ~mask)


def test_image_is_cropped_under_lowest_entity():
    doc = generate_document(None, 5, READ_SHEET, READ_CORPUS, rng=8)
    bottom = max(p.box[3] for p in doc.placements)
    assert doc.image.shape == (bottom + READ_SHEET.crop_margin, READ_SHEET.template[1])


def test_bad_curriculum_and_tiny_template():
    with pytest.raises(ConfigurationError):
        generate_document(None, 0, READ_SHEET, READ_CORPUS, rng=0)
    with pytest.raises(ConfigurationError):
        generate_document(None, 31, READ_SHEET, READ_CORPUS, rng=0)
    with pytest.raises(GenerationError):
        generate_document((90, 600), 3, READ_SHEET, READ_CORPUS, rng=0)


# -- cropping and augmentation -------------------------------------------------------


def test_crop_examples(rng):
    img = rng.integers(0, 256, size=(1000, 30), dtype=np.uint8)
    assert crop_under_lowest(img, [(0, 50)], margin=10).shape == (60, 30)
    full = crop_under_lowest(img, [(0, 0, 30, 1000)], margin=16)
    assert full.tobytes() == img.tobytes()
    kept = crop_under_lowest(img, [(3, 10, 9, 400), (0, 200)], margin=5)
    assert kept.tobytes() == img[:405].tobytes()
    with pytest.raises(ValueError):
        crop_under_lowest(img, [])


def solid_rectangle():
    img = np.full((40, 40), PAPER, np.uint8)
    img[10:30, 15:25] = INK
    return img


def test_empty_op_set_is_identity(rng):
    img = solid_rectangle()
    assert augment(img, ops=(), rng=rng).tobytes() == img.tobytes()
    assert augment(img, rng=rng, prob=0.0).tobytes() == img.tobytes()


def test_morphology_containment():
    img = solid_rectangle()
    ink = img == INK
    thick = dilate_ink(img) == INK
    thin = erode_ink(img) == INK
    assert np.all(thick[ink]) and thick.sum() > ink.sum()
    assert np.all(ink[thin]) and thin.sum() < ink.sum()


def laplacian_energy(img):
    from scipy import ndimage

    return float(np.sum(ndimage.laplace(img.astype(np.float64)) ** 2))


def test_resolution_change_blurs_and_keeps_shape():
    img = render_line("Sharp strokes here", DEFAULT_FONTS[0], 2, rng=0)
    blurred = change_resolution(img, 2.0)
    assert blurred.shape == img.shape and blurred.dtype == np.uint8
    assert laplacian_energy(blurred) < laplacian_energy(img)


@pytest.mark.parametrize("op", OPS)
def test_each_op_keeps_shape_and_dtype(op, rng):
    img = solid_rectangle()
    out = augment(img, ops=(op,), rng=rng, prob=1.0)
    assert out.shape == img.shape and out.dtype == np.uint8


def test_unknown_op_is_rejected(rng):
    with pytest.raises(ValueError):
        augment(solid_rectangle(), ops=("sharpen",), rng=rng)


# -- image files -------------------------------------------------------------------


def test_pgm_round_trip(tmp_path, rng):
    img = rng.integers(0, 256, size=(17, 23), dtype=np.uint8)
    write_pgm(tmp_path / "a.pgm", img)
    assert read_pgm(tmp_path / "a.pgm").tobytes() == img.tobytes()
    write_image(tmp_path / "a.png", img)
    from PIL import Image

    assert np.array_equal(np.asarray(Image.open(tmp_path / "a.png")), img)


def test_bad_pgm_is_rejected(tmp_path):
    (tmp_path / "b.pgm").write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
    with pytest.raises(FormatError):
        read_pgm(tmp_path / "b.pgm")
