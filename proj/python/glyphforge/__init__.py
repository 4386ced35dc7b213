"""Python bindings for the glyphforge handwriting toolkit."""

from ._core import (
    BoundingBox,
    GlyphforgeError,
    LabelStore,
    Recognizer,
    SyntheticSpec,
    auc,
    binary_metrics,
    char_accuracy,
    grad_check_toy_charnet,
    levenshtein,
    linearize,
    load_page,
    normalize,
    render_page,
    segment,
)

__version__ = "0.1.0"


def read_skeleton(page):
    """Reading order of a page with every glyph shown as 'x'."""
    boxes = segment(page)
    return "".join(t if isinstance(t, str) else "x" for t in linearize(boxes))
