import math

import pytest

from figchain.errors import MalformedXml, UnsupportedFeature
from figchain.geometry import Affine, parse_transform
from figchain.pathdata import parse_path, path_bbox
from figchain.svgdoc import load_figure, parse_figure, serialize_figure

from conftest import panel_svg
from oracles import sampled_path_bbox


def test_minimal_rect_document():
    doc = parse_figure(b'<svg width="10" height="5"><rect x="0" y="0" width="4" height="5"/></svg>')
    assert doc.width == 10 and doc.height == 5
    assert len(doc.root.children) == 1
    rect = doc.root.children[0]
    assert rect.tag == "rect" and rect.path == "/0"
    assert (rect.geometry.bbox.x0, rect.geometry.bbox.y0) == (0, 0)
    assert (rect.geometry.bbox.x1, rect.geometry.bbox.y1) == (4, 5)


def test_round_trip_identity_on_panel():
    original = parse_figure(panel_svg())
    once = parse_figure(serialize_figure(original))
    twice = parse_figure(serialize_figure(once))
    assert once.root.content_equal(original.root)
    assert twice.root.content_equal(once.root)
    # element count and attribute multiset unchanged
    def attr_multiset(doc):
        return sorted(
            (el.tag, name, value)
            for el in doc.iter_elements()
            for name, value in el.attributes.items()
        )
    assert attr_multiset(once) == attr_multiset(original)
    assert sum(1 for _ in once.iter_elements()) == sum(1 for _ in original.iter_elements())


def test_paths_are_stable_document_order_chains():
    doc = parse_figure(panel_svg())
    paths = [el.path for el in doc.iter_elements()]
    assert paths[0] == "/"
    assert len(paths) == len(set(paths))
    for el in doc.iter_elements():
        for idx, child in enumerate(el.children):
            prefix = "" if el.path == "/" else el.path
            assert child.path == f"{prefix}/{idx}"


def test_polyline_path_bbox_matches_attributes():
    segments = parse_path("M0 0 L10 0 L10 10")
    box = path_bbox(segments)
    assert (box.x0, box.y0, box.x1, box.y1) == (0, 0, 10, 10)


@pytest.mark.parametrize(
    "d",
    [
        "M0 0 L10 0 L10 10",
        "M10 20 C 30 -10, 60 40, 80 20",
        "M5 5 Q 40 60 80 10",
        "M0 0 C 10 40 30 40 40 0 S 70 -40 80 0",
        "M 20 20 A 25 15 30 0 1 70 45",
        "M 20 20 a 25 15 0 1 0 30 10 z",
        "M0 0 H40 V30 h-15 v-10 L0 0 M50 50 l5 8 T 70 70",
    ],
)
def test_path_bbox_matches_dense_sampling(d):
    segments = parse_path(d)
    box = path_bbox(segments)
    sx0, sy0, sx1, sy1 = sampled_path_bbox(segments, samples_per_segment=20000)
    assert box.x0 <= sx0 + 1e-9 and box.y0 <= sy0 + 1e-9
    assert box.x1 >= sx1 - 1e-9 and box.y1 >= sy1 - 1e-9
    assert abs(box.x0 - sx0) < 1e-6 and abs(box.y0 - sy0) < 1e-6
    assert abs(box.x1 - sx1) < 1e-6 and abs(box.y1 - sy1) < 1e-6


def test_path_bbox_under_rotation_matches_sampling():
    segments = parse_path("M10 20 C 30 -10, 60 40, 80 20 A 10 6 20 1 0 40 40")
    t = parse_transform("rotate(25 40 20) scale(1.5 0.75)")
    box = path_bbox(segments, t)

    class _T:
        def __init__(self, seg, t):
            self.seg, self.t = seg, t
        def point(self, s):
            return self.t.apply(*self.seg.point(s))

    sx0, sy0, sx1, sy1 = sampled_path_bbox([_T(s, t) for s in segments], 20000)
    assert abs(box.x0 - sx0) < 1e-6 and abs(box.y0 - sy0) < 1e-6
    assert abs(box.x1 - sx1) < 1e-6 and abs(box.y1 - sy1) < 1e-6


def test_transform_parsing_composes():
    t = parse_transform("translate(10,20) scale(2)")
    assert t.apply(1, 1) == (12, 22)
    r = parse_transform("rotate(90)")
    x, y = r.apply(1, 0)
    assert abs(x) < 1e-12 and abs(y - 1) < 1e-12


def test_group_bbox_unions_children_with_transform():
    doc = parse_figure(
        b'<svg width="100" height="100">'
        b'<g transform="translate(10,5)">'
        b'<rect x="0" y="0" width="10" height="10"/>'
        b'<circle cx="30" cy="10" r="5"/>'
        b"</g></svg>"
    )
    g = doc.root.children[0]
    assert g.geometry.bbox.x0 == 10 and g.geometry.bbox.y0 == 5
    assert g.geometry.bbox.x1 == 45 and g.geometry.bbox.y1 == 20


def test_use_resolves_internal_reference():
    doc = parse_figure(
        b'<svg width="100" height="100">'
        b'<defs><rect id="proto" x="0" y="0" width="4" height="6"/></defs>'
        b'<use href="#proto" x="20" y="30"/>'
        b"</svg>"
    )
    use = doc.root.children[1]
    assert use.geometry.bbox.x0 == 20 and use.geometry.bbox.y1 == 36
    # defs content does not leak into the root bbox
    assert doc.root.geometry.bbox.x0 == 20


def test_malformed_xml_rejected():
    with pytest.raises(MalformedXml):
        parse_figure(b"<svg width='5' height='5'><rect</svg>")
    with pytest.raises(MalformedXml):
        parse_figure(b"<div width='5' height='5'/>")
    with pytest.raises(MalformedXml):
        parse_figure(b"<svg><rect/></svg>")  # no dimensions anywhere


def test_unsupported_features_are_loud_with_paths():
    with pytest.raises(UnsupportedFeature) as exc:
        parse_figure(b'<svg width="5" height="5"><image href="http://x/y.png"/></svg>')
    assert "/0" in str(exc.value)
    with pytest.raises(UnsupportedFeature):
        parse_figure(b'<svg width="5" height="5"><style>rect{fill:red}</style></svg>')
    with pytest.raises(UnsupportedFeature):
        parse_figure(b'<svg width="5" height="5"><use href="http://elsewhere#x"/></svg>')


def test_percentage_lengths_rejected():
    with pytest.raises(UnsupportedFeature):
        parse_figure(b'<svg width="100%" height="5"/>')


def test_viewbox_supplies_missing_dimensions():
    doc = parse_figure(b'<svg viewBox="0 0 120 80"><rect width="5" height="5"/></svg>')
    assert doc.width == 120 and doc.height == 80


def test_text_content_and_classes():
    doc = parse_figure(
        b'<svg width="10" height="10"><text id="t" class="big caps" x="1" y="2">Hi</text></svg>'
    )
    text = doc.root.children[0]
    assert text.text_content == "Hi"
    assert text.classes == frozenset({"big", "caps"})
    assert text.geometry.shape == {"x": 1.0, "y": 2.0}


MPL_LIKE = b"""<?xml version="1.0" encoding="utf-8" standalone="no"?>
<svg xmlns:xlink="http://www.w3.org/1999/xlink" width="288pt" height="216pt"
     viewBox="0 0 288 216" xmlns="http://www.w3.org/2000/svg" version="1.1">
 <metadata><rdf:RDF xmlns:dc="http://purl.org/dc/elements/1.1/"
   xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#">
  <rdf:Description><dc:type>Image</dc:type></rdf:Description>
 </rdf:RDF></metadata>
 <defs>
  <clipPath id="pane"><rect x="36" y="10" width="216" height="180"/></clipPath>
  <path id="glyph-a" d="M 2 0 L 4 -8 L 6 0 z"/>
 </defs>
 <g id="figure">
  <g id="axes" clip-path="url(#pane)">
   <path d="M 50 170 L 50 40 C 80 30 120 60 150 45" fill="none" stroke="#1f77b4"/>
   <g transform="translate(60 120) scale(0.1 -0.1)">
    <use xlink:href="#glyph-a"/>
    <use xlink:href="#glyph-a" x="8"/>
   </g>
  </g>
 </g>
</svg>
"""


def test_generator_style_figure_round_trips():
    doc = parse_figure(MPL_LIKE)
    assert doc.width == 288.0 and doc.height == 216.0
    once = parse_figure(serialize_figure(doc))
    assert once.root.content_equal(doc.root)
    twice = parse_figure(serialize_figure(once))
    assert twice.root.content_equal(once.root)
    metadata = doc.root.children[0]
    assert metadata.tag == "metadata" and "rdf:RDF" in metadata.text_content
    uses = [el for el in doc.iter_elements() if el.tag == "use"]
    assert all(el.geometry.bbox is not None for el in uses)


def test_css_stylesheets_error_loudly():
    with_style = MPL_LIKE.replace(
        b"<defs>", b'<defs>\n  <style type="text/css">*{stroke-linejoin:round}</style>'
    )
    with pytest.raises(UnsupportedFeature) as exc:
        parse_figure(with_style)
    assert "style" in str(exc.value)


def test_load_figure_records_source_path(tmp_path):
    p = tmp_path / "fig.svg"
    p.write_bytes(panel_svg())
    doc = load_figure(p)
    assert doc.source_path == str(p)


def test_determinism_identical_bytes_identical_model():
    raw = panel_svg()
    a = parse_figure(raw)
    b = parse_figure(raw)
    for ea, eb in zip(a.iter_elements(), b.iter_elements()):
        assert ea.path == eb.path and ea.attributes == eb.attributes
        if ea.geometry.bbox is not None:
            assert ea.geometry.bbox == eb.geometry.bbox
