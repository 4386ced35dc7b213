#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "glyphforge/error.hpp"
#include "glyphforge/label_store.hpp"
#include "glyphforge/layout.hpp"
#include "glyphforge/metrics.hpp"
#include "glyphforge/nn/checkpoint.hpp"
#include "glyphforge/nn/gradcheck.hpp"
#include "glyphforge/ocr.hpp"
#include "glyphforge/segmenter.hpp"
#include "glyphforge/synth.hpp"
#include "glyphforge/workbench.hpp"

namespace py = pybind11;
using namespace glyphforge;

namespace {

using PageArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

PageArray to_array(const BinaryRaster& r) {
  PageArray out({r.height(), r.width()});
  auto bits = r.bits();
  std::copy(bits.begin(), bits.end(), out.mutable_data());
  return out;
}

// Any nonzero pixel is ink.
BinaryRaster from_array(const PageArray& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::InvalidArgument, "page must be a 2-D array");
  const int h = static_cast<int>(a.shape(0));
  const int w = static_cast<int>(a.shape(1));
  BinaryRaster r(w, h);
  const auto* p = a.data();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) r.set(x, y, p[static_cast<std::size_t>(y) * w + x] != 0);
  return r;
}

py::dict record_dict(const LabelRecord& r) {
  py::dict d;
  d["id"] = r.id;
  d["page"] = r.page_id;
  d["box"] = r.box;
  d["letter"] = std::string(1, r.letter);
  d["hash"] = r.hash;
  d["ts"] = r.ts;
  d["who"] = r.who;
  return d;
}

class Recognizer {
 public:
  explicit Recognizer(const std::filesystem::path& checkpoint) : model_(nn::load_checkpoint(checkpoint).model) {}

  py::dict recognize(const PageArray& page) const {
    const auto result = recognize_page(from_array(page), model_, SegmenterConfig{}, LayoutConfig{});
    py::list anns;
    for (const auto& a : result.annotations) {
      py::dict d;
      d["index"] = a.index;
      d["box"] = a.box;
      d["letter"] = std::string(1, a.letter);
      d["confidence"] = a.confidence;
      anns.append(d);
    }
    py::dict out;
    out["text"] = result.text;
    out["annotations"] = anns;
    return out;
  }

 private:
  nn::Model model_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Handwriting segmentation, recognition and screening";

  static py::exception<Error> error_type(m, "GlyphforgeError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<BoundingBox>(m, "BoundingBox")
      .def(py::init<>())
      .def(py::init([](int x0, int y0, int x1, int y1) { return BoundingBox{x0, y0, x1, y1}; }), py::arg("x_min"),
           py::arg("y_min"), py::arg("x_max"), py::arg("y_max"))
      .def_readwrite("x_min", &BoundingBox::x_min)
      .def_readwrite("y_min", &BoundingBox::y_min)
      .def_readwrite("x_max", &BoundingBox::x_max)
      .def_readwrite("y_max", &BoundingBox::y_max)
      .def_property_readonly("width", &BoundingBox::width)
      .def_property_readonly("height", &BoundingBox::height)
      .def("as_tuple", [](const BoundingBox& b) { return py::make_tuple(b.x_min, b.y_min, b.x_max, b.y_max); })
      .def("__eq__", [](const BoundingBox& a, const BoundingBox& b) { return a == b; })
      .def("__repr__", [](const BoundingBox& b) {
        return "BoundingBox(" + std::to_string(b.x_min) + ", " + std::to_string(b.y_min) + ", " +
               std::to_string(b.x_max) + ", " + std::to_string(b.y_max) + ")";
      });

  py::class_<SyntheticSpec>(m, "SyntheticSpec")
      .def(py::init<>())
      .def_readwrite("scale", &SyntheticSpec::scale)
      .def_readwrite("scale_noise", &SyntheticSpec::scale_noise)
      .def_readwrite("jitter_x", &SyntheticSpec::jitter_x)
      .def_readwrite("jitter_y", &SyntheticSpec::jitter_y)
      .def_readwrite("letter_gap", &SyntheticSpec::letter_gap)
      .def_readwrite("word_gap", &SyntheticSpec::word_gap)
      .def_readwrite("line_pitch", &SyntheticSpec::line_pitch)
      .def_readwrite("fuse_probability", &SyntheticSpec::fuse_probability)
      .def_readwrite("dot_offset", &SyntheticSpec::dot_offset)
      .def_readwrite("margin", &SyntheticSpec::margin)
      .def_readwrite("lines", &SyntheticSpec::lines)
      .def_readwrite("words_per_line", &SyntheticSpec::words_per_line)
      .def_readwrite("text", &SyntheticSpec::text);

  m.def(
      "render_page",
      [](const SyntheticSpec& spec, std::uint64_t seed) {
        Rng rng(seed);
        const auto page = render_page(spec, rng);
        py::list glyphs;
        for (const auto& g : page.glyphs) glyphs.append(py::make_tuple(g.box, std::string(1, g.ch)));
        py::dict out;
        out["page"] = to_array(page.page);
        out["text"] = page.text;
        out["glyphs"] = glyphs;
        return out;
      },
      py::arg("spec"), py::arg("seed") = 0, "Synthetic page: {page (0/1 array), text, glyphs [(box, char)]}");

  m.def(
      "load_page",
      [](const std::filesystem::path& path, int threshold, bool ink_is_light) {
        if (threshold < 0 || threshold > 255) throw Error(ErrorCode::InvalidArgument, "threshold must be 0..255");
        return to_array(load_page(path, {static_cast<std::uint8_t>(threshold), ink_is_light}));
      },
      py::arg("path"), py::arg("threshold") = 128, py::arg("ink_is_light") = false, "Binarized page, 1 = ink");

  m.def(
      "segment", [](const PageArray& page) { return segment_boxes(from_array(page), SegmenterConfig{}); },
      py::arg("page"), "Character boxes of a binary page");

  m.def(
      "normalize",
      [](const PageArray& page, const BoundingBox& box) {
        return to_array(normalize_glyph(from_array(page), box, SegmenterConfig{}).image);
      },
      py::arg("page"), py::arg("box"));

  m.def(
      "linearize",
      [](const std::vector<BoundingBox>& boxes) {
        py::list out;
        for (const auto& t : linearize(boxes, LayoutConfig{})) {
          if (t.kind == Token::Kind::Glyph) {
            out.append(t.index);
          } else {
            out.append(t.kind == Token::Kind::Space ? " " : "\n");
          }
        }
        return out;
      },
      py::arg("boxes"), "Reading order: box indices interleaved with ' ' and '\\n'");

  m.def(
      "auc", [](const std::vector<double>& s, const std::vector<int>& y) { return auc(s, y); }, py::arg("scores"),
      py::arg("labels"));
  m.def(
      "binary_metrics",
      [](const std::vector<double>& s, const std::vector<int>& y) {
        const auto bm = binary_metrics(s, y);
        auto opt = [](bool defined, double v) { return defined ? py::object(py::float_(v)) : py::object(py::none()); };
        py::dict d;
        d["loss"] = bm.loss;
        d["accuracy"] = bm.accuracy;
        d["precision"] = opt(bm.precision_defined, bm.precision);
        d["recall"] = opt(bm.recall_defined, bm.recall);
        d["auc"] = opt(bm.auc_defined, bm.auc);
        d["tp"] = bm.confusion.tp;
        d["fp"] = bm.confusion.fp;
        d["tn"] = bm.confusion.tn;
        d["fn"] = bm.confusion.fn;
        return d;
      },
      py::arg("scores"), py::arg("labels"));
  m.def("levenshtein", [](const std::string& a, const std::string& b) { return levenshtein(a, b); });
  m.def("char_accuracy", [](const std::string& ref, const std::string& hyp) { return char_accuracy(ref, hyp); },
        py::arg("reference"), py::arg("hypothesis"));

  m.def("grad_check_toy_charnet", [](std::uint64_t seed) {
    const auto r = nn::grad_check(nn::toy_charnet(), seed);
    py::dict d;
    d["max_relative_error"] = r.max_relative_error;
    d["passed"] = r.passed;
    d["checked"] = r.checked;
    return d;
  }, py::arg("seed") = 2024);

  py::class_<Recognizer>(m, "Recognizer")
      .def(py::init<const std::filesystem::path&>(), py::arg("checkpoint"))
      .def("recognize", &Recognizer::recognize, py::arg("page"));

  py::class_<LabelStore>(m, "LabelStore")
      .def(py::init([](const std::filesystem::path& p) { return std::make_unique<LabelStore>(p); }), py::arg("path"))
      .def(
          "append",
          [](LabelStore& s, const std::string& page, const BoundingBox& box, const std::string& letter,
             const std::string& hash, const std::string& who) {
            if (letter.size() != 1) throw Error(ErrorCode::InvalidLetter, "letter must be a single character a-z");
            LabelRecord r;
            r.page_id = page;
            r.box = box;
            r.letter = letter[0];
            r.hash = hash;
            r.who = who;
            return record_dict(s.append(r));
          },
          py::arg("page"), py::arg("box"), py::arg("letter"), py::arg("hash") = "", py::arg("who") = "python")
      .def("records",
           [](const LabelStore& s) {
             py::list out;
             for (const auto& r : s.records()) out.append(record_dict(r));
             return out;
           })
      .def("__len__", &LabelStore::size);
}
