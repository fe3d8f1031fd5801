#include "sxcad/unify.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "sxcad/error.hpp"
#include "sxcad/geom.hpp"

namespace sxcad {

using nlohmann::json;

std::string_view to_string(CommandType t) {
  switch (t) {
    case CommandType::Sol: return "SOL";
    case CommandType::Line: return "Line";
    case CommandType::Arc: return "Arc";
    case CommandType::Circle: return "Circle";
    case CommandType::ExtrudeNew: return "ExtrudeNew";
    case CommandType::ExtrudeCut: return "ExtrudeCut";
  }
  return "SOL";
}

std::string_view to_string(FrameForm f) { return f == FrameForm::Normal ? "normal" : "euler"; }

SlotMask slot_mask(CommandType type) {
  SlotMask m{};
  switch (type) {
    case CommandType::Sol: break;
    case CommandType::Line: m[slot::kX] = m[slot::kY] = true; break;
    case CommandType::Arc: m[slot::kX] = m[slot::kY] = m[slot::kSweep] = m[slot::kCcw] = true; break;
    case CommandType::Circle: m[slot::kX] = m[slot::kY] = m[slot::kRadius] = true; break;
    case CommandType::ExtrudeNew:
    case CommandType::ExtrudeCut:
      for (std::size_t s = slot::kE1; s <= slot::kExtent; ++s) m[s] = true;
      break;
  }
  return m;
}

NormalizationBox NormalizationBox::fit(const CadProgram& program, double margin) {
  const LabeledMesh mesh = compile(program);
  Aabb box;
  for (const Vec3& v : mesh.vertices) box.expand(v);
  for (const Part& p : program.parts()) {
    for (const Block& b : p.blocks()) box.expand(b.extrude.origin());
  }
  if (box.empty()) throw GeometryError("program has no geometry");
  const Vec3 e = box.extent();
  const double half = 0.5 * std::max({e.x, e.y, e.z}) * (1.0 + margin);
  if (!(half > 0.0)) throw GeometryError("program geometry is degenerate");
  return {box.center(), half};
}

namespace {

constexpr double kRangeSlack = 1e-9;

double wrap_angle(double deg) {
  double a = std::fmod(deg, 360.0);
  if (a < 0.0) a += 360.0;
  if (a >= 360.0) a -= 360.0;
  return a;
}

class Encoder {
 public:
  explicit Encoder(const NormalizationBox& box) : box_(box) {
    if (!(box.half_extent > 0.0) || !std::isfinite(box.half_extent)) throw InvariantError("box half extent must be positive");
  }

  PartTokens part(const Part& p) {
    PartTokens out{p.label(), {}};
    for (const Block& b : p.blocks()) {
      const Frame f = frame_basis(b.extrude.frame(), b.extrude.origin());
      const Vec3 rel = box_.center - b.extrude.origin();
      const Vec2 plane_center{dot(rel, f.u), dot(rel, f.v)};
      loop(out.tokens, b.profile.outer(), plane_center);
      for (const Loop& cut : b.profile.cuts()) loop(out.tokens, cut, plane_center);
      out.tokens.push_back(extrude(b.extrude));
    }
    return out;
  }

 private:
  UnifiedParamVector token(CommandType type) {
    UnifiedParamVector v;
    v.type = type;
    v.mask = slot_mask(type);
    return v;
  }

  void set(UnifiedParamVector& v, std::size_t s, double value) {
    if (!(std::abs(value) <= 1.0 + kRangeSlack)) {
      throw InvariantError("normalization box too small: slot " + std::to_string(s) + " = " + std::to_string(value));
    }
    v.slots[s] = std::clamp(value, -1.0, 1.0);
  }

  void point(UnifiedParamVector& v, Vec2 p, Vec2 plane_center) {
    set(v, slot::kX, (p.x - plane_center.x) / box_.half_extent);
    set(v, slot::kY, (p.y - plane_center.y) / box_.half_extent);
  }

  void loop(std::vector<UnifiedParamVector>& out, const Loop& loop, Vec2 plane_center) {
    out.push_back(token(CommandType::Sol));
    for (const SketchCommand& cmd : loop) {
      if (const auto* line = std::get_if<Line>(&cmd)) {
        auto v = token(CommandType::Line);
        point(v, line->end(), plane_center);
        out.push_back(v);
      } else if (const auto* arc = std::get_if<Arc>(&cmd)) {
        auto v = token(CommandType::Arc);
        point(v, arc->end(), plane_center);
        set(v, slot::kSweep, arc->sweep_deg() / 180.0 - 1.0);
        set(v, slot::kCcw, arc->ccw() ? 1.0 : -1.0);
        out.push_back(v);
      } else {
        const auto& c = std::get<Circle>(cmd);
        auto v = token(CommandType::Circle);
        point(v, c.center(), plane_center);
        set(v, slot::kRadius, c.radius() / (2.0 * box_.half_extent));
        out.push_back(v);
      }
    }
  }

  UnifiedParamVector extrude(const ExtrudeCommand& e) {
    auto v = token(e.boolean_op() == BooleanOp::Cut ? CommandType::ExtrudeCut : CommandType::ExtrudeNew);
    if (const auto* nf = std::get_if<NormalFrame>(&e.frame())) {
      v.frame_form = FrameForm::Normal;
      set(v, slot::kE1, nf->normal().x);
      set(v, slot::kE2, nf->normal().y);
      set(v, slot::kE3, nf->normal().z);
    } else {
      const auto& ef = std::get<EulerFrame>(e.frame());
      v.frame_form = FrameForm::Euler;
      set(v, slot::kE1, wrap_angle(ef.alpha_deg) / 180.0 - 1.0);
      set(v, slot::kE2, wrap_angle(ef.theta_deg) / 180.0 - 1.0);
      set(v, slot::kE3, wrap_angle(ef.gamma_deg) / 180.0 - 1.0);
    }
    const Vec3 o = (e.origin() - box_.center) / box_.half_extent;
    set(v, slot::kOx, o.x);
    set(v, slot::kOy, o.y);
    set(v, slot::kOz, o.z);
    set(v, slot::kExtent, e.extent() / (2.0 * box_.half_extent));
    return v;
  }

  NormalizationBox box_;
};

bool is_extrude(CommandType t) { return t == CommandType::ExtrudeNew || t == CommandType::ExtrudeCut; }

class Decoder {
 public:
  explicit Decoder(const NormalizationBox& box) : box_(box) {
    if (!(box.half_extent > 0.0) || !std::isfinite(box.half_extent)) throw InvariantError("box half extent must be positive");
  }

  Part part(const PartTokens& p) {
    const auto& t = p.tokens;
    for (const auto& v : t) {
      if (v.mask != slot_mask(v.type)) throw InvariantError("token mask does not match its command type");
    }
    std::vector<Block> blocks;
    std::size_t i = 0;
    while (i < t.size()) {
      std::size_t e = i;
      while (e < t.size() && !is_extrude(t[e].type)) ++e;
      if (e == t.size()) throw InvariantError("token stream ends without an extrude token");
      const ExtrudeCommand extrude = decode_extrude(t[e]);
      const Frame f = frame_basis(extrude.frame(), extrude.origin());
      const Vec3 rel = box_.center - extrude.origin();
      const Vec2 plane_center{dot(rel, f.u), dot(rel, f.v)};

      std::vector<Loop> loops;
      for (std::size_t k = i; k < e; ++k) {
        const auto& v = t[k];
        if (v.type == CommandType::Sol) {
          loops.emplace_back();
          continue;
        }
        if (loops.empty()) throw InvariantError("sketch token before any SOL token");
        loops.back().push_back(decode_sketch(v, plane_center));
      }
      if (loops.empty()) throw InvariantError("extrude token without a sketch");
      for (const Loop& l : loops) {
        if (l.empty()) throw InvariantError("empty loop in token stream");
      }
      Loop outer = std::move(loops.front());
      std::vector<Loop> cuts(std::make_move_iterator(loops.begin() + 1), std::make_move_iterator(loops.end()));
      blocks.push_back(Block{Profile(std::move(outer), std::move(cuts)), extrude});
      i = e + 1;
    }
    if (blocks.empty()) throw InvariantError("part has no tokens");
    return Part(p.label, std::move(blocks));
  }

  int clamped = 0;
  int nudged = 0;

 private:
  double slot_value(const UnifiedParamVector& v, std::size_t s) {
    double x = v.slots[s];
    if (std::isnan(x)) {
      ++nudged;
      return 0.0;
    }
    if (x > 1.0 || x < -1.0) {
      ++clamped;
      x = std::clamp(x, -1.0, 1.0);
    }
    return x;
  }

  Vec2 point(const UnifiedParamVector& v, Vec2 plane_center) {
    return {slot_value(v, slot::kX) * box_.half_extent + plane_center.x,
            slot_value(v, slot::kY) * box_.half_extent + plane_center.y};
  }

  SketchCommand decode_sketch(const UnifiedParamVector& v, Vec2 plane_center) {
    switch (v.type) {
      case CommandType::Line: return Line(point(v, plane_center));
      case CommandType::Arc: {
        double sweep = (slot_value(v, slot::kSweep) + 1.0) * 180.0;
        constexpr double kMinSweep = 1e-3;
        if (sweep < kMinSweep || sweep > 360.0 - kMinSweep) {
          ++nudged;
          sweep = std::clamp(sweep, kMinSweep, 360.0 - kMinSweep);
        }
        const int flag = slot_value(v, slot::kCcw) >= 0.0 ? 1 : 0;
        return Arc(point(v, plane_center), sweep, flag);
      }
      case CommandType::Circle: {
        double r = slot_value(v, slot::kRadius) * 2.0 * box_.half_extent;
        const double min_r = 1e-6 * box_.half_extent;
        if (r < min_r) {
          ++nudged;
          r = std::abs(r) < min_r ? min_r : std::abs(r);
        }
        return Circle(point(v, plane_center), r);
      }
      default: throw InvariantError("unexpected token type inside a sketch");
    }
  }

  ExtrudeCommand decode_extrude(const UnifiedParamVector& v) {
    const double e1 = slot_value(v, slot::kE1);
    const double e2 = slot_value(v, slot::kE2);
    const double e3 = slot_value(v, slot::kE3);
    FrameSpec frame = EulerFrame{};
    if (v.frame_form == FrameForm::Normal) {
      Vec3 n{e1, e2, e3};
      if (!(norm(n) > 1e-9)) {
        ++nudged;
        n = {0.0, 0.0, 1.0};
      }
      frame = NormalFrame(n);
    } else {
      frame = EulerFrame{(e1 + 1.0) * 180.0, (e2 + 1.0) * 180.0, (e3 + 1.0) * 180.0};
    }
    const Vec3 origin =
        box_.center + Vec3{slot_value(v, slot::kOx), slot_value(v, slot::kOy), slot_value(v, slot::kOz)} * box_.half_extent;
    double extent = slot_value(v, slot::kExtent) * 2.0 * box_.half_extent;
    const double min_extent = 1e-6 * box_.half_extent;
    if (std::abs(extent) < min_extent) {
      ++nudged;
      extent = extent < 0.0 ? -min_extent : min_extent;
    }
    const BooleanOp op = v.type == CommandType::ExtrudeCut ? BooleanOp::Cut : BooleanOp::NewBody;
    return ExtrudeCommand(frame, origin, extent, op);
  }

  NormalizationBox box_;
};

std::optional<CommandType> command_type_from_string(std::string_view s) {
  for (auto t : {CommandType::Sol, CommandType::Line, CommandType::Arc, CommandType::Circle, CommandType::ExtrudeNew,
                 CommandType::ExtrudeCut}) {
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

}  // namespace

EncodedProgram encode(const CadProgram& program, const NormalizationBox& box) {
  Encoder enc(box);
  EncodedProgram out{box, {}};
  for (const Part& p : program.parts()) out.parts.push_back(enc.part(p));
  return out;
}

DecodeResult decode(const EncodedProgram& encoded) {
  Decoder dec(encoded.box);
  std::vector<Part> parts;
  for (const PartTokens& p : encoded.parts) parts.push_back(dec.part(p));
  if (parts.empty()) throw InvariantError("no parts to decode");
  return {CadProgram(std::move(parts)), dec.clamped, dec.nudged};
}

int quantize_value(double x) {
  if (!(x >= -1.0 && x <= 1.0)) throw InvariantError("quantizer input outside [-1, 1]");
  const int i = static_cast<int>(std::floor((x + 1.0) * (kBins / 2.0)));
  return std::clamp(i, 0, kBins - 1);
}

double dequantize_value(int index) {
  if (index < 0 || index >= kBins) throw InvariantError("bin index outside [0, 256)");
  return -1.0 + (index + 0.5) / (kBins / 2.0);
}

BinIndices quantize(const UnifiedParamVector& v) {
  BinIndices bins{};
  for (std::size_t s = 0; s < kSlotCount; ++s) bins[s] = v.mask[s] ? quantize_value(v.slots[s]) : 0;
  return bins;
}

UnifiedParamVector dequantize(const BinIndices& bins, CommandType type, FrameForm form) {
  UnifiedParamVector v;
  v.type = type;
  v.mask = slot_mask(type);
  v.frame_form = form;
  for (std::size_t s = 0; s < kSlotCount; ++s) {
    if (bins[s] < 0 || bins[s] >= kBins) throw InvariantError("bin index outside [0, 256)");
    v.slots[s] = v.mask[s] ? dequantize_value(bins[s]) : 0.0;
  }
  return v;
}

std::string tokens_to_json(const EncodedProgram& encoded) {
  json arr = json::array();
  const json box = {{"center", {encoded.box.center.x, encoded.box.center.y, encoded.box.center.z}},
                    {"half_extent", encoded.box.half_extent}};
  for (std::size_t i = 0; i < encoded.parts.size(); ++i) {
    const PartTokens& p = encoded.parts[i];
    json tokens = json::array();
    for (const auto& v : p.tokens) {
      json t = {{"type", to_string(v.type)}, {"slots", v.slots}, {"mask", v.mask}};
      if (is_extrude(v.type)) t["frame"] = to_string(v.frame_form);
      tokens.push_back(std::move(t));
    }
    arr.push_back({{"part", i}, {"label", p.label}, {"box", box}, {"tokens", std::move(tokens)}});
  }
  return arr.dump(1);
}

EncodedProgram tokens_from_json(std::string_view text) {
  EncodedProgram out;
  try {
    const json arr = json::parse(text);
    if (!arr.is_array() || arr.empty()) throw FormatError("token JSON must be a non-empty array");
    bool have_box = false;
    for (const json& entry : arr) {
      const auto c = entry.at("box").at("center").get<std::array<double, 3>>();
      NormalizationBox box{{c[0], c[1], c[2]}, entry.at("box").at("half_extent").get<double>()};
      if (!have_box) {
        out.box = box;
        have_box = true;
      } else if (!(box.center == out.box.center) || box.half_extent != out.box.half_extent) {
        throw FormatError("token JSON parts use different normalization boxes");
      }
      PartTokens part{entry.at("label").get<std::string>(), {}};
      for (const json& t : entry.at("tokens")) {
        UnifiedParamVector v;
        const auto type = command_type_from_string(t.at("type").get<std::string>());
        if (!type) throw FormatError("unknown token type " + t.at("type").dump());
        v.type = *type;
        v.slots = t.at("slots").get<std::array<double, kSlotCount>>();
        v.mask = t.at("mask").get<SlotMask>();
        if (t.contains("frame")) {
          const auto f = t.at("frame").get<std::string>();
          if (f == "normal") {
            v.frame_form = FrameForm::Normal;
          } else if (f == "euler") {
            v.frame_form = FrameForm::Euler;
          } else {
            throw FormatError("unknown frame form '" + f + "'");
          }
        }
        part.tokens.push_back(v);
      }
      out.parts.push_back(std::move(part));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed token JSON: ") + e.what());
  }
  return out;
}

}  // namespace sxcad
