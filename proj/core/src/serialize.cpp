#include "sxcad/serialize.hpp"

#include <json.hpp>

#include "sxcad/error.hpp"

namespace sxcad {

using nlohmann::json;

namespace {

constexpr std::string_view kProgramFormat = "sxcad-program/1";

json vec(Vec2 v) { return json::array({v.x, v.y}); }
json vec(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json loop_json(const Loop& loop) {
  json arr = json::array();
  for (const SketchCommand& cmd : loop) {
    if (const auto* l = std::get_if<Line>(&cmd)) {
      arr.push_back({{"type", "L"}, {"end", vec(l->end())}});
    } else if (const auto* a = std::get_if<Arc>(&cmd)) {
      arr.push_back({{"type", "A"}, {"end", vec(a->end())}, {"sweep_deg", a->sweep_deg()}, {"ccw", a->ccw_flag()}});
    } else {
      const auto& c = std::get<Circle>(cmd);
      arr.push_back({{"type", "R"}, {"center", vec(c.center())}, {"radius", c.radius()}});
    }
  }
  return arr;
}

json frame_json(const FrameSpec& frame) {
  if (const auto* n = std::get_if<NormalFrame>(&frame)) return {{"type", "normal"}, {"n", vec(n->normal())}};
  const auto& e = std::get<EulerFrame>(frame);
  return {{"type", "euler"}, {"angles_deg", json::array({e.alpha_deg, e.theta_deg, e.gamma_deg})}};
}

Vec2 vec2(const json& j) {
  const auto a = j.get<std::array<double, 2>>();
  return {a[0], a[1]};
}
Vec3 vec3(const json& j) {
  const auto a = j.get<std::array<double, 3>>();
  return {a[0], a[1], a[2]};
}

Loop loop_from(const json& arr) {
  Loop loop;
  for (const json& c : arr) {
    const std::string type = c.at("type").get<std::string>();
    if (type == "L") {
      loop.emplace_back(Line(vec2(c.at("end"))));
    } else if (type == "A") {
      loop.emplace_back(Arc(vec2(c.at("end")), c.at("sweep_deg").get<double>(), c.at("ccw").get<int>()));
    } else if (type == "R") {
      loop.emplace_back(Circle(vec2(c.at("center")), c.at("radius").get<double>()));
    } else {
      throw FormatError("unknown sketch command type '" + type + "'");
    }
  }
  return loop;
}

FrameSpec frame_from(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "normal") return NormalFrame(vec3(j.at("n")));
  if (type == "euler") {
    const Vec3 a = vec3(j.at("angles_deg"));
    return EulerFrame{a.x, a.y, a.z};
  }
  throw FormatError("unknown frame type '" + type + "'");
}

std::string_view severity_name(Severity s) { return s == Severity::Error ? "error" : "warning"; }

}  // namespace

std::string program_to_json(const CadProgram& program, int indent) {
  json parts = json::array();
  for (const Part& part : program.parts()) {
    json blocks = json::array();
    for (const Block& b : part.blocks()) {
      json cuts = json::array();
      for (const Loop& cut : b.profile.cuts()) cuts.push_back(loop_json(cut));
      const ExtrudeCommand& e = b.extrude;
      blocks.push_back({{"outer", loop_json(b.profile.outer())},
                        {"cuts", std::move(cuts)},
                        {"extrude",
                         {{"frame", frame_json(e.frame())},
                          {"origin", vec(e.origin())},
                          {"extent", e.extent()},
                          {"boolean", to_string(e.boolean_op())},
                          {"extrusion", "OneSided"}}}});
    }
    parts.push_back({{"label", part.label()}, {"blocks", std::move(blocks)}});
  }
  json j = {{"format", kProgramFormat}, {"parts", std::move(parts)}};
  j["provenance"] = program.provenance() ? json(*program.provenance()) : json(nullptr);
  return j.dump(indent);
}

CadProgram program_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", std::string()) != kProgramFormat) throw FormatError("not an sxcad program document");
    std::vector<Part> parts;
    for (const json& p : j.at("parts")) {
      std::vector<Block> blocks;
      for (const json& b : p.at("blocks")) {
        std::vector<Loop> cuts;
        if (b.contains("cuts")) {
          for (const json& c : b.at("cuts")) cuts.push_back(loop_from(c));
        }
        const json& e = b.at("extrude");
        const std::string op_name = e.value("boolean", std::string("NewBody"));
        const auto op = boolean_op_from_string(op_name);
        if (!op) throw FormatError("unknown boolean type '" + op_name + "'");
        if (e.value("extrusion", std::string("OneSided")) != "OneSided") throw FormatError("only OneSided extrusions are supported");
        blocks.push_back(Block{Profile(loop_from(b.at("outer")), std::move(cuts)),
                               ExtrudeCommand(frame_from(e.at("frame")), vec3(e.at("origin")),
                                              e.at("extent").get<double>(), *op)});
      }
      parts.emplace_back(p.at("label").get<std::string>(), std::move(blocks));
    }
    std::optional<std::string> provenance;
    if (j.contains("provenance") && j.at("provenance").is_string()) provenance = j.at("provenance").get<std::string>();
    return CadProgram(std::move(parts), std::move(provenance));
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed program JSON: ") + e.what());
  }
}

std::string report_to_json(const ValidationReport& report, int indent) {
  json violations = json::array();
  for (const Violation& v : report.violations) {
    violations.push_back({{"part", v.part},
                          {"block", v.block},
                          {"rule", v.rule},
                          {"severity", severity_name(v.severity)},
                          {"message", v.message}});
  }
  json j = {{"valid", report.valid}, {"violations", std::move(violations)}, {"repaired", report.repaired.has_value()}};
  if (report.repaired) j["repaired_program"] = json::parse(program_to_json(*report.repaired, -1));
  return j.dump(indent);
}

std::string diagnostics_to_json(const std::vector<SourceDiagnostic>& diagnostics, int indent) {
  json arr = json::array();
  for (const auto& d : diagnostics) {
    arr.push_back({{"severity", severity_name(d.severity)}, {"line", d.line}, {"message", d.message}, {"snippet", d.snippet}});
  }
  return arr.dump(indent);
}

std::string metrics_to_json(const MetricsReport& report, int indent) {
  json j = {{"chamfer", report.chamfer},
            {"chamfer_kind", report.squared_chamfer ? "symmetric mean squared distance" : "symmetric mean distance"},
            {"seg_acc", report.seg_acc},
            {"seg_miou", report.seg_miou},
            {"per_label_iou", report.per_label_iou}};
  return j.dump(indent);
}

ParseResult load_program(std::string_view content) {
  std::size_t i = 0;
  while (i < content.size() && std::isspace(static_cast<unsigned char>(content[i]))) ++i;
  if (i < content.size() && content[i] == '{') {
    ParseResult r;
    r.program = program_from_json(content);
    return r;
  }
  return parse(content);
}

}  // namespace sxcad
