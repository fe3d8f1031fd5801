#include "sxcad/mesh_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "sxcad/error.hpp"

namespace sxcad {
namespace {

std::string shortest(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

void write_obj(std::ostream& out, const LabeledMesh& mesh) {
  out << "# sxcad mesh: " << mesh.vertices.size() << " vertices, " << mesh.triangles.size() << " triangles\n";
  for (const Vec3& v : mesh.vertices) out << "v " << shortest(v.x) << ' ' << shortest(v.y) << ' ' << shortest(v.z) << '\n';
  for (const MeshBody& body : mesh.bodies) {
    out << "g part_" << body.part << (body.cut ? "_cut" : "") << '\n';
    for (std::uint32_t t = body.first_triangle; t < body.first_triangle + body.triangle_count; ++t) {
      const auto& tri = mesh.triangles[t];
      out << "f " << tri[0] + 1 << ' ' << tri[1] + 1 << ' ' << tri[2] + 1 << '\n';
    }
  }
}

std::string mesh_labels_json(const LabeledMesh& mesh) {
  nlohmann::json bodies = nlohmann::json::array();
  for (const MeshBody& b : mesh.bodies) {
    bodies.push_back({{"part", b.part},
                      {"block", b.block},
                      {"cut", b.cut},
                      {"first_triangle", b.first_triangle},
                      {"triangle_count", b.triangle_count}});
  }
  const nlohmann::json j = {{"labels", mesh.label_table}, {"triangle_part", mesh.tri_labels}, {"bodies", bodies}};
  return j.dump(1);
}

void write_point_cloud(std::ostream& out, const LabeledPointCloud& cloud) {
  for (std::size_t i = 0; i < cloud.label_names.size(); ++i) out << "# label " << i << ' ' << cloud.label_names[i] << '\n';
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& p = cloud.points[i];
    out << shortest(p.x) << ' ' << shortest(p.y) << ' ' << shortest(p.z) << ' ' << cloud.labels[i] << '\n';
  }
}

LabeledPointCloud read_point_cloud(std::istream& in) {
  LabeledPointCloud cloud;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line.front() == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      std::size_t index = 0;
      if (hs >> key && key == "label" && hs >> index) {
        std::string name;
        std::getline(hs >> std::ws, name);
        if (cloud.label_names.size() <= index) cloud.label_names.resize(index + 1);
        cloud.label_names[index] = name;
      }
      continue;
    }
    std::istringstream ls(line);
    Vec3 p;
    int label = 0;
    std::string extra;
    if (!(ls >> p.x >> p.y >> p.z >> label) || (ls >> extra)) {
      throw FormatError("point cloud line " + std::to_string(line_no) + ": expected 'x y z label'");
    }
    cloud.points.push_back(p);
    cloud.labels.push_back(label);
  }
  if (cloud.points.empty()) throw FormatError("point cloud has no points");
  return cloud;
}

}  // namespace sxcad
