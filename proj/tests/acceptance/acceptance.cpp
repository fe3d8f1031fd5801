// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "sxcad/cadify.hpp"
#include "sxcad/dsl.hpp"
#include "sxcad/error.hpp"
#include "sxcad/geom.hpp"
#include "sxcad/metrics.hpp"
#include "sxcad/unify.hpp"
#include "sxcad/validate.hpp"
#include "sxcad_cli/cli.hpp"

namespace {

using namespace sxcad;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

struct Criterion {
  std::string name;
  double budget_s;
  std::function<Outcome()> body;
};

std::string fmt(const char* f, double v) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

Aabb mesh_box(const LabeledMesh& m) {
  Aabb box;
  for (const auto& b : m.bodies) {
    if (b.cut) continue;
    for (std::uint32_t v = b.first_vertex; v < b.first_vertex + b.vertex_count; ++v) box.expand(m.vertices[v]);
  }
  return box;
}

std::vector<std::string> sorted_files(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome fixture_fidelity() {
  Outcome o;
  const ParseResult cubes = parse(test::read_file(test::data_dir() / "three_cubes.cad"));
  const ParseResult back = parse(test::read_file(test::data_dir() / "backrest.cad"));
  o.require(cubes.ok() && back.ok(), "fixture does not parse");
  if (!o.pass) return o;
  o.require(validate(*cubes.program).valid && validate(*back.program).valid, "fixture does not validate");

  const LabeledMesh cm = compile(*cubes.program);
  const double vol = mesh_volume(cm), area = mesh_area(cm);
  const Aabb cb = mesh_box(cm);
  o.require(near(vol, 24, 1e-9), "three-cube volume " + fmt("%.12g", vol));
  o.require(near(area, 72, 1e-9), "three-cube area " + fmt("%.12g", area));
  o.require(near(cb.min.x, 0, 1e-9) && near(cb.max.x, 8, 1e-9), "three-cube x range");

  const LabeledMesh bm = compile(*back.program);
  o.require(is_watertight(bm), "backrest not watertight");
  o.require(bm.bodies.size() == 1 && euler_characteristic(bm, bm.bodies[0]) == 0, "backrest V-E+F != 0");
  const Aabb bb = mesh_box(bm);
  o.require(near(bb.min.x, 0, 1e-12) && near(bb.max.x, 0.5, 1e-12), "backrest thickness along +x");
  if (o.pass) {
    o.detail = "volume " + fmt("%.12g", vol) + ", area " + fmt("%.12g", area) + ", backrest chi 0, x in [0, 0.5]";
  }
  return o;
}

Outcome round_trip() {
  Outcome o;
  Rng rng(2024);
  for (int i = 0; i < 200 && o.pass; ++i) {
    const CadProgram p = gen::any_program(rng);
    const ParseResult r = parse(print(p));
    o.require(r.ok() && *r.program == p, "program " + std::to_string(i) + " does not round-trip");
  }
  const std::string alphabet = "<>SOLCUTsolcut#LARE:(),.-+0123456789 eE\n\r\t;";
  int parsed = 0;
  for (int i = 0; i < 100000 && o.pass; ++i) {
    std::string s(rng.below(160), '\0');
    const bool structured = rng.below(2) == 0;
    for (char& c : s) c = structured ? alphabet[rng.below(alphabet.size())] : static_cast<char>(rng.below(256));
    try {
      parsed += parse(s).ok() ? 1 : 0;
    } catch (const std::exception& e) {
      o.require(false, std::string("parser threw: ") + e.what());
    }
  }
  if (o.pass) o.detail = "200/200 programs round-trip; 100000 fuzz inputs, no crash (" + std::to_string(parsed) + " parsed)";
  return o;
}

Vec3 rotate_quat(const std::array<double, 4>& q, const Vec3& p) {
  const Vec3 u{q[1], q[2], q[3]};
  return p + cross(u, cross(u, p) + p * q[0]) * 2.0;
}

Outcome geometry_invariants() {
  Outcome o;
  std::vector<CadProgram> fixtures{test::three_cubes(), test::backrest()};
  for (const std::string& f : sorted_files(test::data_dir() / "progsucc")) {
    const ParseResult r = parse(test::read_file(f));
    if (!r.ok()) continue;
    const ValidationReport rep = validate(*r.program);
    if (rep.valid) fixtures.push_back(rep.effective(*r.program));
  }
  for (const std::string& f : sorted_files(test::data_dir() / "corpus" / "gt")) fixtures.push_back(test::parse_file(f));
  Rng rng(99);
  for (int i = 0; i < 20; ++i) fixtures.push_back(gen::valid_program(rng));

  std::vector<LabeledMesh> meshes;
  for (const CadProgram& p : fixtures) {
    meshes.push_back(compile(p));
    o.require(is_watertight(meshes.back()), "fixture mesh not watertight");
  }
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    std::array<double, 4> q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    const double qn = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    for (double& c : q) c /= qn;
    const Vec3 shift{rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-100, 100)};
    for (const LabeledMesh& m : meshes) {
      LabeledMesh moved = m;
      for (Vec3& v : moved.vertices) v = rotate_quat(q, v) + shift;
      const double v0 = mesh_volume(m);
      worst = std::max(worst, std::abs(mesh_volume(moved) - v0) / v0);
    }
  }
  o.require(worst <= 1e-9, "relative volume change " + fmt("%.3g", worst));
  if (o.pass) {
    o.detail = std::to_string(meshes.size()) + " meshes watertight; 100 rigid motions, max relative volume change " +
               fmt("%.3g", worst);
  }
  return o;
}

Outcome metrics_oracle() {
  Outcome o;
  Rng rng(31337);
  const LabeledMesh back = compile(test::backrest());
  const LabeledMesh cubes = compile(test::three_cubes());
  double worst = 0.0;
  for (int inst = 0; inst < 50 && o.pass; ++inst) {
    const std::size_t na = 1 + rng.below(2000), nb = 1 + rng.below(2000);
    LabeledPointCloud a, b;
    switch (inst % 3) {
      case 0:  // uniform noise
        for (std::size_t i = 0; i < na; ++i) a.points.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
        for (std::size_t i = 0; i < nb; ++i) b.points.push_back({rng.uniform(-2, 2), rng.uniform(-1, 1), rng.uniform(0, 1)});
        for (std::size_t i = 0; i < nb; ++i) b.labels.push_back(static_cast<int>(rng.below(4)));
        break;
      case 1:  // surface samples
        a = sample_surface(back, na, rng.next());
        b = sample_surface(cubes, nb, rng.next());
        break;
      default:  // integer lattice: many exact ties
        for (std::size_t i = 0; i < na; ++i)
          a.points.push_back({double(rng.below(8)), double(rng.below(8)), double(rng.below(8))});
        for (std::size_t i = 0; i < nb; ++i)
          b.points.push_back({double(rng.below(8)) + 0.5, double(rng.below(8)), double(rng.below(8)) + 0.5});
        for (std::size_t i = 0; i < nb; ++i) b.labels.push_back(static_cast<int>(rng.below(3)));
        break;
    }
    const double got = chamfer(a.points, b.points);
    const double want = oracle::chamfer(a.points, b.points);
    worst = std::max(worst, std::abs(got - want));
    o.require(std::abs(got - want) <= 1e-9, "chamfer differs on instance " + std::to_string(inst));
    o.require(transfer_labels(a.points, b).labels == oracle::transfer(a.points, b.points, b.labels),
              "labels differ on instance " + std::to_string(inst));
  }
  const double unit = chamfer(std::vector<Vec3>{{0, 0, 0}}, std::vector<Vec3>{{1, 0, 0}});
  o.require(unit == 1.0, "chamfer({0},{(1,0,0)}) = " + fmt("%.17g", unit));
  const auto emb = stub_embedder();
  const LabeledPointCloud self = sample_surface(back, 4000, 5);
  const MetricsReport r = evaluate_clouds(self, self, *emb);
  o.require(r.chamfer == 0.0 && r.seg_acc == 1.0 && r.seg_miou == 1.0, "self-metrics not (0, 1, 1)");
  if (o.pass) o.detail = "50 instances, max chamfer diff " + fmt("%.3g", worst) + ", labels identical; unit pair 1.0; self (0, 1, 1)";
  return o;
}

Outcome assignment_optimality() {
  Outcome o;
  Rng rng(4242);
  double worst = 0.0;
  for (int i = 0; i < 1000 && o.pass; ++i) {
    const std::size_t rows = 1 + rng.below(7), cols = 1 + rng.below(7);
    const bool integer = i % 4 == 0;
    CostMatrix c(rows, cols);
    std::vector<std::vector<double>> dense(rows, std::vector<double>(cols));
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t k = 0; k < cols; ++k)
        c(r, k) = dense[r][k] = integer ? static_cast<double>(rng.below(5)) : rng.uniform(-10, 10);
    const AssignmentResult res = solve_assignment(c);
    const double want = oracle::assignment_minimum(dense);
    worst = std::max(worst, std::abs(res.total_cost - want));
    o.require(std::abs(res.total_cost - want) <= 1e-9, "matrix " + std::to_string(i) + " not optimal");
    o.require(res.pairs.size() == std::min(rows, cols), "matrix " + std::to_string(i) + " wrong pair count");
  }
  if (o.pass) o.detail = "1000 matrices up to 7x7, max cost diff " + fmt("%.3g", worst);
  return o;
}

Outcome ransac_recovery() {
  Outcome o;
  const Vec2 c{2, -1};
  const double radius = 3;
  int clean_ok = 0, outlier_ok = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    Rng rng(stream_seed(trial, "ransac"));
    std::vector<Vec2> pts;
    for (int i = 0; i < 100; ++i) {
      const double a = rng.uniform(0, 2 * std::numbers::pi);
      pts.push_back({c.x + radius * std::cos(a) + 0.01 * rng.normal(), c.y + radius * std::sin(a) + 0.01 * rng.normal()});
    }
    const RansacOptions opt{200, 0.05, trial};
    const CircleFit f = fit_circle_ransac(pts, opt);
    clean_ok += norm(f.center - c) < 0.05 && std::abs(f.radius - radius) < 0.05;

    pts.resize(50);
    for (int i = 0; i < 50; ++i) pts.push_back({rng.uniform(c.x - radius, c.x + radius), rng.uniform(c.y - radius, c.y + radius)});
    const CircleFit g = fit_circle_ransac(pts, opt);
    outlier_ok += norm(g.center - c) < 0.05 && std::abs(g.radius - radius) < 0.05;
  }
  o.require(clean_ok >= 95, "clean trials " + std::to_string(clean_ok) + "/100");
  o.require(outlier_ok >= 90, "outlier trials " + std::to_string(outlier_ok) + "/100");
  o.detail = o.pass ? "clean " + std::to_string(clean_ok) + "/100, 50% outliers " + std::to_string(outlier_ok) + "/100" : o.detail;
  return o;
}

Outcome rescale_contract() {
  Outcome o;
  std::vector<Part> parts{test::backrest().parts()[0], test::three_cubes().parts()[0], test::unit_cube().parts()[0]};
  Rng rng(555);
  for (int i = 0; i < 30; ++i) parts.push_back(gen::valid_program(rng, 1).parts()[0]);
  for (const Part& p : parts) {
    const Part same = rescale_part(p, part_bounding_box(p));
    o.require(approx_equal(CadProgram({same}), CadProgram({p}), 1e-9), "own-box rescale changed part '" + p.label() + "'");
  }
  const Aabb target{{0, 0, 0}, {2, 2, 2}};
  const CadProgram scaled({rescale_part(test::unit_cube().parts()[0], target)});
  const Aabb box = mesh_box(compile(scaled));
  double err = 0;
  for (int a = 0; a < 3; ++a) err = std::max({err, std::abs(box.min[a] - target.min[a]), std::abs(box.max[a] - target.max[a])});
  o.require(err <= 1e-9, "unit cube AABB error " + fmt("%.3g", err));
  if (o.pass) o.detail = std::to_string(parts.size()) + " parts fixed by own-box rescale; [0,2]^3 AABB error " + fmt("%.3g", err);
  return o;
}

Outcome quantizer() {
  Outcome o;
  Rng rng(8);
  double worst = 0;
  for (int i = 0; i < 1000000; ++i) {
    const double x = i == 0 ? -1.0 : i == 1 ? 1.0 : rng.uniform(-1, 1);
    worst = std::max(worst, std::abs(x - dequantize_value(quantize_value(x))));
  }
  o.require(worst <= 1.0 / 256, "max error " + fmt("%.6g", worst));
  for (int i = 0; i < kBins; ++i) o.require(quantize_value(dequantize_value(i)) == i, "q(deq(" + std::to_string(i) + ")) != id");
  if (o.pass) o.detail = "10^6 samples, max error " + fmt("%.6g", worst) + " <= 1/256; 256/256 fixed points";
  return o;
}

std::string run_eval(const std::string& jobs) {
  const std::string dir = (test::data_dir() / "corpus").string();
  std::vector<const char*> argv{"sxcad", "--jobs", jobs.c_str(), "eval", dir.c_str()};
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) throw std::runtime_error("eval failed: " + err.str());
  return out.str();
}

Outcome determinism() {
  Outcome o;
  const std::string one = run_eval("1");
  const std::string eight = run_eval("8");
  o.require(one == eight, "CSV differs between --jobs 1 and --jobs 8");
  o.require(std::count(one.begin(), one.end(), '\n') == 4, "unexpected CSV shape");
  if (o.pass) o.detail = "byte-identical CSV (" + std::to_string(one.size()) + " bytes)";
  return o;
}

Outcome prog_succ_harness() {
  Outcome o;
  std::vector<std::string> corpus;
  for (const std::string& f : sorted_files(test::data_dir() / "progsucc")) corpus.push_back(test::read_file(f));
  const ProgSuccess s = prog_success(corpus);
  o.require(s.total == 8, "corpus has " + std::to_string(s.total) + " responses");
  o.require(s.succeeded == 6, "succeeded " + std::to_string(s.succeeded) + "/8");
  o.require(s.rate() == 0.75, "rate " + fmt("%.6f", s.rate()));
  if (o.pass) o.detail = "6/8 = " + fmt("%.6f", s.rate()) + " (" + std::to_string(s.repaired) + " repaired)";
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"fixture fidelity", 1.0, fixture_fidelity},
      {"round-trip and parser fuzz", 30.0, round_trip},
      {"geometry invariants", 60.0, geometry_invariants},
      {"metrics oracle equivalence", 60.0, metrics_oracle},
      {"assignment optimality", 30.0, assignment_optimality},
      {"RANSAC recovery", 60.0, ransac_recovery},
      {"rescale contract", 60.0, rescale_contract},
      {"quantizer", 60.0, quantizer},
      {"eval determinism", 120.0, determinism},
      {"Prog Succ harness", 60.0, prog_succ_harness},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.pass && secs > c.budget_s) {
      o.pass = false;
      o.detail = "took " + fmt("%.2f", secs) + " s, budget " + fmt("%.0f", c.budget_s) + " s";
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s  %-28s %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
