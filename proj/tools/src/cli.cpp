#include "sxcad_cli/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "sxcad/cadify.hpp"
#include "sxcad/dsl.hpp"
#include "sxcad/error.hpp"
#include "sxcad/geom.hpp"
#include "sxcad/mesh_io.hpp"
#include "sxcad/metrics.hpp"
#include "sxcad/provider.hpp"
#include "sxcad/rng.hpp"
#include "sxcad/serialize.hpp"
#include "sxcad/unify.hpp"
#include "sxcad/validate.hpp"

namespace sxcad::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Terminates a subcommand with an exit code and a machine-readable error.
struct Failure {
  int code;
  std::string kind;
  std::string message;
  json details = nullptr;
};

struct RunConfig {
  double tess_tol = 0.0;     // 0: relative default
  double closure_tol = 0.0;  // 0: relative default
  std::size_t samples = 8000;
  std::uint64_t seed = 0;
  std::string provider = "fixture";
  std::string fixtures;
  std::string endpoint;
  std::string api_key_env = "VLM_API_KEY";
  std::string model_name = "gpt-4-vision-preview";
  std::string cache_dir = "cache";
  std::string embedder_endpoint;
  std::string prompt = "cot";
  int jobs = 1;
  std::string out;
  bool squared = false;
  bool row = false;

  Tolerances tolerances() const {
    Tolerances t;
    if (closure_tol > 0.0) t.closure_abs = closure_tol;
    if (tess_tol > 0.0) t.tess_abs = tess_tol;
    return t;
  }
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kExitUsage, "io", "cannot read " + path.string()};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Failure{kExitUsage, "io", "cannot write " + path.string()};
}

bool is_json_array(std::string_view text) {
  const auto i = text.find_first_not_of(" \t\r\n");
  return i != std::string_view::npos && text[i] == '[';
}

/// Program from CAD text, program JSON or token JSON.
CadProgram load_cad(const fs::path& path) {
  const std::string text = read_text(path);
  if (is_json_array(text)) return decode(tokens_from_json(text)).program;
  ParseResult r = load_program(text);
  if (!r.ok()) {
    throw Failure{kExitValidation, "parse", "cannot parse " + path.string(), json::parse(diagnostics_to_json(r.errors(), -1))};
  }
  return std::move(*r.program);
}

/// Validated (and repaired) program, or a validation failure.
CadProgram load_valid(const fs::path& path, const RunConfig& cfg) {
  const CadProgram p = load_cad(path);
  ValidationReport report = validate(p, cfg.tolerances());
  if (!report.valid) {
    throw Failure{kExitValidation, "validation", path.string() + " is not a valid program",
                  json::parse(report_to_json(report, -1))};
  }
  return report.repaired ? *report.repaired : p;
}

bool is_cloud_path(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".pts" || ext == ".xyz";
}

LabeledPointCloud cloud_for(const fs::path& path, const RunConfig& cfg, std::uint64_t seed) {
  if (is_cloud_path(path)) {
    std::ifstream in(path);
    if (!in) throw Failure{kExitUsage, "io", "cannot read " + path.string()};
    return read_point_cloud(in);
  }
  const CadProgram p = load_valid(path, cfg);
  return sample_surface(compile(p, cfg.tolerances()), cfg.samples, seed);
}

std::unique_ptr<EmbeddingProvider> make_embedder(const RunConfig& cfg) {
  if (!cfg.embedder_endpoint.empty()) {
    HttpEmbeddingOptions o;
    o.endpoint = cfg.embedder_endpoint;
    return http_embedder(o);
  }
  return stub_embedder(0);
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// --- subcommands ----------------------------------------------------------

int cmd_parse(const RunConfig&, const std::string& file, std::ostream& out, std::ostream& err) {
  const std::string text = read_text(file);
  const ParseResult r = parse(text);
  if (!r.ok()) {
    throw Failure{kExitValidation, "parse", "cannot parse " + file, json::parse(diagnostics_to_json(r.errors(), -1))};
  }
  if (!r.diagnostics.empty()) err << diagnostics_to_json(r.diagnostics, -1) << '\n';
  out << program_to_json(*r.program) << '\n';
  return kExitOk;
}

int cmd_validate(const RunConfig& cfg, const std::string& file, std::ostream& out) {
  const CadProgram p = load_cad(file);
  const ValidationReport report = validate(p, cfg.tolerances());
  out << report_to_json(report) << '\n';
  return report.valid ? kExitOk : kExitValidation;
}

int cmd_mesh(const RunConfig& cfg, const std::string& file, std::ostream& out) {
  const CadProgram p = load_valid(file, cfg);
  const LabeledMesh mesh = compile(p, cfg.tolerances());
  const fs::path dir = cfg.out.empty() ? fs::path(".") : fs::path(cfg.out);
  const std::string stem = fs::path(file).stem().string();
  std::ostringstream obj;
  write_obj(obj, mesh);
  write_text(dir / (stem + ".obj"), obj.str());
  write_text(dir / (stem + ".labels.json"), mesh_labels_json(mesh) + "\n");
  const json summary = {{"obj", (dir / (stem + ".obj")).string()},
                        {"labels", (dir / (stem + ".labels.json")).string()},
                        {"vertices", mesh.vertices.size()},
                        {"triangles", mesh.triangles.size()},
                        {"bodies", mesh.bodies.size()},
                        {"watertight", is_watertight(mesh)}};
  out << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_sample(const RunConfig& cfg, const std::string& file, std::ostream& out) {
  const CadProgram p = load_valid(file, cfg);
  const LabeledPointCloud cloud = sample_surface(compile(p, cfg.tolerances()), cfg.samples, cfg.seed);
  if (cfg.out.empty()) {
    write_point_cloud(out, cloud);
  } else {
    std::ostringstream ss;
    write_point_cloud(ss, cloud);
    write_text(fs::path(cfg.out) / (fs::path(file).stem().string() + ".pts"), ss.str());
  }
  return kExitOk;
}

int cmd_metrics(const RunConfig& cfg, const std::string& pred, const std::string& gt, std::ostream& out) {
  // Both clouds share the stream so identical inputs give identical samples.
  const LabeledPointCloud a = cloud_for(pred, cfg, cfg.seed);
  const LabeledPointCloud b = cloud_for(gt, cfg, cfg.seed);
  const auto embedder = make_embedder(cfg);
  const MetricsReport report = evaluate_clouds(a, b, *embedder, ChamferOptions{cfg.squared});
  if (cfg.row) {
    out << "# CD = " << (cfg.squared ? "symmetric mean squared distance" : "symmetric mean distance") << '\n';
    out << "CD\tSeg Acc\tSeg mIoU\n";
    out << fixed6(report.chamfer) << '\t' << fixed6(report.seg_acc) << '\t' << fixed6(report.seg_miou) << '\n';
  } else {
    out << metrics_to_json(report) << '\n';
  }
  return kExitOk;
}

Aabb box_from(const json& j) {
  const auto lo = j.at("min").get<std::array<double, 3>>();
  const auto hi = j.at("max").get<std::array<double, 3>>();
  return Aabb{{lo[0], lo[1], lo[2]}, {hi[0], hi[1], hi[2]}};
}

int cmd_cadify(const RunConfig& cfg, const std::string& dir, std::ostream& out) {
  if (!fs::is_directory(dir)) throw Failure{kExitUsage, "io", "not a directory: " + dir};
  if (cfg.out.empty()) throw Failure{kExitUsage, "usage", "cadify needs --out DIR"};
  std::vector<std::string> keys;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    const std::string suffix = ".gt.json";
    if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      keys.push_back(name.substr(0, name.size() - suffix.size()));
    }
  }
  std::sort(keys.begin(), keys.end());
  const auto embedder = make_embedder(cfg);

  json items = json::array();
  int written = 0;
  for (const std::string& key : keys) {
    json item = {{"key", key}};
    try {
      const fs::path base = fs::path(dir);
      const CadProgram pred = load_valid(base / (key + ".cad"), cfg);
      json gt_doc;
      try {
        gt_doc = json::parse(read_text(base / (key + ".gt.json")));
      } catch (const json::exception& e) {
        throw FormatError(std::string("malformed ground-truth boxes: ") + e.what());
      }
      std::vector<GtPart> gt;
      for (const json& p : gt_doc.at("parts")) gt.push_back({p.at("label").get<std::string>(), box_from(p)});

      const CadifyResult res = cadify_program(pred, gt, *embedder, cfg.tolerances(), true);
      json entries = json::array();
      for (const auto& e : res.entries) {
        entries.push_back({{"pred_index", e.pred_index},
                           {"pred_label", e.pred_label},
                           {"gt_index", e.gt_index ? json(*e.gt_index) : json(nullptr)},
                           {"gt_label", e.gt_label},
                           {"cost", e.cost},
                           {"scale", e.scale},
                           {"kept", e.error.empty()},
                           {"error", e.error}});
      }
      json unmatched = json::array();
      for (std::size_t g : res.unmatched_gt) unmatched.push_back(gt[g].label);
      item["parts"] = std::move(entries);
      item["unmatched_gt"] = std::move(unmatched);

      if (res.program) {
        write_text(fs::path(cfg.out) / (key + ".cad"), print(*res.program));
        ++written;
        const fs::path pts = base / (key + ".gt.pts");
        if (fs::is_regular_file(pts)) {
          std::ifstream in(pts);
          const LabeledPointCloud gt_cloud = read_point_cloud(in);
          const std::uint64_t seed = stream_seed(cfg.seed, key);
          const auto before = sample_surface(compile(pred, cfg.tolerances()), cfg.samples, seed);
          const auto after = sample_surface(compile(*res.program, cfg.tolerances()), cfg.samples, seed);
          item["chamfer_before"] = chamfer(before, gt_cloud);
          item["chamfer_after"] = chamfer(after, gt_cloud);
        }
      } else {
        item["error"] = "no predicted part matched";
      }
    } catch (const Failure& f) {
      item["error"] = f.message;
      if (!f.details.is_null()) item["details"] = f.details;
    } catch (const Error& e) {
      item["error"] = e.what();
    }
    items.push_back(std::move(item));
  }
  const json audit = {{"items", std::move(items)}, {"written", written}};
  write_text(fs::path(cfg.out) / "audit.json", audit.dump(2) + "\n");
  out << json{{"items", keys.size()}, {"written", written}, {"audit", (fs::path(cfg.out) / "audit.json").string()}}.dump(2)
      << '\n';
  return kExitOk;
}

std::unique_ptr<StructureProvider> make_provider(const RunConfig& cfg) {
  if (cfg.provider == "fixture") {
    if (cfg.fixtures.empty()) throw Failure{kExitUsage, "usage", "--provider fixture needs --fixtures DIR"};
    return fixture_provider(cfg.fixtures);
  }
  HttpVlmOptions o;
  o.endpoint = cfg.endpoint;
  o.api_key_env = cfg.api_key_env;
  o.model = cfg.model_name;
  o.cache_dir = cfg.cache_dir;
  if (o.endpoint.empty()) throw Failure{kExitUsage, "usage", "--provider http needs --endpoint URL"};
  return http_vlm_provider(o);
}

int cmd_infer(const RunConfig& cfg, const std::string& image, std::ostream& out) {
  const auto tmpl = prompt_template_from_string(cfg.prompt);
  if (!tmpl) throw Failure{kExitUsage, "usage", "unknown prompt template '" + cfg.prompt + "'"};
  const auto provider = make_provider(cfg);
  const std::string raw = provider->request(image, *tmpl);
  const std::string key = fs::path(image).stem().string();
  const ParseResult r = parse(raw);
  json result = {{"key", key},
                 {"template", to_string(*tmpl)},
                 {"raw", raw},
                 {"ok", r.ok()},
                 {"diagnostics", json::parse(diagnostics_to_json(r.diagnostics, -1))},
                 {"program", r.ok() ? json::parse(program_to_json(*r.program, -1)) : json(nullptr)}};
  if (!cfg.out.empty()) {
    write_text(fs::path(cfg.out) / (key + ".txt"), raw);
    if (r.ok()) write_text(fs::path(cfg.out) / (key + ".json"), program_to_json(*r.program) + "\n");
  }
  out << result.dump(2) << '\n';
  return r.ok() ? kExitOk : kExitValidation;
}

struct GtItem {
  std::string key;
  std::optional<LabeledPointCloud> cloud;
  std::vector<std::string> labels;
  std::string error;
};

struct EvalItem {
  bool success = false;
  bool has_metrics = false;
  double chamfer = 0.0;
  double seg_acc = 0.0;
  double seg_miou = 0.0;
  double part_iou = 0.0;
};

template <typename F>
void parallel_for(std::size_t n, int jobs, F&& f) {
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) f(i);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

int cmd_eval(const RunConfig& cfg, const std::string& dir, std::ostream& out) {
  const fs::path root(dir);
  if (!fs::is_directory(root / "gt")) throw Failure{kExitUsage, "io", "eval needs " + (root / "gt").string()};
  std::vector<std::string> keys;
  for (const auto& e : fs::directory_iterator(root / "gt")) {
    if (e.path().extension() == ".cad") keys.push_back(e.path().stem().string());
  }
  std::sort(keys.begin(), keys.end());
  if (keys.empty()) throw Failure{kExitUsage, "io", "no ground-truth programs in " + (root / "gt").string()};
  std::vector<std::string> models;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && e.path().filename() != "gt") models.push_back(e.path().filename().string());
  }
  std::sort(models.begin(), models.end());
  const auto embedder = make_embedder(cfg);
  const Tolerances tol = cfg.tolerances();

  std::vector<GtItem> gts(keys.size());
  parallel_for(keys.size(), cfg.jobs, [&](std::size_t i) {
    GtItem& g = gts[i];
    g.key = keys[i];
    try {
      const CadProgram p = load_valid(root / "gt" / (g.key + ".cad"), cfg);
      for (const Part& part : p.parts()) g.labels.push_back(part.label());
      g.cloud = sample_surface(compile(p, tol), cfg.samples, stream_seed(cfg.seed, g.key));
    } catch (const Failure& f) {
      g.error = f.message;
    } catch (const Error& e) {
      g.error = e.what();
    }
  });
  for (const GtItem& g : gts) {
    if (!g.error.empty()) throw Failure{kExitValidation, "ground_truth", g.key + ": " + g.error};
  }

  std::vector<EvalItem> results(models.size() * keys.size());
  parallel_for(results.size(), cfg.jobs, [&](std::size_t idx) {
    const std::string& model = models[idx / keys.size()];
    const GtItem& gt = gts[idx % keys.size()];
    EvalItem& r = results[idx];
    fs::path path = root / model / (gt.key + ".cad");
    if (!fs::is_regular_file(path)) path = root / model / (gt.key + ".txt");
    if (!fs::is_regular_file(path)) return;
    try {
      const std::string text = read_text(path);
      const ParseResult parsed = parse(text);
      if (!parsed.ok()) return;
      std::vector<std::string> labels;
      for (const Part& part : parsed.program->parts()) labels.push_back(part.label());
      r.part_iou = part_iou(labels, gt.labels, *embedder);
      const ValidationReport report = validate(*parsed.program, tol);
      if (!report.valid) return;
      r.success = true;
      const LabeledMesh mesh = compile(report.effective(*parsed.program), tol);
      const LabeledPointCloud cloud = sample_surface(mesh, cfg.samples, stream_seed(cfg.seed, gt.key));
      const MetricsReport m = evaluate_clouds(cloud, *gt.cloud, *embedder, ChamferOptions{cfg.squared});
      r.chamfer = m.chamfer;
      r.seg_acc = m.seg_acc;
      r.seg_miou = m.seg_miou;
      r.has_metrics = true;
    } catch (const Failure&) {
    } catch (const Error&) {
    }
  });

  std::ostringstream csv;
  csv << "model,items,CD,Seg Acc,Seg mIoU,Prog Succ,Part IoU\n";
  struct Row {
    double cd = 0, acc = 0, miou = 0, succ = 0, piou = 0;
    bool has_geom = false;
  };
  std::vector<Row> rows;
  auto cell = [](bool ok, double v) { return ok ? fixed6(v) : std::string(); };
  for (std::size_t m = 0; m < models.size(); ++m) {
    Row row;
    int geom = 0, succ = 0;
    for (std::size_t k = 0; k < keys.size(); ++k) {
      const EvalItem& r = results[m * keys.size() + k];
      succ += r.success ? 1 : 0;
      row.piou += r.part_iou;
      if (r.has_metrics) {
        ++geom;
        row.cd += r.chamfer;
        row.acc += r.seg_acc;
        row.miou += r.seg_miou;
      }
    }
    const double n = static_cast<double>(keys.size());
    row.succ = succ / n;
    row.piou /= n;
    row.has_geom = geom > 0;
    if (geom > 0) {
      row.cd /= geom;
      row.acc /= geom;
      row.miou /= geom;
    }
    rows.push_back(row);
    csv << models[m] << ',' << keys.size() << ',' << cell(row.has_geom, row.cd) << ',' << cell(row.has_geom, row.acc)
        << ',' << cell(row.has_geom, row.miou) << ',' << fixed6(row.succ) << ',' << fixed6(row.piou) << '\n';
  }
  if (!rows.empty()) {
    Row mean;
    int geom_rows = 0;
    for (const Row& r : rows) {
      mean.succ += r.succ;
      mean.piou += r.piou;
      if (r.has_geom) {
        ++geom_rows;
        mean.cd += r.cd;
        mean.acc += r.acc;
        mean.miou += r.miou;
      }
    }
    const double n = static_cast<double>(rows.size());
    const bool g = geom_rows > 0;
    const double gn = g ? geom_rows : 1.0;
    csv << "mean," << keys.size() * rows.size() << ',' << cell(g, mean.cd / gn) << ',' << cell(g, mean.acc / gn) << ','
        << cell(g, mean.miou / gn) << ',' << fixed6(mean.succ / n) << ',' << fixed6(mean.piou / n) << '\n';
  }
  if (!cfg.out.empty()) write_text(fs::path(cfg.out) / "eval.csv", csv.str());
  out << csv.str();
  return kExitOk;
}

void report_failure(std::ostream& err, int code, std::string_view kind, std::string_view message,
                    const json& details = nullptr) {
  json j = {{"error", kind}, {"message", message}, {"exit_code", code}};
  if (!details.is_null()) j["details"] = details;
  err << j.dump() << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"sxcad: sketch-extrude CAD programs, meshes and metrics"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "sxcad 0.1.0");

  app.add_option("--tess-tol", cfg.tess_tol, "Absolute tessellation tolerance (default: relative)")
      ->check(CLI::PositiveNumber);
  app.add_option("--closure-tol", cfg.closure_tol, "Absolute loop-closure tolerance (default: relative)")
      ->check(CLI::PositiveNumber);
  app.add_option("--samples", cfg.samples, "Surface samples per cloud")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "Random seed");
  app.add_option("--provider", cfg.provider, "Structure provider")->check(CLI::IsMember({"fixture", "http"}));
  app.add_option("--fixtures", cfg.fixtures, "Fixture directory for --provider fixture");
  app.add_option("--endpoint", cfg.endpoint, "Chat-completions URL for --provider http");
  app.add_option("--api-key-env", cfg.api_key_env, "Environment variable holding the API key");
  app.add_option("--model", cfg.model_name, "Remote model name");
  app.add_option("--cache", cfg.cache_dir, "Response cache directory for --provider http");
  app.add_option("--embedder-endpoint", cfg.embedder_endpoint, "Embedding service URL (default: offline stub)");
  app.add_option("--jobs", cfg.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", cfg.out, "Output directory");

  std::string file, file2;
  auto* parse_cmd = app.add_subcommand("parse", "CAD text to program JSON");
  parse_cmd->add_option("file", file, "CAD text file")->required();
  auto* validate_cmd = app.add_subcommand("validate", "Validation report (exit 0 iff valid)");
  validate_cmd->add_option("file", file, "CAD text or program JSON")->required();
  auto* mesh_cmd = app.add_subcommand("mesh", "Compile to OBJ plus a label sidecar");
  mesh_cmd->add_option("file", file, "Program")->required();
  auto* sample_cmd = app.add_subcommand("sample", "Labeled surface point cloud");
  sample_cmd->add_option("file", file, "Program")->required();
  auto* metrics_cmd = app.add_subcommand("metrics", "CD, Seg Acc and Seg mIoU of a prediction");
  metrics_cmd->add_option("pred", file, "Predicted program or .pts cloud")->required();
  metrics_cmd->add_option("gt", file2, "Ground-truth program or .pts cloud")->required();
  metrics_cmd->add_flag("--squared", cfg.squared, "Average squared distances");
  metrics_cmd->add_flag("--row", cfg.row, "Print a table row instead of JSON");
  auto* cadify_cmd = app.add_subcommand("cadify", "Match, rescale and audit predictions against ground truth");
  cadify_cmd->add_option("dir", file, "Directory of <key>.cad + <key>.gt.json pairs")->required();
  auto* infer_cmd = app.add_subcommand("infer", "Query the structure provider and parse the response");
  infer_cmd->add_option("image", file, "Image key (fixture) or image path (http)")->required();
  infer_cmd->add_option("--template", cfg.prompt, "Prompt template: base, reminder, context_example, cot");
  auto* eval_cmd = app.add_subcommand("eval", "Aggregate metrics CSV over a corpus");
  eval_cmd->add_option("dir", file, "Corpus with gt/ and one directory per model")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    report_failure(err, kExitUsage, "usage", e.what());
    return kExitUsage;
  }

  try {
    if (parse_cmd->parsed()) return cmd_parse(cfg, file, out, err);
    if (validate_cmd->parsed()) return cmd_validate(cfg, file, out);
    if (mesh_cmd->parsed()) return cmd_mesh(cfg, file, out);
    if (sample_cmd->parsed()) return cmd_sample(cfg, file, out);
    if (metrics_cmd->parsed()) return cmd_metrics(cfg, file, file2, out);
    if (cadify_cmd->parsed()) return cmd_cadify(cfg, file, out);
    if (infer_cmd->parsed()) return cmd_infer(cfg, file, out);
    if (eval_cmd->parsed()) return cmd_eval(cfg, file, out);
  } catch (const Failure& f) {
    report_failure(err, f.code, f.kind, f.message, f.details);
    return f.code;
  } catch (const ConfigError& e) {
    report_failure(err, kExitProvider, "config", e.what());
    return kExitProvider;
  } catch (const TransportError& e) {
    report_failure(err, kExitProvider, "transport", e.what(), json(e.attempts()));
    return kExitProvider;
  } catch (const ProviderError& e) {
    report_failure(err, kExitProvider, "provider", e.what());
    return kExitProvider;
  } catch (const FormatError& e) {
    report_failure(err, kExitUsage, "format", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    report_failure(err, kExitValidation, "geometry", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    report_failure(err, kExitUsage, "internal", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace sxcad::cli
