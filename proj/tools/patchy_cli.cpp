// patchy: receptive-field extraction, benchmarks and training from the shell.
//
// Exit codes: 0 success, 1 check failed (gridcheck mismatch), 2 usage or
// input error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "patchy/patchy.hpp"

namespace {

using json = nlohmann::ordered_json;
using patchy::errc;
namespace fs = std::filesystem;

constexpr int exit_ok = 0;
constexpr int exit_fail = 1;
constexpr int exit_usage = 2;

struct Manifest {
  std::string command;
  json parameters = json::object();
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  void emit(const std::string& path) const {
    json j;
    j["command"] = command;
    j["parameters"] = parameters;
    j["seed"] = seed;
    j["version"] = patchy::version;
    j["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    j["outputs"] = outputs;
    if (path.empty()) {
      std::cerr << j.dump() << "\n";
    } else {
      std::ofstream out(path);
      if (!out) throw patchy::error(errc::missing_file, "cannot write manifest " + path);
      out << j.dump(2) << "\n";
    }
  }
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw patchy::error(errc::missing_file, "cannot write " + path);
  out << text;
}

patchy::LabelingProcedure procedure_or_throw(const std::string& name, std::uint64_t seed) {
  auto p = patchy::labeling_by_name(name, seed);
  if (!p) throw patchy::error(errc::bad_params, "unknown labeling '" + name + "'");
  return *p;
}

std::vector<int> read_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw patchy::error(errc::missing_file, path.string());
  std::vector<int> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto t = patchy::detail::trim(line);
    if (t.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(std::string(t), &used));
      if (used != t.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw patchy::error(errc::malformed_line, path.string() + ":" + std::to_string(n) + ": expected integer label");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

struct ExtractArgs {
  std::string data, name, labeling = "wl", width = "avg", out, labels_out, scope = "graph";
  std::size_t k = 10, stride = 1;
  std::uint64_t seed = 0;
};

int run_extract(const ExtractArgs& a, const std::string& manifest_path) {
  Manifest m;
  m.command = "extract";
  m.seed = a.seed;
  auto bundle = patchy::load_tu_dataset(a.data, a.name);
  std::size_t w = 0;
  if (a.width == "avg") {
    w = static_cast<std::size_t>(std::lround(bundle.mean_node_count()));
  } else {
    try {
      std::size_t used = 0;
      auto v = std::stoll(a.width, &used);
      if (used != a.width.size() || v < 1) throw std::invalid_argument(a.width);
      w = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw patchy::error(errc::bad_params, "--w must be a positive integer or 'avg'");
    }
  }
  if (a.scope != "graph" && a.scope != "neighborhood")
    throw patchy::error(errc::bad_params, "--scope must be 'graph' or 'neighborhood'");
  auto proc = procedure_or_throw(a.labeling, a.seed);
  patchy::PatchConfig cfg{w, a.stride, a.k,
                          a.scope == "graph" ? patchy::LabelingScope::graph : patchy::LabelingScope::neighborhood};
  if (a.stride < 1) throw patchy::error(errc::bad_params, "--stride must be positive");

  std::vector<patchy::TensorBatch> batches;
  batches.reserve(bundle.graphs.size());
  for (const auto& g : bundle.graphs) batches.push_back(patchy::graph_to_tensors(g, proc, cfg));
  patchy::write_tensor_file(a.out, batches, proc.name);

  const auto labels_path = a.labels_out.empty() ? a.out + ".labels" : a.labels_out;
  std::string text;
  for (auto y : bundle.class_labels) text += std::to_string(y) + "\n";
  write_text(labels_path, text);

  m.parameters = {{"data", a.data}, {"name", a.name},    {"labeling", a.labeling}, {"w", w},
                  {"k", a.k},       {"stride", a.stride}, {"scope", a.scope},      {"graph_count", batches.size()}};
  m.outputs = {a.out, labels_path};
  std::cout << "graphs=" << batches.size() << " w=" << w << " k=" << a.k << " a_v=" << bundle.attributes.node_channels()
            << " a_e=" << bundle.attributes.edge_channels() << "\n";
  m.emit(manifest_path);
  return exit_ok;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::string graph = "torus", labeling = "wl", csv;
  std::size_t n = 10000, k = 10;
  double seconds = 1.0;
  std::uint64_t seed = 0;
};

patchy::Graph bench_graph(const BenchArgs& a) {
  const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(a.n))));
  if (a.graph == "torus") return patchy::generate_grid(side, side, true);
  if (a.graph == "grid") return patchy::generate_grid(side, side, false);
  if (a.graph == "random") return patchy::generate_random_powerlaw(a.n, 3, a.seed);
  if (a.graph == "preferential") return patchy::generate_preferential_attachment(a.n, 3, a.seed);
  throw patchy::error(errc::bad_params, "unknown graph kind '" + a.graph + "'");
}

int run_bench(const BenchArgs& a, const std::string& manifest_path) {
  Manifest m;
  m.command = "bench";
  m.seed = a.seed;
  if (a.k < 1) throw patchy::error(errc::bad_params, "--k must be positive");
  if (!(a.seconds > 0)) throw patchy::error(errc::bad_params, "--seconds must be positive");
  const auto g = bench_graph(a);
  const auto proc = procedure_or_throw(a.labeling, a.seed);

  using clock = std::chrono::steady_clock;
  patchy::FieldStats stats;
  const auto t0 = clock::now();
  const auto l = proc(g);
  stats.labeling_seconds += std::chrono::duration<double>(clock::now() - t0).count();
  double elapsed = 0;
  std::size_t v = 0;
  while (stats.fields == 0 || elapsed < a.seconds) {
    (void)patchy::receptive_field(g, static_cast<patchy::NodeId>(v), l, a.k, &stats);
    v = (v + 1) % g.node_count();
    elapsed = std::chrono::duration<double>(clock::now() - t0).count();
  }
  const double rate = static_cast<double>(stats.fields) / elapsed;
  std::string csv =
      "graph,n,edges,k,labeling,fields,seconds,fields_per_second,labeling_seconds,assembly_seconds,canonical_seconds\n";
  csv += a.graph + "," + std::to_string(g.node_count()) + "," + std::to_string(g.edge_count()) + "," +
         std::to_string(a.k) + "," + a.labeling + "," + std::to_string(stats.fields) + "," + fmt(elapsed) + "," +
         fmt(rate) + "," + fmt(stats.labeling_seconds) + "," + fmt(stats.assembly_seconds) + "," +
         fmt(stats.canonical_seconds) + "\n";
  write_text(a.csv, csv);
  m.parameters = {{"graph", a.graph}, {"n", a.n}, {"k", a.k}, {"labeling", a.labeling}, {"seconds", a.seconds}};
  if (!a.csv.empty()) m.outputs = {a.csv};
  m.emit(manifest_path);
  return exit_ok;
}

// ---------------------------------------------------------------------------

struct CompareArgs {
  std::string data, name, csv;
  std::vector<std::string> labelings{"wl", "degree", "betweenness", "random"};
  std::size_t k = 10, samples = 200, pairs = 1000;
  std::uint64_t seed = 0;
};

int run_compare(const CompareArgs& a, const std::string& manifest_path) {
  Manifest m;
  m.command = "compare-labelings";
  m.seed = a.seed;
  if (a.pairs < 1) throw patchy::error(errc::bad_params, "--pairs must be positive");
  if (a.samples < 1) throw patchy::error(errc::bad_params, "--samples must be positive");
  auto bundle = patchy::load_tu_dataset(a.data, a.name);
  std::vector<patchy::LabelingProcedure> procs;
  for (const auto& n : a.labelings) procs.push_back(procedure_or_throw(n, a.seed));
  auto collection = patchy::sample_neighborhood_collection(bundle.graphs, a.k, a.samples, a.seed);
  auto reports = patchy::compare_labelings(collection, procs, a.pairs, a.seed);
  std::string csv = "labeling,theta_hat,pairs,samples,k,seed\n";
  for (const auto& r : reports)
    csv += r.labeling + "," + fmt(r.theta_hat) + "," + std::to_string(r.pair_count) + "," +
           std::to_string(a.samples) + "," + std::to_string(a.k) + "," + std::to_string(a.seed) + "\n";
  write_text(a.csv, csv);
  m.parameters = {{"data", a.data}, {"name", a.name}, {"k", a.k}, {"samples", a.samples}, {"pairs", a.pairs},
                  {"labelings", a.labelings}};
  if (!a.csv.empty()) m.outputs = {a.csv};
  m.emit(manifest_path);
  return exit_ok;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string tensors, labels, model = "pscn", report, checkpoint;
  patchy::nn::TrainConfig cfg;
  std::size_t folds = 10, repeats = 1;
};

int run_train(const TrainArgs& a, const std::string& manifest_path) {
  Manifest m;
  m.command = "train";
  m.seed = a.cfg.seed;
  if (a.model != "pscn" && a.model != "pslr") throw patchy::error(errc::bad_params, "--model must be pscn or pslr");
  if (a.cfg.epochs < 1) throw patchy::error(errc::bad_params, "--epochs must be positive");
  a.cfg.validate();
  auto tf = patchy::read_tensor_file(a.tensors);
  auto labels = read_labels(a.labels);
  if (labels.size() != tf.batches.size())
    throw patchy::error(errc::shape_mismatch, a.tensors + " holds " + std::to_string(tf.batches.size()) +
                                                  " graphs but " + a.labels + " has " + std::to_string(labels.size()) +
                                                  " labels");
  if (a.cfg.merge_edges && tf.header.edge_channels == 0)
    throw patchy::error(errc::bad_params, "--merge-edges needs edge attributes in the tensor file");

  patchy::nn::CvReport rep = a.model == "pscn"
                                 ? patchy::nn::cross_validate(tf.batches, labels, a.cfg, a.folds, a.repeats)
                                 : patchy::nn::cross_validate_logreg(tf.batches, labels, a.cfg, a.folds, a.repeats);
  write_text(a.report, rep.to_csv());
  std::cerr << a.model << " accuracy " << fmt(rep.mean) << " +- " << fmt(rep.stddev) << " over " << rep.folds.size()
            << " folds\n";
  if (!a.checkpoint.empty()) {
    if (a.model == "pscn") {
      auto r = patchy::nn::train(tf.batches, labels, a.cfg);
      patchy::nn::save_checkpoint(a.checkpoint, patchy::nn::make_checkpoint(r.model, a.cfg));
    } else {
      auto r = patchy::nn::train_logreg(tf.batches, labels, a.cfg);
      patchy::nn::save_checkpoint(a.checkpoint, patchy::nn::make_checkpoint(r.model, tf.batches.front(), a.cfg));
    }
    m.outputs.push_back(a.checkpoint);
  }
  if (!a.report.empty()) m.outputs.push_back(a.report);
  m.parameters = {{"tensors", a.tensors},
                  {"labels", a.labels},
                  {"model", a.model},
                  {"epochs", a.cfg.epochs},
                  {"batch", a.cfg.batch_size},
                  {"lr", a.cfg.learning_rate},
                  {"decay", a.cfg.decay},
                  {"epsilon", a.cfg.epsilon},
                  {"dropout", a.cfg.dropout},
                  {"weight_decay", a.cfg.weight_decay},
                  {"merge_edges", a.cfg.merge_edges},
                  {"folds", a.folds},
                  {"repeats", a.repeats}};
  m.emit(manifest_path);
  return exit_ok;
}

// ---------------------------------------------------------------------------

int run_gridcheck(std::size_t rows, std::size_t cols, std::size_t mm, std::size_t stride,
                  const std::string& manifest_path) {
  Manifest m;
  m.command = "gridcheck";
  auto rep = patchy::verify_grid_equivalence(rows, cols, mm, stride);
  std::cout << (rep.match ? "PASS" : "FAIL") << " rows=" << rows << " cols=" << cols << " m=" << mm
            << " stride=" << stride << " fields=" << rep.fields << "\n";
  if (rep.match) {
    const auto side = 2 * mm - 1;
    std::cout << "slot of pixel:\n";
    for (std::size_t r = 0; r < side; ++r) {
      for (std::size_t c = 0; c < side; ++c) std::cout << (c ? " " : "") << rep.slot_of_pixel[r * side + c];
      std::cout << "\n";
    }
  }
  m.parameters = {{"rows", rows}, {"cols", cols}, {"m", mm}, {"stride", stride}, {"match", rep.match}};
  m.emit(manifest_path);
  return rep.match ? exit_ok : exit_fail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Receptive-field extraction and patch-network training for graphs"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string manifest;
  app.add_option("--manifest", manifest, "Write the run manifest (JSON) here instead of stderr");

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Write the tensors of a TU dataset");
  extract->add_option("--data", ex.data, "Dataset directory")->required();
  extract->add_option("--name", ex.name, "Dataset name (file prefix)")->required();
  extract->add_option("--labeling", ex.labeling, "wl, degree, betweenness or random");
  extract->add_option("--w", ex.width, "Fields per graph, or 'avg' for the rounded mean node count");
  extract->add_option("--k", ex.k, "Field size");
  extract->add_option("--stride", ex.stride, "Stride through the node sequence");
  extract->add_option("--scope", ex.scope, "Labeling scope for normalization: graph or neighborhood");
  extract->add_option("--seed", ex.seed, "Seed for the random labeling");
  extract->add_option("--out", ex.out, "Tensor file")->required();
  extract->add_option("--labels-out", ex.labels_out, "Class label file (default: OUT.labels)");

  BenchArgs be;
  auto* bench = app.add_subcommand("bench", "Measure receptive fields per second");
  bench->add_option("--graph", be.graph, "torus, grid, random or preferential");
  bench->add_option("--n", be.n, "Node count");
  bench->add_option("--k", be.k, "Field size");
  bench->add_option("--labeling", be.labeling, "wl, degree, betweenness or random");
  bench->add_option("--seconds", be.seconds, "Minimum measuring time");
  bench->add_option("--seed", be.seed, "Generator seed");
  bench->add_option("--csv", be.csv, "Report file (default: stdout)");

  CompareArgs co;
  auto* compare = app.add_subcommand("compare-labelings", "Estimate theta-hat for several labelings");
  compare->add_option("--data", co.data, "Dataset directory")->required();
  compare->add_option("--name", co.name, "Dataset name")->required();
  compare->add_option("--k", co.k, "Neighborhood size");
  compare->add_option("--samples", co.samples, "Sampled neighborhoods");
  compare->add_option("--pairs", co.pairs, "Sampled pairs");
  compare->add_option("--seed", co.seed, "Seed");
  compare->add_option("--labelings", co.labelings, "Labelings to compare")->delimiter(',');
  compare->add_option("--csv", co.csv, "Report file (default: stdout)");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Cross-validate a classifier on extracted tensors");
  train->add_option("--tensors", tr.tensors, "Tensor file")->required();
  train->add_option("--labels", tr.labels, "Class label file")->required();
  train->add_option("--model", tr.model, "pscn or pslr");
  train->add_option("--epochs", tr.cfg.epochs, "Training epochs");
  train->add_option("--batch", tr.cfg.batch_size, "Minibatch size");
  train->add_option("--lr", tr.cfg.learning_rate, "Learning rate");
  train->add_option("--decay", tr.cfg.decay, "rmsprop decay");
  train->add_option("--dropout", tr.cfg.dropout, "Dropout rate on the dense layer");
  train->add_option("--weight-decay", tr.cfg.weight_decay, "L2 penalty (pslr)");
  train->add_option("--seed", tr.cfg.seed, "Seed");
  train->add_option("--folds", tr.folds, "Cross-validation folds");
  train->add_option("--repeats", tr.repeats, "Cross-validation repeats");
  train->add_flag("--merge-edges", tr.cfg.merge_edges, "Add the edge branch");
  train->add_option("--report", tr.report, "CSV report (default: stdout)");
  train->add_option("--checkpoint", tr.checkpoint, "Also fit on all data and save the model here");

  std::size_t rows = 0, cols = 0, mm = 2, stride = 1;
  auto* grid = app.add_subcommand("gridcheck", "Compare grid fields with image patches");
  grid->add_option("--rows", rows, "Grid rows")->required();
  grid->add_option("--cols", cols, "Grid columns")->required();
  grid->add_option("--m", mm, "Patch half-size; the patch side is 2m-1");
  grid->add_option("--stride", stride, "Patch stride");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (*extract) return run_extract(ex, manifest);
    if (*bench) return run_bench(be, manifest);
    if (*compare) return run_compare(co, manifest);
    if (*train) return run_train(tr, manifest);
    if (*grid) return run_gridcheck(rows, cols, mm, stride, manifest);
  } catch (const patchy::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  }
  return exit_usage;
}
