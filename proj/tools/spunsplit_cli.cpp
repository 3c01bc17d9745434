// Command-line front end. Every subcommand prints one JSON document on
// stdout. Exit codes: 0 ok, 1 violation or infeasible, 2 malformed input,
// 3 internal failure.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "spunsplit/errors.hpp"
#include "spunsplit/io.hpp"

namespace fs = std::filesystem;
using namespace spunsplit;

namespace {

enum Exit { kOk = 0, kViolation = 1, kMalformed = 2, kInternal = 3 };

struct Outcome {
  int code = kOk;
  Json output;
};

struct Options {
  std::string cut = "all";
  bool integer = false;
  std::string bound = "dmax";
  std::string out_file;
  bool probe = false;
  std::string oracle_mode = "feasibility";
  std::string decomposition_file;
};

Multiflow require_flow(const InstanceDocument& doc) {
  if (!doc.flow) throw InputError("instance file has no flow");
  return *doc.flow;
}

Outcome cmd_recognize(const InstanceDocument& doc, const Options&) {
  const Instance& inst = doc.instance;
  if (inst.is_series_parallel()) return {kOk, sp_tree_to_json(inst)};
  return {kViolation, witness_to_json(inst.graph(), *inst.sp_failure())};
}

Outcome cmd_check(const InstanceDocument& doc, const Options& opt) {
  std::vector<CutMode> modes;
  if (opt.cut == "all") {
    modes = {CutMode::Classical, CutMode::Strengthened, CutMode::Strong};
  } else {
    modes = {parse_cut_mode(opt.cut)};
  }
  Outcome result;
  result.output["checks"] = Json::array();
  for (CutMode mode : modes) {
    Json entry = {{"mode", cut_mode_name(mode)}};
    if (auto cert = check_cut(doc.instance, mode)) {
      entry["ok"] = false;
      entry["certificate"] = certificate_to_json(doc.instance, *cert);
      result.code = kViolation;
    } else {
      entry["ok"] = true;
    }
    result.output["checks"].push_back(std::move(entry));
  }
  return result;
}

Outcome cmd_solve(const InstanceDocument& doc, const Options& opt) {
  const Instance& inst = doc.instance;
  const auto solution = opt.integer ? feasible_integer_multiflow(inst) : solve_multiflow(inst);
  Outcome result;
  result.output["feasible"] = solution.feasible;
  result.output["integer"] = opt.integer;
  if (solution.feasible) {
    result.output["flow"] = flow_to_json(inst, solution.flow);
    return result;
  }
  result.code = kViolation;
  result.output["transshipment_cut"] = transshipment_cut_to_json(inst, *solution.cut);
  try {
    if (auto cert = check_cut(inst, CutMode::Strengthened)) {
      result.output["certificate"] = certificate_to_json(inst, *cert);
    }
  } catch (const SizeError&) {
    result.output["certificate"] = nullptr;
  }
  return result;
}

Outcome cmd_almost(const InstanceDocument& doc, const Options&) {
  const auto almost = make_almost_unsplittable(doc.instance, require_flow(doc));
  return {kOk, almost_to_json(doc.instance, almost)};
}

Outcome cmd_decompose(const InstanceDocument& doc, const Options& opt) {
  const Instance& inst = doc.instance;
  const Multiflow flow = require_flow(doc);
  const BoundMode mode = parse_bound_mode(opt.bound);
  const auto result = decompose_unsplittable(inst, flow, mode);
  const auto verification = verify_decomposition(inst, flow, result.decomposition, mode);
  Outcome out;
  out.output["report"] = bound_report_to_json(result.report);
  out.output["verification"] = verification_to_json(verification);
  const Json decomposition = decomposition_to_json(inst, result.decomposition, mode);
  if (opt.out_file.empty()) {
    out.output["decomposition"] = decomposition;
  } else {
    std::ofstream file(opt.out_file);
    if (!file) throw InputError("cannot write " + opt.out_file);
    file << dump_json(decomposition);
    out.output["written"] = opt.out_file;
  }
  if (opt.probe) out.output["probe"] = probe_to_json(inst, matrix_decomposability_probe(inst, flow));
  if (!verification.ok()) out.code = kInternal;
  return out;
}

Outcome cmd_verify(const InstanceDocument& doc, const Options& opt) {
  const Instance& inst = doc.instance;
  const Multiflow flow = require_flow(doc);
  std::string stored_hash;
  std::optional<BoundMode> stored_mode;
  const auto decomposition =
      decomposition_from_json(inst, read_json_file(opt.decomposition_file), &stored_hash, &stored_mode);
  const BoundMode mode = stored_mode.value_or(parse_bound_mode(opt.bound));
  auto report = verify_decomposition(inst, flow, decomposition, mode);
  if (!stored_hash.empty() && stored_hash != reconstruction_hash(inst, decomposition)) {
    report.failures.push_back("reconstruction hash does not match the terms");
  }
  Json output = verification_to_json(report);
  output["bound_mode"] = bound_mode_name(mode);
  return {report.ok() ? kOk : kViolation, output};
}

Outcome cmd_oracle(const InstanceDocument& doc, const Options& opt) {
  const Instance& inst = doc.instance;
  const auto limits = OracleLimits::from_environment();
  Outcome out;
  if (opt.oracle_mode == "paths") {
    Json paths = Json::object();
    for (const auto& c : inst.commodities()) {
      Json list = Json::array();
      for (const auto& path : enumerate_paths(inst.graph(), c.source, c.sink, limits.max_paths)) {
        Json arcs = Json::array();
        for (ArcId e : path) arcs.push_back(inst.graph().arc_name(e));
        list.push_back(std::move(arcs));
      }
      paths[c.name] = std::move(list);
    }
    out.output["paths"] = std::move(paths);
  } else if (opt.oracle_mode == "feasibility") {
    const auto found = exhaustive_feasibility(inst, limits);
    out.output["feasible"] = found.has_value();
    if (found) {
      out.output["flow"] = flow_to_json(inst, *found);
    } else {
      out.code = kViolation;
    }
  } else {
    const auto probe = matrix_decomposability_probe(inst, require_flow(doc), limits);
    out.output["probe"] = probe_to_json(inst, probe);
    if (probe.verdict == ProbeVerdict::Impossible) out.code = kViolation;
  }
  return out;
}

using Command = Outcome (*)(const InstanceDocument&, const Options&);

Outcome run_one(Command command, const fs::path& file, const Options& opt) {
  try {
    return command(read_instance_file(file), opt);
  } catch (const InputError& err) {
    return {kMalformed, {{"error", "malformed input"}, {"message", err.what()}}};
  } catch (const SizeError& err) {
    return {kMalformed, {{"error", "too large"}, {"message", err.what()}}};
  } catch (const std::invalid_argument& err) {
    return {kMalformed, {{"error", "unsupported input"}, {"message", err.what()}}};
  } catch (const std::exception& err) {
    return {kInternal, {{"error", "internal"}, {"message", err.what()}}};
  }
}

// A directory runs every *.json file in name order, `jobs` at a time.
int run(Command command, const std::string& target, const Options& opt, int jobs) {
  if (!fs::is_directory(target)) {
    const Outcome outcome = run_one(command, target, opt);
    std::cout << dump_json(outcome.output);
    return outcome.code;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(target)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Outcome> outcomes(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < files.size(); k = next++) outcomes[k] = run_one(command, files[k], opt);
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::max(1, jobs); ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  Json results = Json::array();
  int code = kOk;
  for (std::size_t k = 0; k < files.size(); ++k) {
    results.push_back({{"file", files[k].filename().string()},
                       {"exit", outcomes[k].code},
                       {"output", outcomes[k].output}});
    code = std::max(code, outcomes[k].code);
  }
  std::cout << dump_json({{"results", results}});
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact unsplittable decompositions of multiflows on series-parallel digraphs"};
  app.require_subcommand(1);
  Options opt;
  std::string target;
  int jobs = 1;
  Command command = nullptr;

  auto add = [&](const char* name, const char* help, Command cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("instance", target, "Instance file or directory of instance files")->required();
    sub->add_option("--jobs", jobs, "Parallel workers for directories")->check(CLI::PositiveNumber);
    sub->callback([&command, cmd] { command = cmd; });
    return sub;
  };
  add("recognize", "Build the sp-tree or report a non-series-parallel kernel", cmd_recognize);
  add("check", "Check cut conditions", cmd_check)
      ->add_option("--cut", opt.cut, "classical, strengthened, strong or all")
      ->check(CLI::IsMember({"classical", "strengthened", "strong", "all"}));
  add("solve", "Find a feasible multiflow or a cut certificate", cmd_solve)
      ->add_flag("--integer", opt.integer, "Require an integral multiflow");
  add("almost", "Transform the instance flow into an almost-unsplittable one", cmd_almost);
  auto* decompose = add("decompose", "Decompose the instance flow into unsplittable flows", cmd_decompose);
  decompose->add_option("--bound", opt.bound, "dmax or 2dmax")->check(CLI::IsMember({"dmax", "2dmax"}));
  decompose->add_option("--out", opt.out_file, "Write the decomposition file here");
  decompose->add_flag("--probe", opt.probe, "Also run the commodity-matrix probe");
  auto* verify = add("verify", "Verify a decomposition file against the instance flow", cmd_verify);
  verify->add_option("decomposition", opt.decomposition_file, "Decomposition file")->required();
  verify->add_option("--bound", opt.bound, "Bound mode if the file does not record one")
      ->check(CLI::IsMember({"dmax", "2dmax"}));
  add("oracle", "Brute-force reference computations", cmd_oracle)
      ->add_option("--mode", opt.oracle_mode, "paths, feasibility or probe")
      ->check(CLI::IsMember({"paths", "feasibility", "probe"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kMalformed;
  }
  return run(command, target, opt, jobs);
}
