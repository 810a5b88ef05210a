#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "sloppy/harness.hpp"
#include "sloppy/trace.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TraceArgs {
  std::size_t k = 0;
  std::uint64_t seed = 1;
  std::size_t ops = 200'000;
  std::string dist = "uniform";
  std::string trace_path;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw UsageError("cannot write " + path);
}

// Loads --trace or generates one; returns the trace and a provenance line.
std::pair<sloppy::Trace, std::string> load_trace(TraceArgs& a) {
  if (!a.trace_path.empty()) {
    sloppy::Trace t =
        sloppy::parse_trace(read_file(a.trace_path),
                            a.k ? std::optional<std::size_t>(a.k) : std::nullopt);
    if (!a.k) {
      if (!t.k) throw UsageError("--k is required when the trace has no '# k=' header");
      a.k = *t.k;
    }
    return {std::move(t), "trace=" + a.trace_path};
  }
  if (!a.k) throw UsageError("--k is required");
  const auto dist = sloppy::parse_distribution(a.dist);
  std::string header = "generator=" + std::string(sloppy::kGeneratorName) +
                       " seed=" + std::to_string(a.seed) + " dist=" + a.dist +
                       " ops=" + std::to_string(a.ops);
  return {sloppy::gen_trace(dist, a.seed, a.ops, a.k), header};
}

void add_trace_flags(CLI::App* cmd, TraceArgs& a) {
  cmd->add_option("--k", a.k, "number of quantile groups")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", a.seed, "generator seed");
  cmd->add_option("--ops", a.ops, "number of generated operations");
  cmd->add_option("--dist", a.dist, "uniform | skew | ascending | adversarial-shrink");
  cmd->add_option("--trace", a.trace_path, "trace file to replay instead of generating");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selectable sloppy heap: verification, benchmarks and approximate sorting"};
  app.require_subcommand(1);

  TraceArgs targs;
  std::string out_path, csv_path, input_path;
  bool variant1 = false;
  std::size_t audit_every = 10'000;

  auto* gen = app.add_subcommand("gen", "write a generated trace");
  add_trace_flags(gen, targs);
  gen->add_option("--out", out_path, "output file (default: stdout)");

  auto* verify = app.add_subcommand("verify", "replay a trace against the rank oracle");
  add_trace_flags(verify, targs);
  verify->add_option("--csv", csv_path, "per-operation CSV output");
  verify->add_option("--out", out_path, "summary output (default: stdout)");
  verify->add_flag("--variant1", variant1, "also replay on the phased baseline");
  verify->add_option("--audit-every", audit_every, "full audit period in ops (0: end only)");

  auto* bench = app.add_subcommand("bench", "meter per-operation cost");
  add_trace_flags(bench, targs);
  bench->add_option("--csv", csv_path, "per-operation CSV output");
  bench->add_option("--out", out_path, "summary output (default: stdout)");

  auto* sort = app.add_subcommand("sort", "approximate sort, then exact fixup");
  sort->add_option("input", input_path, "file of newline-separated integers")->required();
  sort->add_option("--k", targs.k, "number of quantile groups")
      ->required()
      ->check(CLI::PositiveNumber);
  sort->add_option("--out", out_path, "sorted output (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kUsage;
  }

  try {
    if (*gen) {
      if (!targs.trace_path.empty()) throw UsageError("gen does not take --trace");
      auto [trace, header] = load_trace(targs);
      const std::string text = sloppy::emit_trace(trace);
      if (out_path.empty())
        std::cout << text;
      else
        write_file(out_path, text);
      return kPass;
    }

    if (*verify || *bench) {
      auto [trace, header] = load_trace(targs);
      sloppy::RunOptions opts;
      opts.keep_records = !csv_path.empty();
      sloppy::RunReport rep;
      if (*verify) {
        opts.with_variant1 = variant1;
        opts.audit_every = audit_every;
        rep = sloppy::run_verify(trace, targs.k, opts);
      } else {
        rep = sloppy::run_bench(trace, targs.k, opts);
      }
      rep.header = header;
      if (!csv_path.empty()) {
        std::ostringstream csv;
        sloppy::write_csv(csv, rep);
        write_file(csv_path, csv.str());
      }
      std::ostringstream summary;
      sloppy::write_summary(summary, rep);
      if (out_path.empty())
        std::cout << summary.str();
      else
        write_file(out_path, summary.str());
      return rep.passed() ? kPass : kFail;
    }

    const std::vector<sloppy::Key> input = sloppy::parse_integers(read_file(input_path));
    const sloppy::SortReport rep = sloppy::run_sort(input, targs.k);
    std::ostringstream sorted;
    for (sloppy::Key x : rep.sorted) sorted << x << '\n';
    if (out_path.empty())
      std::cout << sorted.str();
    else
      write_file(out_path, sorted.str());
    sloppy::write_summary(std::cerr, rep);
    return rep.passed() ? kPass : kFail;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const sloppy::TraceParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
