// perfect-sim: command-line front end for the samplers and the verification
// suites. One record per sample is streamed to the output sink; all
// randomness flows from --seed, with per-sample streams derived as
// seed + sample index so identical invocations produce identical bytes.

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "perfectsim/perfectsim.hpp"

namespace {

using nlohmann::ordered_json;

struct CommonOptions {
  std::uint64_t samples = 1;
  std::uint64_t seed = 0;
  std::string out = "-";
  std::string format = "jsonl";
};

void add_common_options(CLI::App& cmd, CommonOptions& opts) {
  cmd.add_option("--samples", opts.samples, "number of samples to draw")
      ->required()
      ->check(CLI::PositiveNumber);
  cmd.add_option("--seed", opts.seed, "master seed (decimal 64-bit unsigned)")
      ->default_val(std::uint64_t{0});
  cmd.add_option("--out", opts.out, "output path ('-' for stdout)");
  cmd.add_option("--format", opts.format, "output format")
      ->check(CLI::IsMember({"jsonl", "csv"}));
}

CLI::Validator strictly_greater(double bound, const std::string& label) {
  return CLI::Validator(
      [bound, label](std::string& input) -> std::string {
        double value = 0.0;
        try {
          value = std::stod(input);
        } catch (...) {
          return label + ": expected a number";
        }
        if (!(value > bound)) {
          return label + " must exceed " + std::to_string(bound);
        }
        return {};
      },
      "");
}

CLI::Validator open_unit_interval(const std::string& label) {
  return CLI::Validator(
      [label](std::string& input) -> std::string {
        double value = 0.0;
        try {
          value = std::stod(input);
        } catch (...) {
          return label + ": expected a number";
        }
        if (!(value > 0.0 && value < 1.0)) {
          return label + " must lie strictly inside (0,1)";
        }
        return {};
      },
      "");
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += "\"\"";
    else quoted += c;
  }
  quoted += '"';
  return quoted;
}

// Streams one record per sample, as JSONL (per-sampler schema) or CSV with
// the fixed header value,depth,flips,draws.
class OutputSink {
 public:
  OutputSink(const std::string& path, const std::string& format)
      : csv_(format == "csv") {
    if (path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw perfectsim::Error("cannot open output file: " + path);
      out_ = &file_;
    } else {
      out_ = &std::cout;
    }
  }

  void value_record(const ordered_json& value, std::int64_t depth, std::uint64_t draws) {
    if (csv_) {
      row(value, depth, 0, draws);
      return;
    }
    ordered_json record;
    record["value"] = value;
    record["depth"] = depth;
    record["draws"] = draws;
    *out_ << record.dump() << '\n';
  }

  void factory_record(int bit, std::uint64_t flips, std::int64_t depth,
                      std::uint64_t draws) {
    if (csv_) {
      row(bit, depth, flips, draws);
      return;
    }
    ordered_json record;
    record["bit"] = bit;
    record["flips"] = flips;
    record["depth"] = depth;
    *out_ << record.dump() << '\n';
  }

 private:
  void row(const ordered_json& value, std::int64_t depth, std::uint64_t flips,
           std::uint64_t draws) {
    if (!header_written_) {
      *out_ << "value,depth,flips,draws\n";
      header_written_ = true;
    }
    const std::string text =
        value.is_string() ? value.get<std::string>() : value.dump();
    *out_ << csv_quote(text) << ',' << depth << ',' << flips << ',' << draws << '\n';
  }

  std::ofstream file_;
  std::ostream* out_ = nullptr;
  bool csv_ = false;
  bool header_written_ = false;
};

perfectsim::RandomStream sample_stream(const CommonOptions& opts, std::uint64_t index) {
  return perfectsim::stream_from_seed(opts.seed + index);
}

perfectsim::CoinSource sample_coin(const CommonOptions& opts, std::uint64_t index,
                                   double p) {
  return perfectsim::CoinSource(
      p, perfectsim::stream_from_seed(perfectsim::derive_seed(opts.seed + index, 1)));
}

perfectsim::ProbabilityTable load_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw perfectsim::Error("cannot open table file: " + path);
  std::vector<perfectsim::ProbabilityTable::Entry> entries;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw perfectsim::Error("table file: line " + std::to_string(line_number) +
                              " is not 'value,probability'");
    }
    const std::string value = line.substr(0, comma);
    const std::string prob_text = line.substr(comma + 1);
    double prob = 0.0;
    try {
      prob = std::stod(prob_text);
    } catch (...) {
      if (line_number == 1) continue;  // header row
      throw perfectsim::Error("table file: bad probability on line " +
                              std::to_string(line_number));
    }
    entries.emplace_back(value, prob);
  }
  return perfectsim::ProbabilityTable(std::move(entries));
}

std::set<std::string> parse_accept_set(const std::string& list) {
  std::set<std::string> values;
  std::stringstream ss(list);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) values.insert(token);
  }
  if (values.empty()) throw perfectsim::Error("--accept-set: no values given");
  return values;
}

int run_ar_die(const CommonOptions& opts) {
  OutputSink sink(opts.out, opts.format);
  const auto problem = perfectsim::die_problem();
  for (std::uint64_t i = 0; i < opts.samples; ++i) {
    auto stream = sample_stream(opts, i);
    const auto record = perfectsim::ar_sample(problem, stream);
    sink.value_record(record.value, record.depth, record.randomness_units);
  }
  return 0;
}

int run_ar_custom(const CommonOptions& opts, const std::string& table_path,
                  const std::string& accept_list) {
  OutputSink sink(opts.out, opts.format);
  const auto problem = perfectsim::table_ar_problem(load_table_csv(table_path),
                                                    parse_accept_set(accept_list));
  for (std::uint64_t i = 0; i < opts.samples; ++i) {
    auto stream = sample_stream(opts, i);
    const auto record = perfectsim::ar_sample(problem, stream);
    sink.value_record(record.value, record.depth, record.randomness_units);
  }
  return 0;
}

int run_cftp_toy(const CommonOptions& opts, const std::string& chain) {
  OutputSink sink(opts.out, opts.format);
  const auto update = chain == "reset-walk" ? perfectsim::reset_walk_update()
                                            : perfectsim::reflecting_walk_update();
  for (std::uint64_t i = 0; i < opts.samples; ++i) {
    auto stream = sample_stream(opts, i);
    const auto record =
        chain == "reset-walk"
            ? perfectsim::cftp_single(update, perfectsim::make_exhaustive_detector(), stream)
            : perfectsim::cftp_doubling(update, perfectsim::make_exhaustive_detector(), 2,
                                        stream);
    sink.value_record(record.value, record.depth, record.randomness_units);
  }
  return 0;
}

int run_cftp_ising(const CommonOptions& opts, int width, int height, double beta,
                   std::optional<std::uint64_t> t0) {
  OutputSink sink(opts.out, opts.format);
  auto graph = std::make_shared<const perfectsim::IsingGraph>(
      perfectsim::IsingGraph::grid(width, height));
  const auto update = perfectsim::ising_update_function(graph, beta);
  const auto detector = perfectsim::ising_monotone_detector(graph, beta);
  const std::uint64_t start_t = t0.value_or(static_cast<std::uint64_t>(graph->n));
  for (std::uint64_t i = 0; i < opts.samples; ++i) {
    auto stream = sample_stream(opts, i);
    const auto record = perfectsim::cftp_doubling(update, detector, start_t, stream);
    sink.value_record(perfectsim::encode_spins(record.value.spins), record.depth,
                      record.randomness_units);
  }
  return 0;
}

int run_factory(const CommonOptions& opts, double p,
                const std::function<perfectsim::FactorySample(
                    perfectsim::CoinSource&, perfectsim::RandomStream&)>& factory) {
  OutputSink sink(opts.out, opts.format);
  for (std::uint64_t i = 0; i < opts.samples; ++i) {
    auto coin = sample_coin(opts, i, p);
    auto stream = sample_stream(opts, i);
    const auto sample = factory(coin, stream);
    sink.factory_record(sample.bit, sample.flips, sample.depth, sample.draws);
  }
  return 0;
}

int run_verify(const std::string& suite, std::uint64_t seed, const std::string& out) {
  perfectsim::VerificationReport report;
  if (suite == "all") report = perfectsim::suite::full_suite(seed);
  else if (suite == "ar") report = perfectsim::suite::ar_suite(seed);
  else if (suite == "cftp") report = perfectsim::suite::cftp_suite(seed);
  else if (suite == "factory") report = perfectsim::suite::factory_suite(seed);
  else report = perfectsim::suite::bounds_suite(seed);

  std::ofstream file(out, std::ios::binary);
  if (!file) throw perfectsim::Error("cannot open report file: " + out);
  file << report.to_json().dump(2) << '\n';

  std::size_t passed = 0;
  for (const auto& check : report.checks) {
    if (check.pass) ++passed;
    else std::cerr << "FAIL " << check.name << " statistic=" << check.statistic
                   << " threshold=" << check.threshold << "\n";
  }
  std::cout << "verify: " << passed << "/" << report.checks.size()
            << " checks passed; report written to " << out << "\n";
  return report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"perfect sampling workbench"};
  app.require_subcommand(1);

  std::function<int()> action;

  // ar
  auto* ar = app.add_subcommand("ar", "acceptance/rejection samplers");
  ar->require_subcommand(1);
  {
    auto opts = std::make_shared<CommonOptions>();
    auto* die = ar->add_subcommand("die", "five-sided die from a six-sided die");
    add_common_options(*die, *opts);
    die->callback([&action, opts] { action = [opts] { return run_ar_die(*opts); }; });
  }
  {
    auto opts = std::make_shared<CommonOptions>();
    auto table_path = std::make_shared<std::string>();
    auto accept_list = std::make_shared<std::string>();
    auto* custom = ar->add_subcommand("custom", "AR over an explicit probability table");
    custom->add_option("--table", *table_path, "two-column CSV (value,probability)")
        ->required();
    custom->add_option("--accept-set", *accept_list, "comma-separated accepted values")
        ->required();
    add_common_options(*custom, *opts);
    custom->callback([&action, opts, table_path, accept_list] {
      action = [opts, table_path, accept_list] {
        return run_ar_custom(*opts, *table_path, *accept_list);
      };
    });
  }

  // cftp
  auto* cftp = app.add_subcommand("cftp", "coupling-from-the-past samplers");
  cftp->require_subcommand(1);
  {
    auto opts = std::make_shared<CommonOptions>();
    auto width = std::make_shared<int>(0);
    auto height = std::make_shared<int>(0);
    auto beta = std::make_shared<double>(0.0);
    auto t0 = std::make_shared<std::optional<std::uint64_t>>();
    auto* ising = cftp->add_subcommand("ising", "ferromagnetic Ising heat bath, monotone doubling");
    ising->add_option("--width", *width, "lattice width")->required()->check(CLI::PositiveNumber);
    ising->add_option("--height", *height, "lattice height")->required()->check(CLI::PositiveNumber);
    ising->add_option("--beta", *beta, "inverse temperature (>= 0)")
        ->required()
        ->check(CLI::NonNegativeNumber);
    ising->add_option("--t0", *t0, "initial block length (default: one sweep)")
        ->check(CLI::PositiveNumber);
    add_common_options(*ising, *opts);
    ising->callback([&action, opts, width, height, beta, t0] {
      action = [opts, width, height, beta, t0] {
        return run_cftp_ising(*opts, *width, *height, *beta, *t0);
      };
    });
  }
  {
    auto opts = std::make_shared<CommonOptions>();
    auto chain = std::make_shared<std::string>();
    auto* toy = cftp->add_subcommand("toy", "three-state toy chains");
    toy->add_option("--chain", *chain, "which chain")
        ->required()
        ->check(CLI::IsMember({"reset-walk", "reflecting"}));
    add_common_options(*toy, *opts);
    toy->callback([&action, opts, chain] {
      action = [opts, chain] { return run_cftp_toy(*opts, *chain); };
    });
  }

  // factory
  auto* factory = app.add_subcommand("factory", "Bernoulli factories over a hidden-p coin");
  factory->require_subcommand(1);
  {
    auto opts = std::make_shared<CommonOptions>();
    auto p = std::make_shared<double>(0.0);
    auto* vn = factory->add_subcommand("von-neumann", "fair bits from a biased coin");
    vn->add_option("--p", *p, "hidden coin probability (test harness)")
        ->required()
        ->check(CLI::Range(0.0, 1.0));
    add_common_options(*vn, *opts);
    vn->callback([&action, opts, p] {
      action = [opts, p] {
        return run_factory(*opts, *p, [](perfectsim::CoinSource& coin,
                                         perfectsim::RandomStream& stream) {
          return perfectsim::von_neumann(coin, stream);
        });
      };
    });
  }
  {
    auto opts = std::make_shared<CommonOptions>();
    auto p = std::make_shared<double>(0.0);
    auto c = std::make_shared<double>(0.0);
    auto* exp_cmd = factory->add_subcommand("exp", "Bern(exp(-Cp)) factory");
    exp_cmd->add_option("--c", *c, "known constant C > 0")
        ->required()
        ->check(strictly_greater(0.0, "--c"));
    exp_cmd->add_option("--p", *p, "hidden coin probability (test harness)")
        ->required()
        ->check(CLI::Range(0.0, 1.0));
    add_common_options(*exp_cmd, *opts);
    exp_cmd->callback([&action, opts, p, c] {
      action = [opts, p, c] {
        return run_factory(*opts, *p, [c](perfectsim::CoinSource& coin,
                                          perfectsim::RandomStream& stream) {
          return perfectsim::exp_factory(coin, *c, stream);
        });
      };
    });
  }
  {
    auto opts = std::make_shared<CommonOptions>();
    auto p = std::make_shared<double>(0.0);
    auto c = std::make_shared<double>(0.0);
    auto eps = std::make_shared<double>(0.0);
    auto* lin = factory->add_subcommand("linear", "Bern(Cp) factory, contract Cp <= 1-eps");
    lin->add_option("--c", *c, "known constant C > 1")
        ->required()
        ->check(strictly_greater(1.0, "--c"));
    lin->add_option("--eps", *eps, "slack parameter in (0,1)")
        ->required()
        ->check(open_unit_interval("--eps"));
    lin->add_option("--p", *p, "hidden coin probability (test harness)")
        ->required()
        ->check(CLI::Range(0.0, 1.0));
    add_common_options(*lin, *opts);
    lin->callback([&action, opts, p, c, eps] {
      action = [opts, p, c, eps] {
        return run_factory(*opts, *p, [c, eps](perfectsim::CoinSource& coin,
                                               perfectsim::RandomStream& stream) {
          return perfectsim::linear_factory(coin, *c, *eps, stream);
        });
      };
    });
  }

  // verify
  {
    auto suite = std::make_shared<std::string>("all");
    auto seed = std::make_shared<std::uint64_t>(perfectsim::suite::kDefaultSeed);
    auto out = std::make_shared<std::string>("report.json");
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("--suite", *suite, "which suite")
        ->check(CLI::IsMember({"all", "ar", "cftp", "factory", "bounds"}));
    verify->add_option("--seed", *seed, "suite seed");
    verify->add_option("--out", *out, "report path");
    verify->callback([&action, suite, seed, out] {
      action = [suite, seed, out] { return run_verify(*suite, *seed, *out); };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return action ? action() : 2;
  } catch (const perfectsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
